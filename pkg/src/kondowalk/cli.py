"""Command-line driver that runs walk experiments from a config file and writes CSV results.

Usage::

    kondowalk spectrum --config run.cfg --set j=3 --outdir out/

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Angles accept ``pi`` multiples such as ``pi/10`` or ``0.5*pi``.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bound import assemble_bound_state, bound_eigenvalues_xx
from .entanglement import DEFAULT_CAP, negativity
from .errors import ConfigError, LatticeRangeError, RegimeError
from .evolve1w import Frame, StateClass, build_u1w, classify, spectrum
from .evolve2w import Evolver2W, observables, transmission
from .hilbert import ModelParams, ParticleStatistics, norm
from .operators import (
    Family,
    cayley_oracle_1w,
    cayley_oracle_2w,
    coin,
    coin_sqrt,
    detect_family,
    family_couplings,
    s_imp_1w,
    s_imp_1w_sqrt,
    s_imp_2w,
    s_imp_2w_sqrt,
)
from .scenarios import initial_state

COMMANDS = ("matrices", "spectrum", "bound", "evolve", "negativity")


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    """Every key a config file may set.

    ``j`` together with ``family`` is shorthand for the coupling triple.
    ``stats`` has no default and must be set for ``evolve`` and
    ``negativity``; it and ``j_list`` accept comma-separated lists.
    ``snapshots`` lists the times at which ``evolve`` writes ``P(x1, x2)``;
    it defaults to the final step.
    """

    phi: float | None = None
    epsilon: float = 1.0
    m: float | None = None
    j_x: float | None = None
    j_y: float | None = None
    j_z: float | None = None
    j: float | None = None
    family: str | None = None
    lx: int = 201
    band_margin: float = 1e-9
    support_eps: float = 0.0
    steps: int = 0
    x0: int = 13
    stats: tuple | None = None
    frame: str = "symmetric"
    init: str = "delta_delta"
    bound_index: int = 1
    j_list: tuple | None = None
    snapshots: tuple | None = None
    cap: int = DEFAULT_CAP
    compress: bool = True

    def model_params(self, j=None):
        """Build :class:`ModelParams`, optionally overriding the family coupling."""
        explicit = (self.j_x, self.j_y, self.j_z)
        jj = self.j if j is None else j
        if jj is not None:
            if any(v is not None for v in explicit):
                raise ConfigError("set either j (with family) or j_x/j_y/j_z, not both")
            couplings = family_couplings(self.family or "xx", jj)
        else:
            couplings = tuple(0.0 if v is None else v for v in explicit)
            if self.family is not None and detect_family(*couplings) is not Family(self.family):
                raise ConfigError(f"couplings {couplings} do not match family {self.family}")
        jx, jy, jz = couplings
        return ModelParams(
            phi=self.phi, epsilon=self.epsilon, m=self.m, j_x=jx, j_y=jy, j_z=jz,
            lx=self.lx, band_margin=self.band_margin, support_eps=self.support_eps,
        )

    def echo(self):
        """Config as ``{key: text}`` that :func:`parse_config` reads back exactly."""
        return {f.name: _format_value(getattr(self, f.name)) for f in dataclasses.fields(self)}


_FLOAT_KEYS = {"phi", "epsilon", "m", "j_x", "j_y", "j_z", "j", "band_margin", "support_eps"}
_INT_KEYS = {"lx", "steps", "x0", "bound_index", "cap"}
_CHOICES = {
    "family": tuple(f.value for f in Family),
    "frame": tuple(f.value for f in Frame),
    "init": ("delta_delta", "bound_delta"),
}
_PI_RE = re.compile(
    r"^(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi"
    r"(?:\s*/\s*(?P<den>\d+\.?\d*(?:[eE][+-]?\d+)?))?$"
)


def _parse_float(text):
    t = text.strip()
    if t == "none":
        return None
    try:
        return float(t)
    except ValueError:
        pass
    m = _PI_RE.match(t.replace("-pi", "-1*pi").replace("+pi", "1*pi"))
    if not m:
        raise ValueError(f"not a number: {text!r}")
    coef = float(m["coef"]) if m["coef"] else 1.0
    den = float(m["den"]) if m["den"] else 1.0
    return coef * math.pi / den


def _parse_int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _parse_value(key, text):
    text = text.strip()
    if key in _FLOAT_KEYS:
        return _parse_float(text)
    if key in _INT_KEYS:
        return _parse_int(text)
    if key in _CHOICES:
        if text == "none" and key == "family":
            return None
        if text not in _CHOICES[key]:
            raise ValueError(f"expected one of {_CHOICES[key]}, got {text!r}")
        return text
    if key == "stats":
        if text == "none":
            return None
        items = tuple(s.strip() for s in text.split(",") if s.strip())
        for s in items:
            ParticleStatistics(s)
        if not items:
            raise ValueError("empty stats list")
        return items
    if key == "j_list":
        return None if text == "none" else tuple(_parse_float(s) for s in text.split(","))
    if key == "snapshots":
        return None if text == "none" else tuple(_parse_int(s) for s in text.split(","))
    if key == "compress":
        if text not in ("true", "false"):
            raise ValueError(f"expected true or false, got {text!r}")
        return text == "true"
    raise KeyError(key)


def _format_value(v):
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    return str(v)


_KNOWN = {f.name for f in dataclasses.fields(RunConfig)}


def _apply(values, key, text, where):
    if key not in _KNOWN:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        values[key] = _parse_value(key, text)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def parse_config(text, source="<config>", overrides=()):
    """Parse config text plus ``key=value`` overrides into a :class:`RunConfig`."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        _apply(values, key, val, f"{source}:{lineno}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        _apply(values, key, val, f"--set {item}")
    return RunConfig(**values)


# ---------------------------------------------------------------- output


def _num(x):
    return format(float(x), ".17g")


class OutputDir:
    """Collects CSV outputs and their checksums for one run."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.checksums = {}

    def write_csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        data = buf.getvalue().encode()
        _atomic_write(self.path / name, data)
        self.checksums[name] = hashlib.sha256(data).hexdigest()

    def write_manifest(self, command, config, started, wall):
        manifest = {
            "command": command,
            "version": __version__,
            "config": config.echo(),
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "wall_seconds": wall,
            "outputs": self.checksums,
        }
        _atomic_write(self.path / "manifest.json", json.dumps(manifest, indent=2).encode())


def _atomic_write(path, data):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _matrix_rows(mat):
    mat = np.asarray(mat)
    return [
        (r, c, _num(mat[r, c].real), _num(mat[r, c].imag))
        for r in range(mat.shape[0])
        for c in range(mat.shape[1])
    ]


# ---------------------------------------------------------------- commands


def cmd_matrices(cfg, out):
    p = cfg.model_params()
    eps, (jx, jy, jz) = p.epsilon, p.couplings
    mats = {
        "coin": coin(p.phi).entries,
        "coin_sqrt": coin_sqrt(p.phi).entries,
        "s_imp_1w": s_imp_1w(eps, jx, jy, jz).entries,
        "s_imp_1w_sqrt": s_imp_1w_sqrt(eps, jx, jy, jz).entries,
        "s_imp_2w": s_imp_2w(eps, jx, jy, jz).entries,
    }
    family = detect_family(jx, jy, jz)
    if family is not None and not (family is Family.SU2 and eps != 1):
        mats["s_imp_2w_sqrt"] = s_imp_2w_sqrt(eps, jx, family).entries
    for name, m in mats.items():
        out.write_csv(f"{name}.csv", ("row", "col", "re", "im"), _matrix_rows(m))

    def dev(a, b):
        return float(np.abs(np.asarray(a) - np.asarray(b)).max())

    devs = [
        ("s_imp_1w_vs_cayley", dev(mats["s_imp_1w"], cayley_oracle_1w(eps, jx, jy, jz))),
        ("s_imp_2w_vs_cayley", dev(mats["s_imp_2w"], cayley_oracle_2w(eps, jx, jy, jz))),
        ("coin_sqrt_squared", dev(mats["coin_sqrt"] @ mats["coin_sqrt"], mats["coin"])),
        ("s_imp_1w_sqrt_squared",
         dev(mats["s_imp_1w_sqrt"] @ mats["s_imp_1w_sqrt"], mats["s_imp_1w"])),
    ]
    if "s_imp_2w_sqrt" in mats:
        devs.append(("s_imp_2w_sqrt_squared",
                     dev(mats["s_imp_2w_sqrt"] @ mats["s_imp_2w_sqrt"], mats["s_imp_2w"])))
    out.write_csv("oracle_dev.csv", ("check", "max_dev"), [(k, _num(v)) for k, v in devs])


def cmd_spectrum(cfg, out):
    p = cfg.model_params()
    res = spectrum(build_u1w(p, cfg.frame), p)
    rows = [
        (k, _num(w.real), _num(w.imag), _num(np.angle(w)), c.value, _num(ell))
        for k, (w, c, ell) in enumerate(zip(res.eigenvalues, res.classes, res.loc_lengths))
    ]
    out.write_csv("spectrum.csv", ("idx", "re", "im", "lambda", "class", "loc_length"), rows)


def cmd_bound(cfg, out):
    if cfg.family not in (None, "xx"):
        raise ConfigError("bound: closed-form bound states exist for family=xx only")
    js = cfg.j_list or ((cfg.j,) if cfg.j is not None else (cfg.j_x or 0.0,))
    rows = []
    for j in js:
        p = cfg.model_params(j=j)
        u = None
        for which, w in enumerate(bound_eigenvalues_xx(p.phi, j), start=1):
            lam = float(np.angle(w))
            cls = classify(w, p.phi, p.band_margin)
            zp = ell = det = res = math.nan
            if cls is StateClass.BOUND:
                sol = assemble_bound_state(p.phi, j, which, p.lx)
                if u is None:
                    u = build_u1w(p, Frame.SHIFTED).entries
                psi = sol.wavefunction.amplitudes
                res = float(np.linalg.norm(u @ psi - sol.eigenvalue * psi))
                zp, ell, det = sol.zeta_plus, sol.localization_length, sol.determinant_residual
            rows.append((
                _num(j), _num(p.phi), which, "cos_positive" if w.real > 0 else "cos_negative",
                _num(w.real), _num(w.imag), _num(lam), cls.value,
                _num(zp), _num(ell), _num(det), _num(res),
            ))
    out.write_csv(
        "bound.csv",
        ("J", "phi", "which", "branch", "re", "im", "lambda", "class",
         "zeta_plus", "loc_length", "det_residual", "eigen_residual"),
        rows,
    )


def _require_stats(cfg):
    if not cfg.stats:
        raise ConfigError("stats must be set (fermion, boson and/or distinguishable)")
    return cfg.stats


def cmd_evolve(cfg, out):
    p = cfg.model_params()
    ev = Evolver2W(p)
    snaps = set(cfg.snapshots if cfg.snapshots is not None else (cfg.steps,))
    half = p.half
    for stats in _require_stats(cfg):
        series, joint, marg = [], [], []
        psi0 = initial_state(p, cfg.init, stats, cfg.x0, cfg.bound_index)
        for t, s in ev.run(psi0, cfg.steps):
            obs = observables(s)
            series.append((
                t, _num(norm(s)), _num(obs.sz), _num(transmission(s)),
                _num(obs.singlet_weight[0]), _num(obs.singlet_weight[1]),
            ))
            if t in snaps:
                for i in range(p.lx):
                    marg.append((t, i - half, _num(obs.p_marg1[i]), _num(obs.p_marg2[i])))
                    joint.extend(
                        (t, i - half, k - half, _num(obs.p_joint[i, k])) for k in range(p.lx)
                    )
        out.write_csv(
            f"timeseries_{stats}.csv",
            ("t", "norm", "sz", "transmission", "singlet_w1", "singlet_w2"),
            series,
        )
        out.write_csv(f"p_joint_{stats}.csv", ("t", "x1", "x2", "p"), joint)
        out.write_csv(f"marginals_{stats}.csv", ("t", "x", "p1", "p2"), marg)


def cmd_negativity(cfg, out):
    p = cfg.model_params()
    ev = Evolver2W(p)
    for stats in _require_stats(cfg):
        rows = []
        psi0 = initial_state(p, cfg.init, stats, cfg.x0, cfg.bound_index)
        for t, s in ev.run(psi0, cfg.steps):
            r = negativity(s, p.support_eps, cap=cfg.cap, compress=cfg.compress)
            rows.append((t, _num(r.negativity), _num(r.min_eigenvalue),
                         r.spectrum_dim, r.support_dim))
        out.write_csv(
            f"negativity_{stats}.csv",
            ("t", "negativity", "min_eig", "dim", "support_dim"),
            rows,
        )


_HANDLERS = {
    "matrices": cmd_matrices,
    "spectrum": cmd_spectrum,
    "bound": cmd_bound,
    "evolve": cmd_evolve,
    "negativity": cmd_negativity,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="kondowalk", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} command")
        sp.add_argument("--config", type=Path, help="key = value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
        sp.add_argument("--outdir", type=Path, required=True, help="output directory")
    return ap


def run(command, cfg, outdir):
    """Run one command and write its outputs plus ``manifest.json``."""
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    out = OutputDir(outdir)
    _HANDLERS[command](cfg, out)
    out.write_manifest(command, cfg, started, time.perf_counter() - t0)
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text, str(args.config or "<none>"), args.set)
        run(args.command, cfg, args.outdir)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, LatticeRangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except RegimeError as exc:
        print(f"numerical regime error: {exc}", file=sys.stderr)
        return 3
    return 0

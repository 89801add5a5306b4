import csv
import json
import math

import numpy as np
import pytest

from kondowalk.cli import RunConfig, main, parse_config, run
from kondowalk.errors import ConfigError
from kondowalk.evolve2w import initial_delta_delta, observables
from kondowalk.bound import localization_length_analytic


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def matrix_from_csv(path):
    rows = read_csv(path)
    n = max(int(r["row"]) for r in rows) + 1
    m = np.zeros((n, n), complex)
    for r in rows:
        m[int(r["row"]), int(r["col"])] = float(r["re"]) + 1j * float(r["im"])
    return m


def cfg(**kw):
    return parse_config("", overrides=[f"{k}={v}" for k, v in kw.items()])


# ---------------------------------------------------------------- parsing


def test_parse_config_file_syntax():
    text = "# model\nphi = pi/10   # coin angle\n\nj = 3\nfamily = su2\nstats = fermion, boson\n"
    c = parse_config(text)
    assert c.phi == math.pi / 10
    assert c.j == 3.0 and c.family == "su2"
    assert c.stats == ("fermion", "boson")
    assert c.model_params().couplings == (3.0, 3.0, 3.0)


@pytest.mark.parametrize(
    "text, value",
    [("pi", math.pi), ("-pi/2", -math.pi / 2), ("0.5*pi", 0.5 * math.pi), ("2pi/3", 2 * math.pi / 3),
     ("0.1", 0.1), ("1e-3", 1e-3)],
)
def test_angle_expressions(text, value):
    assert parse_config(f"phi = {text}").phi == value


def test_full_precision_numbers():
    assert parse_config("phi = 0.31415926535897931").phi == 0.31415926535897931


def test_unknown_key_reports_line():
    with pytest.raises(ConfigError, match=r"run.cfg:3: unknown key 'jay'"):
        parse_config("phi = 0.1\n\njay = 2\n", "run.cfg")


@pytest.mark.parametrize(
    "text", ["phi = abc", "lx = 3.5", "stats = fermions", "frame = diagonal", "compress = yes", "lx"]
)
def test_bad_values_report_line(text):
    with pytest.raises(ConfigError, match=r"c:2:"):
        parse_config("# header\n" + text, "c")


def test_overrides_win_and_are_checked():
    c = parse_config("lx = 11\n", overrides=["lx=21"])
    assert c.lx == 21
    with pytest.raises(ConfigError, match="--set"):
        parse_config("", overrides=["lx"])


def test_conflicting_coupling_keys():
    with pytest.raises(ConfigError):
        cfg(phi=0.1, j=1, j_x=1).model_params()
    with pytest.raises(ConfigError):
        cfg(phi=0.1, j_x=1, j_y=1, j_z=0.5, family="su2").model_params()


def test_config_round_trip():
    c = parse_config("phi = pi/7\nj = 0.1\nstats = boson,fermion\nsnapshots = 0,3\ncompress = false\nm = none")
    text = "\n".join(f"{k} = {v}" for k, v in c.echo().items())
    assert parse_config(text) == c
    assert RunConfig() == parse_config(
        "\n".join(f"{k} = {v}" for k, v in RunConfig().echo().items())
    )


# ---------------------------------------------------------------- commands


def test_matrices_identity_without_coupling(tmp_path):
    run("matrices", cfg(phi=0, j=0), tmp_path)
    for name in ("coin", "coin_sqrt", "s_imp_1w", "s_imp_1w_sqrt", "s_imp_2w", "s_imp_2w_sqrt"):
        m = matrix_from_csv(tmp_path / f"{name}.csv")
        np.testing.assert_array_equal(m, np.eye(m.shape[0]))


def test_matrices_xx_coupling(tmp_path):
    run("matrices", cfg(phi="pi/10", j=1), tmp_path)
    m = matrix_from_csv(tmp_path / "s_imp_1w.csv")
    # spin-flip entry sits on the (R up, L down) pair
    assert m[1, 2] == pytest.approx(1j, abs=1e-15) and m[2, 1] == pytest.approx(1j, abs=1e-15)
    devs = read_csv(tmp_path / "oracle_dev.csv")
    assert len(devs) == 5
    assert max(float(r["max_dev"]) for r in devs) < 1e-12


def test_matrices_skip_unsupported_root(tmp_path):
    out = run("matrices", cfg(phi=0.2, j_x=1, j_y=0.5, j_z=0.2), tmp_path)
    assert "s_imp_2w_sqrt.csv" not in out.checksums
    assert max(float(r["max_dev"]) for r in read_csv(tmp_path / "oracle_dev.csv")) < 1e-12


@pytest.mark.slow
def test_spectrum_xx(tmp_path):
    run("spectrum", cfg(phi="pi/10", j=3, lx=201), tmp_path)
    rows = read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 804
    bound = [r for r in rows if r["class"] == "bound"]
    assert len(bound) == 4
    assert all(float(r["loc_length"]) > 0 for r in bound)
    assert all(r["loc_length"] == "nan" for r in rows if r["class"] == "bulk")


@pytest.mark.slow
def test_spectrum_su2(tmp_path):
    run("spectrum", cfg(phi="pi/10", j=20, family="su2", lx=201), tmp_path)
    assert sum(r["class"] == "bound" for r in read_csv(tmp_path / "spectrum.csv")) == 8


def test_spectrum_free_walk(tmp_path):
    run("spectrum", cfg(phi="pi/10", j=0, lx=31, frame="shifted"), tmp_path)
    rows = read_csv(tmp_path / "spectrum.csv")
    assert len(rows) == 124 and not any(r["class"] == "bound" for r in rows)


def test_bound_table(tmp_path):
    run("bound", cfg(phi="pi/10", j_list="0,1,3,20"), tmp_path)
    rows = read_csv(tmp_path / "bound.csv")
    assert len(rows) == 16
    ref = {1: (0.975835154416, 0.218508012224), 3: (0.995213971827, 0.0977197537924),
           20: (0.999880926199, 0.0154315722942)}
    for r in rows:
        j = float(r["J"])
        if j == 0:
            assert r["class"] == "bulk" and r["loc_length"] == "nan"
            continue
        re, im = ref[int(j)]
        assert abs(abs(float(r["re"])) - re) < 1e-12 and abs(abs(float(r["im"])) - im) < 1e-12
        lam = float(r["lambda"])
        assert float(r["loc_length"]) == pytest.approx(localization_length_analytic(lam, math.pi / 10), rel=1e-14)
        assert float(r["eigen_residual"]) < 1e-8


def test_bound_rejects_su2(tmp_path):
    with pytest.raises(ConfigError):
        run("bound", cfg(phi=0.3, j=1, family="su2"), tmp_path)


def test_evolve_zero_steps_is_initial_state(tmp_path):
    c = cfg(phi="pi/10", j=3, lx=21, x0=5, stats="fermion", steps=0)
    run("evolve", c, tmp_path)
    p = c.model_params()
    ref = observables(initial_delta_delta(p, "fermion", 5)).p_joint
    rows = read_csv(tmp_path / "p_joint_fermion.csv")
    assert len(rows) == 21 * 21
    got = np.zeros((21, 21))
    for r in rows:
        got[int(r["x1"]) + 10, int(r["x2"]) + 10] = float(r["p"])
    np.testing.assert_array_equal(got, ref)
    (series,) = read_csv(tmp_path / "timeseries_fermion.csv")
    assert float(series["norm"]) == pytest.approx(1, abs=1e-15)


def test_evolve_su2_bound_delta_series(tmp_path):
    c = cfg(phi="pi/10", j=10, family="su2", lx=41, x0=13, init="bound_delta",
            bound_index=2, steps=6, snapshots="0,6", stats="distinguishable")
    run("evolve", c, tmp_path)
    series = read_csv(tmp_path / "timeseries_distinguishable.csv")
    assert [int(r["t"]) for r in series] == list(range(7))
    assert all(-1 <= float(r["sz"]) <= 1 for r in series)
    assert {int(r["t"]) for r in read_csv(tmp_path / "marginals_distinguishable.csv")} == {0, 6}


def test_negativity_delta_delta_statistics(tmp_path):
    c = cfg(phi="pi/10", j=3, lx=21, x0=5, steps=12, stats="fermion,boson,distinguishable")
    out = run("negativity", c, tmp_path)
    assert {f"negativity_{s}.csv" for s in ("fermion", "boson", "distinguishable")} <= set(out.checksums)
    f = [float(r["negativity"]) for r in read_csv(tmp_path / "negativity_fermion.csv")]
    b = [float(r["negativity"]) for r in read_csv(tmp_path / "negativity_boson.csv")]
    assert len(f) == 13
    # before the packet wraps around the ring
    assert np.abs(np.array(f) - np.array(b)).max() < 1e-10


def test_negativity_bound_delta_fermion_exceeds_boson(tmp_path):
    c = cfg(phi="pi/10", j=3, lx=41, x0=13, steps=16, init="bound_delta", stats="fermion,boson")
    run("negativity", c, tmp_path)
    f = [float(r["negativity"]) for r in read_csv(tmp_path / "negativity_fermion.csv")]
    b = [float(r["negativity"]) for r in read_csv(tmp_path / "negativity_boson.csv")]
    assert all(f[t] > b[t] for t in range(14, 17))


def test_negativity_without_coupling_is_zero(tmp_path):
    run("negativity", cfg(phi="pi/10", j=0, lx=21, x0=5, steps=15, stats="distinguishable"), tmp_path)
    vals = [float(r["negativity"]) for r in read_csv(tmp_path / "negativity_distinguishable.csv")]
    assert max(vals) < 1e-10


# ---------------------------------------------------------------- files and exit codes


def test_reruns_are_byte_identical(tmp_path):
    c = cfg(phi="pi/10", j=3, lx=15, x0=4, steps=5, stats="boson")
    a = run("evolve", c, tmp_path / "a").checksums
    b = run("evolve", c, tmp_path / "b").checksums
    assert a == b
    for name in a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_contents(tmp_path):
    c = cfg(phi="pi/9", j=1)
    run("matrices", c, tmp_path)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["command"] == "matrices"
    assert man["wall_seconds"] >= 0 and man["started"] <= man["finished"]
    assert set(man["outputs"]) == {p.name for p in tmp_path.glob("*.csv")}
    text = "\n".join(f"{k} = {v}" for k, v in man["config"].items())
    assert parse_config(text) == c
    assert not list(tmp_path.glob("*.tmp"))


def test_numbers_round_trip(tmp_path):
    run("bound", cfg(phi="pi/10", j=1), tmp_path)
    r = read_csv(tmp_path / "bound.csv")[0]
    assert float(r["phi"]) == math.pi / 10
    assert len(r["re"].replace("0.", "", 1)) >= 16


def test_main_exit_codes(tmp_path, capsys):
    assert main(["matrices", "--set", "phi=0.2", "--set", "j=1", "--outdir", str(tmp_path / "ok")]) == 0
    assert main(["matrices", "--set", "bogus=1", "--outdir", str(tmp_path)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("phi = 0.2\nlx = 4\n")
    assert main(["spectrum", "--config", str(bad), "--outdir", str(tmp_path)]) == 2
    assert main(["spectrum", "--config", str(tmp_path / "missing.cfg"), "--outdir", str(tmp_path)]) == 2
    assert main(["evolve", "--set", "phi=0.2", "--set", "j=1", "--set", "family=su2",
                 "--set", "epsilon=0.5", "--set", "lx=5", "--set", "x0=1", "--set", "stats=boson",
                 "--outdir", str(tmp_path)]) == 3
    assert main(["negativity", "--set", "phi=0.2", "--set", "j=3", "--set", "lx=11",
                 "--set", "x0=3", "--set", "steps=4", "--set", "cap=2", "--set", "stats=fermion",
                 "--outdir", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "unknown key" in err and "cap" in err


def test_statistics_must_be_chosen(tmp_path):
    with pytest.raises(ConfigError, match="stats"):
        run("evolve", cfg(phi=0.2, j=1, lx=5, x0=1), tmp_path)


def test_outdir_required():
    with pytest.raises(SystemExit) as exc:
        main(["matrices", "--set", "phi=0.1"])
    assert exc.value.code == 2

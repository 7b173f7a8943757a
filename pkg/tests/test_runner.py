import hashlib
import json

import numpy as np
import pytest

from specrescale import cli, runner
from specrescale.config import PRESETS, config_from_dict, load_preset, parse_config
from specrescale.diagnostics import average_over_cycles
from specrescale.errors import ConfigError, NonFiniteState
from specrescale.runner import RunManifest, analyze, read_table_csv, run

SMALL = """
[run]
model = burgers
n = 128
viscosity = 1e-4

[cascade]
epsilon = 1e-4
max_cycles = 4

[diagnostics]
orders = 2,3
fit_range = auto
blowup_first_cycle = 0
blowup_tail = 20
"""


def _files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("small")
    m = run(parse_config(SMALL), root / "run")
    assert m.complete, m.error
    return m


@pytest.mark.parametrize("name", PRESETS)
def test_presets_parse_and_round_trip(name):
    cfg = load_preset(name)
    again = config_from_dict(cfg.as_dict())
    assert again.as_dict() == cfg.as_dict() and again.hash() == cfg.hash()
    assert parse_config(cfg.to_ini()).hash() == cfg.hash()


def test_hash_ignores_output_directory_only():
    a = parse_config(SMALL)
    b = parse_config(SMALL + "\n[output]\ndirectory = elsewhere\n")
    c = parse_config(SMALL.replace("epsilon = 1e-4", "epsilon = 2e-4"))
    assert a.hash() == b.hash() != c.hash()


@pytest.mark.parametrize("bad", [
    "[cascade]\nepsilon = 0\n",
    "[cascade]\nepsilon = -1e-3\n",
    "[cascade]\nepsilon = 1.5\n",
    "[run]\nn = 100\n",
    "[run]\nmodel = navier\n",
    "[run]\nspeed = 3\n",
    "[extra]\nx = 1\n",
    "[diagnostics]\nfit_range = 1,0.5\n",
    "[diagnostics]\nflavors = diagonal\n",
])
def test_invalid_configs_are_rejected(bad):
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_config_error_writes_nothing(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[cascade]\nepsilon = 0\n")
    assert cli.main(["run", "--config", str(ini), "--out", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "--preset", "no_such_preset"]) == 2
    assert cli.main(["analyze", str(tmp_path / "missing")]) == 2
    with pytest.raises(SystemExit):
        cli.main(["run"])


def test_numerical_failure_marks_manifest_incomplete(tmp_path, monkeypatch):
    ini = tmp_path / "small.ini"
    ini.write_text(SMALL)

    def explode(model, initial, cfg, icfg, progress=None, on_snapshot=None, **kw):
        raise NonFiniteState("state became non-finite at t = 0.5")

    monkeypatch.setattr(runner, "run_cascade", explode)
    assert cli.main(["run", "--config", str(ini), "--out", str(tmp_path / "r")]) == 3
    m = RunManifest.read(tmp_path / "r")
    assert not m.complete and "NonFiniteState" in m.error
    assert cli.main(["analyze", str(tmp_path / "r")]) == 2


def test_manifest_records_valid_checksums(small_run):
    m = RunManifest.read(small_run.root)
    assert m.complete and m.ledger["cycles"] == 5
    assert len(m.checkpoints) == 5
    for rec in m.checkpoints + m.outputs:
        data = (m.root / rec["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == rec["sha256"] and len(data) == rec["bytes"]
    assert m.run_config().hash() == m.config_hash


def test_analyze_reproduces_diagnostics_byte_for_byte(small_run, tmp_path):
    analyze(small_run.root, tmp_path / "a")
    assert _files(tmp_path / "a") == _files(small_run.root / "diagnostics")
    # the CLI path gives the same bytes
    assert cli.main(["analyze", str(small_run.root / "manifest.json"), "--out", str(tmp_path / "b")]) == 0
    assert _files(tmp_path / "b") == _files(small_run.root / "diagnostics")


def test_fit_range_override_changes_only_fits(small_run, tmp_path):
    base = small_run.root / "diagnostics"
    analyze(small_run.root, tmp_path / "n", fit_range="0.1,0.6")
    a, b = _files(base), _files(tmp_path / "n")
    changed = {k for k in a if a[k] != b[k]}
    assert changed == {"summary.json"}
    sa, sb = json.loads(a["summary.json"]), json.loads(b["summary.json"])
    assert sb["fit_range"] == [0.1, 0.6]
    # fits report the grid separations actually used inside the requested window
    assert all(0.1 <= f["fit_range"][0] < f["fit_range"][1] <= 0.6 for f in sb["fits"])
    assert all(f["range_mode"] == "fixed" for f in sb["fits"])
    assert [f["fit_range"] for f in sa["fits"]] != [f["fit_range"] for f in sb["fits"]]
    for key in ("ledger", "bkm_integral", "blowup", "max_vorticity_original"):
        assert sa[key] == sb[key]


@pytest.mark.parametrize("exclude", [True, False])
def test_exclude_cycle0_matches_manual_average(small_run, tmp_path, exclude):
    out = tmp_path / str(exclude)
    analyze(small_run.root, out, exclude_cycle0=exclude)
    for n in (2, 3):
        name = f"n{n}_scalar-axis"
        per = [read_table_csv(p, n, cycle=int(p.name[1:4]), flavor="scalar-axis")
               for p in sorted((out / "cycles").glob(f"c*_sf_{name}.csv"))]
        assert [t.cycle for t in per] == list(range(5))
        manual = average_over_cycles(per, exclude_cycle0=exclude)
        got = read_table_csv(out / f"sf_{name}.csv", n)
        assert np.array_equal(got.values, manual.values) and np.array_equal(got.r, manual.r)
        assert np.array_equal(got.variance, manual.variance)


def test_runs_are_deterministic(small_run, tmp_path):
    m = run(parse_config(SMALL), tmp_path / "again")
    assert _files(tmp_path / "again" / "diagnostics") == _files(small_run.root / "diagnostics")
    assert _files(tmp_path / "again" / "checkpoints") == _files(small_run.root / "checkpoints")
    assert m.config_hash == small_run.config_hash


def test_run_or_reuse_skips_completed_runs(tmp_path, monkeypatch):
    cfg = parse_config(SMALL)
    first = runner.run_or_reuse(cfg, tmp_path)
    monkeypatch.setattr(runner, "run", lambda *a, **k: pytest.fail("should reuse"))
    again = runner.run_or_reuse(parse_config(SMALL), tmp_path)
    assert again.root == first.root and again.config_hash == first.config_hash

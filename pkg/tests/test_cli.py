import csv
import json
from pathlib import Path

import pytest

from fdnet.cli import CDF_HEADER, DECOMPOSITION_HEADER, SWEEP_HEADER, load_preset, main
from fdnet.config import SimConfig, load_config


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def snapshot(directory: Path) -> dict:
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_run_writes_bundle(tmp_path):
    cfg = tmp_path / "baseline.json"
    cfg.write_text(json.dumps({"lambda_bs": 2.5e-5, "r0": 40, "realizations": 60}))
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--seed", "7", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "cdf_dl.csv", "cdf_sum.csv", "cdf_ul.csv", "decomposition.csv", "summary.json",
    ]
    for name in ("cdf_ul.csv", "cdf_dl.csv", "cdf_sum.csv"):
        rows = read_csv(out / name)
        assert tuple(rows[0]) == CDF_HEADER and len(rows) == 61
        assert all(len(r) == 2 for r in rows)
        assert float(rows[-1][1]) == 1.0
        values = [float(r[0]) for r in rows[1:]]
        assert values == sorted(values)
    rows = read_csv(out / "decomposition.csv")
    assert tuple(rows[0]) == DECOMPOSITION_HEADER and len(rows) == 11
    summary = json.loads((out / "summary.json").read_text())
    assert summary["config"]["seed"] == 7 and summary["realizations"] == 60
    assert set(summary["mode_fractions"]) == {"FD", "HD_UL", "HD_DL"}


def test_summary_config_round_trips(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--realizations", "5", "--algorithm", "2", "--opa", "local", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    cfg = load_config(json.dumps(summary["config"]))
    assert cfg.algorithm == "ALG2" and cfg.opa_enabled and cfg.opa_knowledge == "LOCAL"
    assert json.loads(json.dumps(cfg.to_dict())) == summary["config"]


def test_reruns_byte_identical_any_workers(tmp_path):
    args = ["run", "--realizations", "40", "--seed", "3", "--algorithm", "3", "--opa", "genie"]
    snaps = []
    for w in ("1", "2", "8"):
        out = tmp_path / w
        assert main(args + ["--workers", w, "--out", str(out)]) == 0
        snaps.append(snapshot(out))
    assert snaps[0] == snaps[1] == snaps[2]


def test_float_format_round_trips(tmp_path):
    out = tmp_path / "o"
    main(["run", "--realizations", "10", "--out", str(out)])
    for row in read_csv(out / "cdf_sum.csv")[1:]:
        assert repr(float(row[0])) == row[0]


def test_run_dump_topology(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--realizations", "3", "--dump-topology", "--out", str(out)]) == 0
    files = sorted((out / "topology").iterdir())
    assert [f.name for f in files] == ["topology_00000.csv", "topology_00001.csv", "topology_00002.csv"]
    rows = read_csv(files[0])
    assert rows[0] == ["kind", "x_m", "y_m"]
    assert {r[0] for r in rows[1:]} <= {"bs", "ul_mark", "ul_cand", "dl_cand"}


def test_dump_topology_command(tmp_path):
    assert main(["dump-topology", "--count", "2", "--seed", "5", "--out", str(tmp_path)]) == 0
    assert len(list(tmp_path.glob("topology_*.csv"))) == 2


def test_sweep_csv(tmp_path):
    out = tmp_path / "o"
    code = main(["sweep", "--axis", "antennas", "--values", "1x1", "2", "--realizations", "8",
                 "--all-variants", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "sweep.csv")
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 1 + 2 * 6 and all(len(r) == len(SWEEP_HEADER) for r in rows)
    assert {r[2] for r in rows[1:]} == {"off", "genie"}
    doc = json.loads((out / "sweep_summary.json").read_text())
    assert doc["axis"] == "antennas" and len(doc["points"]) == 12


def test_figure_presets_encode_baseline():
    for fid in (2, 3, 4, 5, 6, 7):
        doc = load_preset(fid)
        cfg = load_config(json.dumps(doc["config"]))
        assert cfg == SimConfig(), fid
    assert load_preset(5)["values"] == [1e-5, 2.5e-5, 1e-4]
    assert load_preset(7)["values"] == list(range(60, 131, 10))
    assert len(load_preset(7)["variants"]) == 6


def test_figure_seven_small(tmp_path):
    out = tmp_path / "fig7"
    assert main(["figure", "--id", "7", "--realizations", "4", "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 1 + 8 * 6
    assert rows[1][0] == "60"


def test_figure_two_small(tmp_path):
    out = tmp_path / "fig2"
    assert main(["figure", "--id", "2", "--realizations", "4", "--out", str(out)]) == 0
    assert (out / "alg3_opa-genie" / "cdf_ul.csv").exists()
    assert len(read_csv(out / "variants.csv")) == 7


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--bogus"],
        ["frobnicate"],
        [],
        ["figure", "--id", "9"],
        ["run", "--algorithm", "4"],
        ["run", "--seed", "-1"],
        ["run", "--realizations", "0"],
        ["run", "--workers", "0"],
        ["sweep", "--axis", "sic", "--values", "60", "x"],
        ["dump-topology", "--count", "0"],
    ],
)
def test_validation_errors_exit_1(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "o")] if argv and argv[0] != "frobnicate" else argv) == 1


def test_bad_config_document_exit_1(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"num_ul_candidates": 0}')
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    cfg.write_text("{not json")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_io_errors_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--realizations", "2", "--out", str(blocker / "sub")]) == 2

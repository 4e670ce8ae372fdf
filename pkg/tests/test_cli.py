import csv
import json

import numpy as np
import pytest

from vdb_channel.cli import Bundle, emit_curves, ingest_samples, main, run_scenario
from vdb_channel.exceptions import ValidationError


def rows(path):
    with open(path) as fh:
        body = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(body))


def test_ingest_point_mass_and_uniform(tmp_path):
    p = tmp_path / "same.csv"
    p.write_text("42\n" * 10)
    f_x, report = ingest_samples(p, 8)
    assert f_x.pmf[42] == 1.0 and report == {"accepted": 10, "rejected": 0}
    p.write_text("".join(f"{v},x\n" for v in range(16)))
    f_x, _ = ingest_samples(p, 4)
    assert np.all(f_x.pmf == 1 / 16)


def test_ingest_offset_and_rejects(tmp_path):
    p = tmp_path / "signed.csv"
    p.write_text("value\n-128\n0\n127\n200\n")
    f_x, report = ingest_samples(p, 8, offset=128, header=True)
    assert report == {"accepted": 3, "rejected": 1}
    assert f_x.pmf[[0, 128, 255]].tolist() == pytest.approx([1 / 3] * 3)


def test_ingest_large_file_conserves_mass(tmp_path):
    rng = np.random.default_rng(5)
    data = np.clip(np.round(rng.normal(0, 40, 29978)), -128, 127).astype(int)
    p = tmp_path / "acc.csv"
    p.write_text("\n".join(map(str, data)) + "\n")
    f_x, report = ingest_samples(p, 8, offset=128)
    assert report["accepted"] == 29978
    assert abs(f_x.pmf.sum() - 1.0) <= 1e-12


@pytest.mark.parametrize("text,msg", [("", "no usable"), ("1\n2\nabc\n", ":3:")])
def test_ingest_errors(tmp_path, text, msg):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(ValidationError, match=msg):
        ingest_samples(p, 8)


def test_zero_channel_tail_file(tmp_path):
    out = tmp_path / "zero"
    assert main(["distortion", "--width", "4", "--p-down", "0", "--p-up", "0", "--out", str(out)]) == 0
    tail = [r for r in rows(f"{out}.csv") if r["series"] == "tail"]
    assert len(tail) == 16 and all(float(r["value"]) == 0 for r in tail)
    mirror = json.loads((tmp_path / "zero.json").read_text())
    assert mirror["scenario"]["width"] == 4 and mirror["columns"] == ["m", "value", "series"]


def test_coarse_sweep(tmp_path):
    out = tmp_path / "sweep"
    assert main(["i2c-sweep", "--preset", "coarse", "--out", str(out)]) == 0
    data = rows(f"{out}.csv")
    labels = list(dict.fromkeys(r["series"] for r in data))
    assert labels == [f"setting={s}" for s in range(8, 13)] + ["worst-case"]
    curves = {lab: np.array([float(r["value"]) for r in data if r["series"] == lab]) for lab in labels}
    for a, b in zip(labels[:4], labels[1:5]):
        assert np.all(curves[b] >= curves[a] - 1e-12)
    assert np.array_equal(curves["worst-case"], (255 - np.arange(256)) / 256)
    assert np.all(curves["setting=12"] <= curves["worst-case"] + 1e-12)


def test_optimize_scenario_orders_benefits():
    b = run_scenario({"command": "optimize", "width": 8, "constraint_seed": 4})
    r = b.results
    assert r["bit-level"]["benefit"] >= r["bit-independent"]["benefit"]
    for label in ("bit-level", "bit-independent"):
        assert np.all(np.array(r[label]["induced_tail"]) <= b.curves["constraint"] + 1e-12)


def test_exit_codes(tmp_path):
    assert main(["distortion", "--width", "0"]) == 1
    assert main(["distortion", "--monte-carlo", "10"]) == 1
    assert main(["nonsense"]) == 1
    assert main(["ingest", str(tmp_path / "missing.csv")]) == 1
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"v1_min": 2.0, "v1_max": 2.0, "r_dcp_min": 1e3, "r_dcp_max": 2e3}))
    assert main(["i2c-sweep", "--measurements", str(m)]) == 2
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"width": 2, "tail": [-0.5, -0.5, -0.5, -0.5]}))
    assert main(["optimize", "--width", "2", "--constraint", str(c)]) == 1


def test_infeasible_constraint_exit_code(tmp_path, monkeypatch):
    from vdb_channel import cli

    def never(*args, **kwargs):
        from vdb_channel.optimizer import exhaustive_search_bit_independent
        res = exhaustive_search_bit_independent(*args, **kwargs)
        return type(res)(res.best, res.benefit, res.induced, res.evaluations, False)
    monkeypatch.setattr(cli, "exhaustive_search_bit_independent", never)
    assert main(["optimize", "--width", "3", "--constraint-seed", "1", "--mode", "bit-independent"]) == 2


def test_emit_curves_stable(tmp_path):
    b = Bundle({"command": "demo", "seed": 1}, {"b": np.array([0.1, 1 / 3]), "a": np.array([1.0, 0.0])})
    first = [p.read_bytes() for p in emit_curves(b, tmp_path / "x")]
    second = [p.read_bytes() for p in emit_curves(b, tmp_path / "x.csv")]
    assert first == second
    text = (tmp_path / "x.csv").read_text().splitlines()
    assert text[1] == "m,value,series"
    assert text[3] == "1,0.33333333333333331,b"


def test_run_subcommand(tmp_path):
    sc = tmp_path / "sc.json"
    sc.write_text(json.dumps({"command": "power-sweep", "preset": "bench", "settings": [10, 20],
                              "duty0": [0.5], "f_switch": [2e5]}))
    assert main(["run", str(sc), "--out", str(tmp_path / "pw")]) == 0
    data = rows(tmp_path / "pw.csv")
    assert [r["m"] for r in data] == ["10", "20"]
    sc.write_text("[1, 2]")
    assert main(["run", str(sc)]) == 1


def test_fsm_trace_command(tmp_path):
    out = tmp_path / "t"
    assert main(["fsm-trace", "--registers", "0,1,2,3,4,5,6,7,8", "--words", "1",
                 "--seed", "3", "--out", str(out)]) == 0
    lines = (tmp_path / "t.trace").read_text().splitlines()
    assert [int(line.split()[3]) for line in lines] == [0, 1, 2, 3, 4, 5, 6, 7, 8, 0]
    stim = tmp_path / "stim.txt"
    stim.write_text("".join(f"{i} 1 {int(i == 2)}\n" for i in range(12)))
    assert main(["fsm-trace", "--registers", "9,1,2", "--stimulus", str(stim), "--out", str(out)]) == 0
    sel = [int(line.split()[3]) for line in (tmp_path / "t.trace").read_text().splitlines()]
    assert sel == [9, 9, 1, 2, 9, 9, 9, 9, 9, 9, 9, 9]

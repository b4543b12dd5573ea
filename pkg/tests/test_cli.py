import csv
import json

import numpy as np
import pytest

from intrecover.cli import main
from intrecover.images import read_pgm, write_pgm
from intrecover.sampling import MinimalSpectrum
from intrecover.transform import dft_2d, to_complex128


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    json.loads(lines[0][2:])
    return list(csv.DictReader(lines[1:]))


@pytest.mark.parametrize("shape,rows", [((4, 6), 12), ((30, 30), 140), ((1, 1), 1)])
def test_classes(tmp_path, capsys, shape, rows):
    out = tmp_path / "classes.csv"
    assert main(["classes", *map(str, shape), "--out", str(out)]) == 0
    table = read_csv(out)
    assert len(table) == rows
    assert list(table[0]) == ["rep_k", "rep_l", "D", "orbit_size"]
    assert sum(int(r["orbit_size"]) for r in table) == shape[0] * shape[1]
    assert f"classes: {rows}" in capsys.readouterr().out


def test_classes_bad_arguments():
    assert main(["classes", "0", "3"]) == 2
    assert main(["classes", "x", "3"]) == 2
    assert main(["frobnicate"]) == 2


def test_sample_and_invert(tmp_path, capsys):
    X = np.random.default_rng(3).integers(0, 2, (12, 18))
    write_pgm(tmp_path / "x.pgm", X, 1)
    spec = tmp_path / "x.json"
    assert main(["sample", str(tmp_path / "x.pgm"), "--out", str(spec)]) == 0
    assert "coefficients: 48 of 216" in capsys.readouterr().out
    assert MinimalSpectrum.from_json(spec.read_text()).num_coefficients == 48
    out = tmp_path / "y.pgm"
    assert main(["invert", str(spec), "--out", str(out), "--l", "1"]) == 0
    img, maxval = read_pgm(out)
    assert np.array_equal(img, X) and maxval == 1
    report = json.loads((tmp_path / "y.pgm.report.json").read_text())
    assert report["success"] and report["schema"] == "intrecover.report/1"


def test_invert_tampered_spectrum(tmp_path, capsys):
    X = np.random.default_rng(4).integers(0, 2, (12, 18))
    write_pgm(tmp_path / "x.pgm", X, 1)
    main(["sample", str(tmp_path / "x.pgm"), "--out", str(tmp_path / "x.json")])
    doc = json.loads((tmp_path / "x.json").read_text())
    victim = next(c for c in doc["classes"] if c["rep"] == [1, 1])
    for e in victim["entries"]:
        e["re"] = e["im"] = "0.0"
    (tmp_path / "x.json").write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["invert", str(tmp_path / "x.json"), "--out", str(tmp_path / "y.pgm")]) == 4
    assert "(1, 1)" in capsys.readouterr().err
    report = json.loads((tmp_path / "y.pgm.report.json").read_text())
    assert report["failed_key"] == [1, 1]


def test_io_errors(tmp_path):
    assert main(["sample", str(tmp_path / "missing.pgm")]) == 3
    (tmp_path / "bad.pgm").write_bytes(b"P5 3 3 255\n\x00")
    assert main(["sample", str(tmp_path / "bad.pgm")]) == 3
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["invert", str(tmp_path / "bad.json")]) == 3


def test_witness(tmp_path, capsys):
    prefix = str(tmp_path / "w")
    assert main(["witness", "2", "3", "1", "1", "--out", prefix]) == 0
    X1, _ = read_pgm(prefix + "_1.pgm")
    X2, _ = read_pgm(prefix + "_2.pgm")
    assert X1.tolist() == [[1, 0, 0], [0, 1, 0]] and X2.tolist() == [[0, 1, 0], [1, 0, 0]]
    diff = np.abs(to_complex128(dft_2d(X1)) - to_complex128(dft_2d(X2)))
    assert set(map(tuple, np.argwhere(diff > 1e-9))) == {(1, 1), (1, 2)}
    assert main(["witness", "4", "6", "2", "2", "--out", prefix]) == 0
    signed = np.loadtxt(prefix + "_signed.csv", delimiter=",", dtype=int)
    row = [1, -1, 0, 1, -1, 0]
    assert signed.tolist() == [row, [-v for v in row]] * 2
    assert main(["witness", "3", "3", "0", "0"]) == 2
    assert main(["witness", "3", "3", "3", "0"]) == 2


def param_table(capsys, *args):
    assert main(["params", *args]) == 0
    return {k.strip(): v.strip() for k, v in (line.split(":", 1) for line in capsys.readouterr().out.splitlines())}


def test_params(capsys):
    t = param_table(capsys, "--n", "19", "--m", "1", "--l", "19")
    assert abs(float(t["beta2"]) / 5.69e8 - 1) < 0.05
    t = param_table(capsys, "--n", "30", "--m", "1", "--l", "30")
    assert abs(float(t["K"]) - 6.7082) < 1e-4
    t = param_table(capsys, "--n", "6", "--m", "1", "--l", "1")
    assert float(t["K"]) == 0 and float(t["beta2"]) == 1
    assert main(["params", "--n", "0"]) == 2


def test_bench_suites(tmp_path):
    out = tmp_path / "kmc.csv"
    assert main(["bench", "kmc", "--n", "30", "--ms", "1,2", "--trials", "50", "--seed", "9", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 100
    again = tmp_path / "kmc2.csv"
    main(["bench", "kmc", "--n", "30", "--ms", "1,2", "--trials", "50", "--seed", "9", "--out", str(again)])
    assert out.read_text() == again.read_text().replace("kmc2.csv", "kmc.csv")

    out = tmp_path / "rec.csv"
    assert main(["bench", "recover2d", "--shape", "9x10", "--trials", "2", "--out", str(out)]) == 0
    assert float(read_csv(out)[0]["recovered_pct"]) == 100

    out = tmp_path / "prec.csv"
    assert main(["bench", "precision", "--ns", "30", "--ms", "1", "--trials", "3", "--out", str(out)]) == 0
    assert float(read_csv(out)[0]["recovered_pct"]) == 100

    out = tmp_path / "pct.csv"
    assert main(["bench", "percentile", "--n", "13", "--trials", "4", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [float(r["quantile"]) for r in rows] == [0.5, 0.9, 1.0]
    b = [float(r["beta2"]) for r in rows]
    assert b == sorted(b)

    assert main(["bench", "nope"]) == 2
    assert main(["bench", "recover2d", "--shape", "9by10"]) == 2

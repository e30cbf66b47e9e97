import json

import pytest

from hdcrypt.cli import main
from hdcrypt.experiments import ExperimentSpec


@pytest.fixture()
def artifacts(tmp_path):
    """A tiny trained system built through the CLI itself."""
    xbar = tmp_path / "xbar.json"
    keys = tmp_path / "keys.json"
    model = tmp_path / "model.json"
    assert main(["gen-crossbar", "--rows", "6", "--cols", "96", "--sigma", "0.0",
                 "--seed", "11", "--out", str(xbar)]) == 0
    assert main(["gen-keys", "--key-dim", "6", "--seed", "12", "--out", str(keys)]) == 0
    assert main(["train-text", "--crossbar", str(xbar), "--keys", str(keys),
                 "--train-size", "2500", "--val-size", "600", "--test-size", "800",
                 "--seed", "13", "--out", str(model)]) == 0
    return dict(xbar=xbar, keys=keys, model=model, dir=tmp_path)


def test_round_trip_through_files(artifacts, tmp_path, capsys):
    plain = tmp_path / "plain.txt"
    plain.write_text("Hello, World!", encoding="ascii")
    ct = tmp_path / "msg.hlct"
    out = tmp_path / "out.txt"
    assert main(["encrypt", "--crossbar", str(artifacts["xbar"]),
                 "--keys", str(artifacts["keys"]), "--model", str(artifacts["model"]),
                 "--in", str(plain), "--out", str(ct), "--seed", "1"]) == 0
    assert main(["decrypt", "--model", str(artifacts["model"]),
                 "--in", str(ct), "--out", str(out)]) == 0
    assert out.read_text(encoding="ascii") == "Hello, World!"


def test_round_trip_empty_file(artifacts, tmp_path):
    plain = tmp_path / "empty.txt"
    plain.write_text("", encoding="ascii")
    ct = tmp_path / "empty.hlct"
    out = tmp_path / "empty-out.txt"
    assert main(["encrypt", "--crossbar", str(artifacts["xbar"]),
                 "--keys", str(artifacts["keys"]), "--model", str(artifacts["model"]),
                 "--in", str(plain), "--out", str(ct), "--seed", "2"]) == 0
    assert ct.stat().st_size == 20    # header only
    assert main(["decrypt", "--model", str(artifacts["model"]),
                 "--in", str(ct), "--out", str(out)]) == 0
    assert out.read_text(encoding="ascii") == ""


def test_eval_reports_perfect_accuracy(artifacts, capsys):
    assert main(["eval", "--crossbar", str(artifacts["xbar"]),
                 "--keys", str(artifacts["keys"]), "--model", str(artifacts["model"]),
                 "--n", "500", "--seed", "3"]) == 0
    payload = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert payload["accuracy"] == 1.0


def test_truncated_ciphertext_exits_3(artifacts, tmp_path, capsys):
    plain = tmp_path / "p.txt"
    plain.write_text("abc", encoding="ascii")
    ct = tmp_path / "c.hlct"
    main(["encrypt", "--crossbar", str(artifacts["xbar"]), "--keys",
          str(artifacts["keys"]), "--model", str(artifacts["model"]),
          "--in", str(plain), "--out", str(ct), "--seed", "4"])
    ct.write_bytes(ct.read_bytes()[:-2])
    out = tmp_path / "o.txt"
    assert main(["decrypt", "--model", str(artifacts["model"]),
                 "--in", str(ct), "--out", str(out)]) == 3
    assert "data error" in capsys.readouterr().err


def test_out_of_charset_plaintext_exits_3(artifacts, tmp_path):
    plain = tmp_path / "bad.txt"
    plain.write_text("tab\там", encoding="utf-8")
    ct = tmp_path / "bad.hlct"
    code = main(["encrypt", "--crossbar", str(artifacts["xbar"]),
                 "--keys", str(artifacts["keys"]), "--model", str(artifacts["model"]),
                 "--in", str(plain), "--out", str(ct), "--seed", "5"])
    assert code == 3


def test_invalid_crossbar_config_exits_2(tmp_path, capsys):
    code = main(["gen-crossbar", "--rows", "4", "--cols", "8",
                 "--r-lrs", "1e6", "--r-hrs", "1e3",
                 "--out", str(tmp_path / "x.json")])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_file_exits_3(tmp_path):
    code = main(["decrypt", "--model", str(tmp_path / "nope.json"),
                 "--in", str(tmp_path / "nope.hlct"),
                 "--out", str(tmp_path / "o.txt")])
    assert code == 3


def test_grid_cli_writes_reports(tmp_path, capsys):
    spec = ExperimentSpec(key_dim=4, multipliers=(8,), sigmas=(0.0,),
                          train_size=600, val_size=200, test_size=300,
                          max_epochs=12, master_seed=5)
    spec_path = tmp_path / "spec.json"
    spec.save(spec_path)
    out_dir = tmp_path / "results"
    assert main(["grid", "--config", str(spec_path), "--out", str(out_dir)]) == 0
    csv_text = (out_dir / "grid.csv").read_text()
    assert csv_text.startswith("task,cell,")
    assert len(csv_text.splitlines()) == 2
    assert (out_dir / "grid.json").exists()


def test_report_reemit_matches(tmp_path):
    spec = ExperimentSpec(key_dim=4, multipliers=(8,), sigmas=(0.0,),
                          train_size=600, val_size=200, test_size=300,
                          max_epochs=12, master_seed=5)
    spec_path = tmp_path / "spec.json"
    spec.save(spec_path)
    first = tmp_path / "a"
    assert main(["grid", "--config", str(spec_path), "--out", str(first)]) == 0
    second = tmp_path / "b"
    assert main(["report", "--in", str(first / "grid.json"),
                 "--stem", "grid", "--out", str(second)]) == 0
    assert (second / "grid.csv").read_bytes() == (first / "grid.csv").read_bytes()


def test_image_demo_writes_stats(tmp_path):
    out_dir = tmp_path / "demo"
    assert main(["image-demo", "--size", "48", "--multiplier", "4",
                 "--noise-sigma", "1.0", "--seed", "6", "--out", str(out_dir)]) == 0
    lines = (out_dir / "adjacency.csv").read_text().splitlines()
    assert lines[0] == "stage,direction,correlation,c00,c01,c10,c11"
    assert len(lines) == 10    # 3 stages x 3 directions
    ciphertext_rows = [l for l in lines if l.startswith("ciphertext,")]
    for row in ciphertext_rows:
        assert abs(float(row.split(",")[2])) < 0.2
    assert (out_dir / "ciphertext.pgm").exists()
    assert (out_dir / "original.pgm").exists()

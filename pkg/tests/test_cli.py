"""Command-line interface tests: the synth/ingest/segment path, report
artifacts, config files, and exit codes."""

import json
import os

import numpy as np
import pytest
from PIL import Image

from teluguocr import synth
from teluguocr.cli import main
from teluguocr.taxonomy import CompositeLabel


def _write_page(path, taxonomy):
    page = synth.render_page(
        [[[CompositeLabel(0, 0), CompositeLabel(1, 0)]]], taxonomy
    )
    Image.fromarray(page).save(path)
    return page


def test_synth_writes_demo_sheet(tmp_path):
    out = tmp_path / "demo"
    assert main(["synth", "--out", str(out), "--mods-per-main", "2", "--seed", "3"]) == 0
    assert (out / "sheet.png").exists()
    assert (out / "taxonomy.json").exists()
    rows = json.loads((out / "labels.json").read_text())
    assert len(rows) == 52
    assert all(len(r) == 2 for r in rows)


def test_segment_debug_dump(tmp_path, taxonomy, capsys):
    img = tmp_path / "page.png"
    _write_page(img, taxonomy)
    dump = tmp_path / "dump"
    assert main(["segment", str(img), "--debug-dir", str(dump)]) == 0
    assert (dump / "segmentation.png").exists()
    assert (dump / "segmentation.json").exists()


def test_ingest_pipeline(tmp_path):
    demo = tmp_path / "demo"
    main(["synth", "--out", str(demo), "--mods-per-main", "1", "--seed", "1"])
    out = tmp_path / "ingested"
    code = main([
        "ingest", str(demo / "sheet.png"), str(demo / "labels.json"),
        "--taxonomy", str(demo / "taxonomy.json"), "--out", str(out), "--seed", "2",
    ])
    assert code == 0
    manifest = (out / "manifest.jsonl").read_text().strip().splitlines()
    assert json.loads(manifest[0]).get("_header") is not None
    assert len(manifest) == 53  # header + 52 samples


def test_missing_bundle_exits_1(tmp_path, taxonomy, capsys):
    img = tmp_path / "page.png"
    _write_page(img, taxonomy)
    code = main(["ocr", str(img), "--bundle", str(tmp_path / "nope.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exits_1():
    assert main(["ocr"]) == 1  # missing required arguments


def test_config_file_sets_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("mods-per-main=2\n")
    out = tmp_path / "demo"
    assert main(["--config", str(cfg), "synth", "--out", str(out)]) == 0
    rows = json.loads((out / "labels.json").read_text())
    assert all(len(r) == 2 for r in rows)


def test_version_flag(capsys):
    import teluguocr

    assert main(["--version"]) == 0
    assert teluguocr.__version__ in capsys.readouterr().out

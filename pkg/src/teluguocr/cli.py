"""Command-line interface.

Verbs: ocr, augment, ingest, train, eval, segment, serve, synth.
Exit codes: 0 success, 1 input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback

import numpy as np

from . import __version__, dataset, imgcore, report, segment, synth
from .duoclf import DualModel, evaluate_dual, load_bundle, save_bundle
from .errors import OcrError, ParameterError
from .nn import Network, TrainConfig, evaluate, load_model, parse_arch, save_model, train
from .pipeline import PipelineConfig, ocr_page, parse_config_file, render_html
from .taxonomy import CompositeLabel, Taxonomy, default_taxonomy


def _coerce(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    return value


def _load_labels(path) -> list[list[CompositeLabel]]:
    with open(path, encoding="utf-8") as fh:
        rows = json.load(fh)
    return [[CompositeLabel(int(m), int(v)) for m, v in row] for row in rows]


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(deskew=not getattr(args, "no_deskew", False))


def cmd_ocr(args) -> int:
    image = imgcore.read_image(args.image)
    model = load_bundle(args.bundle)
    result = ocr_page(image, model, _pipeline_config(args))
    if args.format == "txt":
        out = result.plain_text
    elif args.format == "json":
        out = json.dumps(result.to_dict(), ensure_ascii=False, indent=2)
    else:
        out = render_html(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        print(out)
    return 0


def cmd_segment(args) -> int:
    image = imgcore.read_image(args.image)
    if image.ndim == 3:
        image = imgcore.to_grayscale(image)
    rep = segment.dump_debug(image, args.debug_dir)
    n_words = len(rep["words"])
    n_glyphs = sum(len(w["glyphs"]) for w in rep["words"])
    print(f"{n_words} words, {n_glyphs} glyphs -> {args.debug_dir}")
    return 0


def cmd_ingest(args) -> int:
    sheet = imgcore.read_image(args.sheet)
    if sheet.ndim == 3:
        sheet = imgcore.to_grayscale(sheet)
    labels = _load_labels(args.labels)
    samples = dataset.ingest_glyph_sheet(sheet, labels, strict=not args.skip_bad_rows)
    records = dataset.save_samples(samples, os.path.join(args.out, "samples"))
    manifest = dataset.split_dataset(records, seed=args.seed, taxonomy_path=args.taxonomy)
    dataset.write_manifest(manifest, os.path.join(args.out, "manifest.jsonl"))
    print(f"ingested {len(samples)} samples -> {args.out}")
    return 0


def cmd_augment(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    plan = dataset.AugmentPlan()
    out_samples = []
    for i, rec in enumerate(manifest.records):
        img = imgcore.read_image(rec.path)
        sample = dataset.GlyphSample(
            patch=(img > 127).astype(np.uint8), label=rec.label, provenance=rec.provenance
        )
        out_samples.extend(dataset.augment(sample, plan, seed=args.seed * 1_000_003 + i))
    records = dataset.save_samples(out_samples, os.path.join(args.out, "samples"))
    out_manifest = dataset.split_dataset(
        records, seed=args.seed, taxonomy_path=manifest.taxonomy_path
    )
    dataset.write_manifest(out_manifest, os.path.join(args.out, "manifest.jsonl"))
    print(f"augmented {len(manifest.records)} -> {len(out_samples)} samples in {args.out}")
    return 0


def cmd_train(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    train_x, train_y = dataset.load_arrays(manifest, "train", args.target)
    val_x, val_y = dataset.load_arrays(manifest, "val", args.target)
    classes = args.classes or int(max(train_y.max(), val_y.max())) + 1
    spec = parse_arch(args.arch, classes, name=f"{args.arch}/{args.target}")
    net = Network(spec, seed=args.seed)
    config = TrainConfig(
        batch_size=args.batch_size,
        optimizer=args.optimizer,
        lr=args.lr,
        max_epochs=args.epochs,
        patience=args.patience,
        seed=args.seed,
    )
    _, history = train(
        net, train_x, train_y, val_x, val_y, config,
        log=lambda e: print(
            f"epoch {e['epoch']:3d}  loss {e['train_loss']:.4f}  val {e['val_accuracy']:.4f}"
        ),
    )
    save_model(net, args.out)
    if args.report_dir:
        csv_path, fig_path = report.write_history_report(history, args.report_dir)
        print(f"report: {csv_path}, {fig_path}")
    best = max(h["val_accuracy"] for h in history)
    print(f"saved {args.out}; best val accuracy {best:.4f}")
    return 0


def cmd_eval(args) -> int:
    manifest = dataset.read_manifest(args.manifest)
    model = load_bundle(args.bundle)
    recs = manifest.subset(args.split)
    if not recs:
        raise ParameterError(f"manifest has no '{args.split}' records")
    x = np.zeros((len(recs), 1, 32, 32), dtype=np.float32)
    labels = []
    for i, rec in enumerate(recs):
        img = imgcore.read_image(rec.path)
        x[i, 0] = (img > 127).astype(np.float32)
        labels.append(rec.label)
    main_acc, mod_acc, joint_acc = evaluate_dual(model, x, labels)
    print(f"main {main_acc:.4f}  modifier {mod_acc:.4f}  joint {joint_acc:.4f}")
    if args.report_dir:
        preds = model.classify_batch(x)
        per_class = {"main": {}, "modifier": {}}
        tallies = {"main": {}, "modifier": {}}
        for pred, truth in zip(preds, labels):
            for target, got, want in (
                ("main", pred.label.main_id, truth.main_id),
                ("modifier", pred.label.modifier_id, truth.modifier_id),
            ):
                ok, n = tallies[target].get(want, (0, 0))
                tallies[target][want] = (ok + (got == want), n + 1)
        for target, tally in tallies.items():
            per_class[target] = {cid: ok / n for cid, (ok, n) in tally.items()}
        csv_path, fig_path = report.write_eval_report(
            per_class,
            {"main": main_acc, "modifier": mod_acc, "joint": joint_acc},
            args.report_dir,
        )
        print(f"report: {csv_path}, {fig_path}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    host, _, port = args.addr.rpartition(":")
    model = load_bundle(args.bundle)
    print(f"serving on {host or '0.0.0.0'}:{port}")
    serve(host or "0.0.0.0", int(port), model, _pipeline_config(args))
    return 0


def cmd_synth(args) -> int:
    """Generate a demo glyph sheet + labels + taxonomy for smoke testing."""
    taxonomy = default_taxonomy()
    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    rows = []
    for main_id in range(taxonomy.n_main):
        mods = rng.choice(taxonomy.n_modifier, size=args.mods_per_main, replace=False)
        rows.append([CompositeLabel(main_id, int(m)) for m in mods])
    sheet = synth.render_sheet(rows, taxonomy)
    imgcore.write_image(os.path.join(args.out, "sheet.png"), sheet)
    with open(os.path.join(args.out, "labels.json"), "w", encoding="utf-8") as fh:
        json.dump([[[lb.main_id, lb.modifier_id] for lb in row] for row in rows], fh)
    taxonomy.save(os.path.join(args.out, "taxonomy.json"))
    print(f"wrote sheet.png, labels.json, taxonomy.json -> {args.out}")
    return 0


def build_parser(config_defaults: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teluguocr", description=__doc__)
    parser.add_argument("--config", help="optional key=value config file")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def apply_cfg(sp):
        known = {a.dest for a in sp._actions}
        sp.set_defaults(
            **{
                k.replace("-", "_"): _coerce(v)
                for k, v in config_defaults.items()
                if k.replace("-", "_") in known
            }
        )

    sp = sub.add_parser("ocr", help="recognize a page image")
    sp.add_argument("image")
    sp.add_argument("--format", choices=("html", "txt", "json"), default="html")
    sp.add_argument("--bundle", required=True, help="bundle.json path")
    sp.add_argument("--no-deskew", action="store_true")
    sp.add_argument("--out", help="write output to a file instead of stdout")
    sp.set_defaults(func=cmd_ocr)
    apply_cfg(sp)

    sp = sub.add_parser("segment", help="debug-dump segmentation of a page")
    sp.add_argument("image")
    sp.add_argument("--debug-dir", required=True)
    sp.set_defaults(func=cmd_segment)
    apply_cfg(sp)

    sp = sub.add_parser("ingest", help="harvest samples from a glyph sheet")
    sp.add_argument("sheet")
    sp.add_argument("labels", help="JSON rows of [main_id, modifier_id] pairs")
    sp.add_argument("--out", default="dataset")
    sp.add_argument("--taxonomy")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--skip-bad-rows", action="store_true")
    sp.set_defaults(func=cmd_ingest)
    apply_cfg(sp)

    sp = sub.add_parser("augment", help="expand a manifest with augmentations")
    sp.add_argument("manifest")
    sp.add_argument("out")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_augment)
    apply_cfg(sp)

    sp = sub.add_parser("train", help="train one classifier network")
    sp.add_argument("manifest")
    sp.add_argument("--arch", required=True, help='e.g. "CRP25-CRP20-DD256"')
    sp.add_argument("--target", choices=("main", "modifier"), required=True)
    sp.add_argument("--classes", type=int)
    sp.add_argument("--out", default="model.tocr")
    sp.add_argument("--optimizer", choices=("adam", "sgd_momentum"), default="adam")
    sp.add_argument("--lr", type=float)
    sp.add_argument("--batch-size", type=int, default=500)
    sp.add_argument("--epochs", type=int, default=100)
    sp.add_argument("--patience", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--report-dir")
    sp.set_defaults(func=cmd_train)
    apply_cfg(sp)

    sp = sub.add_parser("eval", help="evaluate a bundle on a manifest split")
    sp.add_argument("manifest")
    sp.add_argument("--bundle", required=True)
    sp.add_argument("--split", default="test")
    sp.add_argument("--report-dir")
    sp.set_defaults(func=cmd_eval)
    apply_cfg(sp)

    sp = sub.add_parser("serve", help="run the HTTP OCR service")
    sp.add_argument("--addr", default="0.0.0.0:8080")
    sp.add_argument("--bundle", required=True)
    sp.add_argument("--no-deskew", action="store_true")
    sp.set_defaults(func=cmd_serve)
    apply_cfg(sp)

    sp = sub.add_parser("synth", help="generate a synthetic demo glyph sheet")
    sp.add_argument("--out", default="synth")
    sp.add_argument("--mods-per-main", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_synth)
    apply_cfg(sp)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        cfg = parse_config_file(known.config) if known.config else {}
        parser = build_parser(cfg)
        args = parser.parse_args(argv)
        return args.func(args)
    except (OcrError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except SystemExit as exc:
        # argparse usage failures are input errors
        return 0 if not exc.code else 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())

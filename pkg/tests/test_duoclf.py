"""Dual-classifier tests with stub networks and bundle round trips."""

from types import SimpleNamespace

import numpy as np
import pytest

from teluguocr import duoclf
from teluguocr.duoclf import (
    DualModel,
    classify_glyph,
    compose_unicode,
    evaluate_dual,
    load_bundle,
    save_bundle,
)
from teluguocr.errors import ConfigError
from teluguocr.nn import Network, parse_arch
from teluguocr.taxonomy import CompositeLabel


class StubNet:
    """Network-shaped stub emitting a fixed one-hot distribution."""

    def __init__(self, num_classes, answer):
        self.spec = SimpleNamespace(num_classes=num_classes)
        self.answer = answer

    def forward(self, x, train=False):
        out = np.zeros((len(x), self.spec.num_classes))
        out[:, self.answer] = 1.0
        return out


def _stub_model(taxonomy, main=7, mod=0):
    return DualModel(
        StubNet(taxonomy.n_main, main), StubNet(taxonomy.n_modifier, mod), taxonomy
    )


def test_mismatched_class_counts_rejected(taxonomy):
    with pytest.raises(ConfigError):
        DualModel(StubNet(10, 0), StubNet(taxonomy.n_modifier, 0), taxonomy)
    with pytest.raises(ConfigError):
        DualModel(StubNet(taxonomy.n_main, 0), StubNet(5, 0), taxonomy)


def test_one_hot_stub_prediction(taxonomy):
    model = _stub_model(taxonomy, main=7, mod=0)
    pred = classify_glyph(model, np.zeros((32, 32), dtype=np.uint8))
    assert pred.label == CompositeLabel(7, 0)
    assert pred.main_confidence == 1.0
    assert pred.modifier_confidence == 1.0


def test_duplicate_patch_identical_predictions(taxonomy):
    main = Network(parse_arch("D8", num_classes=taxonomy.n_main), seed=1)
    mod = Network(parse_arch("D8", num_classes=taxonomy.n_modifier), seed=2)
    model = DualModel(main, mod, taxonomy)
    patch = np.random.default_rng(0).random((1, 32, 32)).astype(np.float32)
    batch = np.stack([patch, patch])
    a, b = model.classify_batch(batch)
    assert a == b


def test_compose_unicode_delegates(taxonomy):
    ka = next(m for m in taxonomy.mains if m.name == "ka")
    assert compose_unicode(CompositeLabel(ka.id, 0), taxonomy) == "క"


def test_evaluate_dual_perfect(taxonomy):
    model = _stub_model(taxonomy, main=3, mod=4)
    patches = np.zeros((5, 1, 32, 32), dtype=np.float32)
    labels = [CompositeLabel(3, 4)] * 5
    assert evaluate_dual(model, patches, labels) == (1.0, 1.0, 1.0)


def test_evaluate_dual_main_only(taxonomy):
    model = _stub_model(taxonomy, main=3, mod=4)
    patches = np.zeros((4, 1, 32, 32), dtype=np.float32)
    labels = [CompositeLabel(3, 9)] * 4
    assert evaluate_dual(model, patches, labels) == (1.0, 0.0, 0.0)


def test_evaluate_dual_joint_bounded(taxonomy):
    rng = np.random.default_rng(5)
    main = Network(parse_arch("D8", num_classes=taxonomy.n_main), seed=3)
    mod = Network(parse_arch("D8", num_classes=taxonomy.n_modifier), seed=4)
    model = DualModel(main, mod, taxonomy)
    patches = rng.random((20, 1, 32, 32)).astype(np.float32)
    labels = [
        CompositeLabel(int(m), int(v))
        for m, v in zip(
            rng.integers(0, taxonomy.n_main, 20), rng.integers(0, taxonomy.n_modifier, 20)
        )
    ]
    main_acc, mod_acc, joint = evaluate_dual(model, patches, labels)
    assert joint <= min(main_acc, mod_acc)


def test_bundle_round_trip(tmp_path, taxonomy):
    main = Network(parse_arch("CRP4-D16", num_classes=taxonomy.n_main), seed=6)
    mod = Network(parse_arch("CRP4-D16", num_classes=taxonomy.n_modifier), seed=7)
    model = DualModel(main, mod, taxonomy)
    manifest = save_bundle(tmp_path, model)
    again = load_bundle(manifest)
    x = np.random.default_rng(8).random((3, 1, 32, 32)).astype(np.float32)
    assert again.classify_batch(x) == model.classify_batch(x)


def test_load_bundle_missing_manifest(tmp_path):
    with pytest.raises(ConfigError):
        load_bundle(tmp_path / "nope.json")

"""Dual-network glyph classifier.

Two independent CNNs see the same 32x32 patch: one predicts the main
character, the other the vattu/gunintham modifier.  Their argmaxes form a
CompositeLabel, which the taxonomy composes into Unicode text.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .nn import Network, load_model
from .taxonomy import CompositeLabel, Taxonomy


@dataclass(frozen=True)
class GlyphPrediction:
    label: CompositeLabel
    main_confidence: float
    modifier_confidence: float


class DualModel:
    def __init__(self, main_net: Network, modifier_net: Network, taxonomy: Taxonomy):
        if main_net.spec.num_classes != taxonomy.n_main:
            raise ConfigError(
                f"main network has {main_net.spec.num_classes} classes, "
                f"taxonomy has {taxonomy.n_main}"
            )
        if modifier_net.spec.num_classes != taxonomy.n_modifier:
            raise ConfigError(
                f"modifier network has {modifier_net.spec.num_classes} classes, "
                f"taxonomy has {taxonomy.n_modifier}"
            )
        self.main_net = main_net
        self.modifier_net = modifier_net
        self.taxonomy = taxonomy

    def classify_batch(self, patches: np.ndarray) -> list[GlyphPrediction]:
        """Eval-mode predictions for a (B, 1, 32, 32) batch of patches."""
        main_p = self.main_net.forward(patches, train=False)
        mod_p = self.modifier_net.forward(patches, train=False)
        out = []
        for i in range(len(patches)):
            mi = int(main_p[i].argmax())  # argmax takes the lowest id on ties
            vi = int(mod_p[i].argmax())
            out.append(
                GlyphPrediction(
                    label=CompositeLabel(mi, vi),
                    main_confidence=float(main_p[i, mi]),
                    modifier_confidence=float(mod_p[i, vi]),
                )
            )
        return out


def classify_glyph(model: DualModel, patch: np.ndarray) -> GlyphPrediction:
    """Classify one 32x32 binary/float patch."""
    batch = patch.astype(np.float32).reshape(1, 1, *patch.shape)
    return model.classify_batch(batch)[0]


def compose_unicode(label: CompositeLabel, taxonomy: Taxonomy) -> str:
    return taxonomy.compose(label)


def evaluate_dual(
    model: DualModel, patches: np.ndarray, labels: list[CompositeLabel]
) -> tuple[float, float, float]:
    """(main accuracy, modifier accuracy, joint both-correct accuracy)."""
    preds = model.classify_batch(patches.astype(np.float32))
    main_ok = mod_ok = joint_ok = 0
    for pred, truth in zip(preds, labels):
        m = pred.label.main_id == truth.main_id
        v = pred.label.modifier_id == truth.modifier_id
        main_ok += m
        mod_ok += v
        joint_ok += m and v
    n = len(labels)
    return main_ok / n, mod_ok / n, joint_ok / n


def save_bundle(path_dir, model: DualModel) -> str:
    """Write main/modifier model files, taxonomy JSON, and the bundle
    manifest tying them together; returns the manifest path."""
    from .nn import save_model

    os.makedirs(path_dir, exist_ok=True)
    main_path = os.path.join(path_dir, "main.tocr")
    mod_path = os.path.join(path_dir, "modifier.tocr")
    tax_path = os.path.join(path_dir, "taxonomy.json")
    save_model(model.main_net, main_path)
    save_model(model.modifier_net, mod_path)
    model.taxonomy.save(tax_path)
    manifest = {
        "main_model": "main.tocr",
        "modifier_model": "modifier.tocr",
        "taxonomy": "taxonomy.json",
    }
    manifest_path = os.path.join(path_dir, "bundle.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest_path


def load_bundle(manifest_path) -> DualModel:
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read bundle manifest: {exc}") from exc
    base = os.path.dirname(os.path.abspath(manifest_path))
    main_net = load_model(os.path.join(base, manifest["main_model"]))
    modifier_net = load_model(os.path.join(base, manifest["modifier_model"]))
    taxonomy = Taxonomy.load(os.path.join(base, manifest["taxonomy"]))
    return DualModel(main_net, modifier_net, taxonomy)

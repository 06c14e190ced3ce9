"""Shared fixtures and synthetic-page helpers for the test suite."""

import numpy as np
import pytest

from teluguocr import synth
from teluguocr.taxonomy import CompositeLabel, default_taxonomy


@pytest.fixture(scope="session")
def taxonomy():
    return default_taxonomy()


def text_page(taxonomy, seed=0, n_lines=4, skew=0.0):
    """Multi-line synthetic page with plain (no-modifier) glyphs."""
    rng = np.random.default_rng(seed)
    lines = []
    for _ in range(n_lines):
        words = []
        for _ in range(2):
            ids = rng.integers(0, taxonomy.n_main, size=rng.integers(2, 5))
            words.append([CompositeLabel(int(i), 0) for i in ids])
        lines.append(words)
    return synth.render_page(lines, taxonomy, skew=skew)

"""Label taxonomy: main characters, modifiers, and Unicode composition.

The engine is class-count agnostic; the taxonomy is data.  The default
taxonomy covers the 52 Telugu base characters (16 vowels + 36 consonants)
and 21 modifiers (the empty modifier, 15 vowel signs / diacritics, and 5
consonant conjunct signs).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import TaxonomyError

PLACEMENTS = ("none", "right", "above", "below")


@dataclass(frozen=True, order=True)
class CompositeLabel:
    """(main character id, modifier id); modifier 0 means no modifier."""

    main_id: int
    modifier_id: int


@dataclass(frozen=True)
class MainEntry:
    id: int
    name: str
    codepoints: str


@dataclass(frozen=True)
class ModifierEntry:
    id: int
    name: str
    codepoints: str  # combining sequence appended to the main character
    placement: str   # one of PLACEMENTS


class Taxonomy:
    def __init__(self, mains: list[MainEntry], modifiers: list[ModifierEntry]):
        if not modifiers or modifiers[0].codepoints != "":
            raise TaxonomyError("modifier entry 0 must be the empty modifier")
        for i, m in enumerate(mains):
            if m.id != i:
                raise TaxonomyError(f"main ids must be dense, got {m.id} at {i}")
        for i, m in enumerate(modifiers):
            if m.id != i:
                raise TaxonomyError(f"modifier ids must be dense, got {m.id} at {i}")
            if m.placement not in PLACEMENTS:
                raise TaxonomyError(f"unknown placement {m.placement!r}")
        self.mains = mains
        self.modifiers = modifiers

    @property
    def n_main(self) -> int:
        return len(self.mains)

    @property
    def n_modifier(self) -> int:
        return len(self.modifiers)

    def main(self, main_id: int) -> MainEntry:
        if not 0 <= main_id < self.n_main:
            raise TaxonomyError(f"unknown main id {main_id}")
        return self.mains[main_id]

    def modifier(self, modifier_id: int) -> ModifierEntry:
        if not 0 <= modifier_id < self.n_modifier:
            raise TaxonomyError(f"unknown modifier id {modifier_id}")
        return self.modifiers[modifier_id]

    def compose(self, label: CompositeLabel) -> str:
        """Unicode text for a composite label; empty modifier is identity."""
        return self.main(label.main_id).codepoints + self.modifier(label.modifier_id).codepoints

    def to_dict(self) -> dict:
        return {
            "mains": [
                {"id": m.id, "name": m.name, "codepoints": m.codepoints} for m in self.mains
            ],
            "modifiers": [
                {
                    "id": m.id,
                    "name": m.name,
                    "codepoints": m.codepoints,
                    "placement": m.placement,
                }
                for m in self.modifiers
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Taxonomy":
        mains = [MainEntry(e["id"], e["name"], e["codepoints"]) for e in d["mains"]]
        modifiers = [
            ModifierEntry(e["id"], e["name"], e["codepoints"], e["placement"])
            for e in d["modifiers"]
        ]
        return cls(mains, modifiers)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)

    @classmethod
    def load(cls, path) -> "Taxonomy":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


_VOWELS = [
    ("a", "అ"), ("aa", "ఆ"), ("i", "ఇ"), ("ii", "ఈ"),
    ("u", "ఉ"), ("uu", "ఊ"), ("ru", "ఋ"), ("ruu", "ౠ"),
    ("lu", "ఌ"), ("luu", "ౡ"), ("e", "ఎ"), ("ee", "ఏ"),
    ("ai", "ఐ"), ("o", "ఒ"), ("oo", "ఓ"), ("au", "ఔ"),
]

_CONSONANTS = [
    ("ka", "క"), ("kha", "ఖ"), ("ga", "గ"), ("gha", "ఘ"), ("nga", "ఙ"),
    ("ca", "చ"), ("cha", "ఛ"), ("ja", "జ"), ("jha", "ఝ"), ("nya", "ఞ"),
    ("tta", "ట"), ("ttha", "ఠ"), ("dda", "డ"), ("ddha", "ఢ"), ("nna", "ణ"),
    ("ta", "త"), ("tha", "థ"), ("da", "ద"), ("dha", "ధ"), ("na", "న"),
    ("pa", "ప"), ("pha", "ఫ"), ("ba", "బ"), ("bha", "భ"), ("ma", "మ"),
    ("ya", "య"), ("ra", "ర"), ("rra", "ఱ"), ("la", "ల"), ("lla", "ళ"),
    ("va", "వ"), ("sha", "శ"), ("ssa", "ష"), ("sa", "స"), ("ha", "హ"),
    ("ksha", "క్ష"),
]

_MODIFIERS = [
    ("none", "", "none"),
    ("sign-aa", "ా", "right"),
    ("sign-i", "ి", "above"),
    ("sign-ii", "ీ", "above"),
    ("sign-u", "ు", "below"),
    ("sign-uu", "ూ", "below"),
    ("sign-ru", "ృ", "below"),
    ("sign-ruu", "ౄ", "below"),
    ("sign-e", "ె", "above"),
    ("sign-ee", "ే", "above"),
    ("sign-ai", "ై", "above"),
    ("sign-o", "ొ", "right"),
    ("sign-oo", "ో", "right"),
    ("sign-au", "ౌ", "right"),
    ("anusvara", "ం", "right"),
    ("visarga", "ః", "right"),
    ("vattu-ka", "్క", "below"),
    ("vattu-ta", "్త", "below"),
    ("vattu-ra", "్ర", "below"),
    ("vattu-la", "్ల", "below"),
    ("vattu-va", "్వ", "below"),
]


def default_taxonomy() -> Taxonomy:
    """52 mains x 21 modifiers over the Telugu Unicode block."""
    mains = [
        MainEntry(i, name, cps)
        for i, (name, cps) in enumerate(_VOWELS + _CONSONANTS)
    ]
    modifiers = [
        ModifierEntry(i, name, cps, placement)
        for i, (name, cps, placement) in enumerate(_MODIFIERS)
    ]
    return Taxonomy(mains, modifiers)

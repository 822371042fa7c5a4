"""BI-RADS descriptor vocabulary shared by every stage of the pipeline.

Each enumerated descriptor value maps to exactly one canonical report phrase
and back (the mapping is bijective over the enumerated values). Free-text
descriptor values exist only on manually written or doctor-edited report
fields and deliberately have no entry here.
"""

from __future__ import annotations

import enum
from typing import Union


class LexiconError(ValueError):
    """A descriptor value or phrase has no lexicon mapping."""


class Shape(enum.Enum):
    OVAL_ROUND = "oval_round"
    IRREGULAR = "irregular"


class InternalEcho(enum.Enum):
    HOMOGENEOUS = "homogeneous"
    ANECHOIC = "anechoic"


class PosteriorAcoustic(enum.Enum):
    ENHANCEMENT = "enhancement"
    NO_POSTERIOR_FEATURES = "no_posterior_features"


class Boundary(enum.Enum):
    ABRUPT = "abrupt"


class Orientation(enum.Enum):
    PARALLEL = "parallel"


class Margin(enum.Enum):
    CIRCUMSCRIBED = "circumscribed"


Descriptor = Union[Shape, InternalEcho, PosteriorAcoustic, Boundary, Orientation, Margin]

#: Descriptor value -> canonical report phrase.
PHRASES: dict[Descriptor, str] = {
    Shape.OVAL_ROUND: "oval/round",
    Shape.IRREGULAR: "irregular",
    InternalEcho.HOMOGENEOUS: "homogeneous",
    InternalEcho.ANECHOIC: "anechoic",
    PosteriorAcoustic.ENHANCEMENT: "enhancement",
    PosteriorAcoustic.NO_POSTERIOR_FEATURES: "no posterior features",
    Boundary.ABRUPT: "abrupt",
    Orientation.PARALLEL: "parallel",
    Margin.CIRCUMSCRIBED: "circumscribed",
}

_INVERSE: dict[str, Descriptor] = {phrase: value for value, phrase in PHRASES.items()}

# Every phrase must invert to exactly one value.
assert len(_INVERSE) == len(PHRASES)


def descriptor_term(value: Descriptor) -> str:
    """Canonical report phrase for an enumerated descriptor value."""
    try:
        return PHRASES[value]
    except (KeyError, TypeError):
        raise LexiconError(f"no lexicon phrase for {value!r}") from None


def descriptor_value(phrase: str) -> Descriptor:
    """Inverse of :func:`descriptor_term`; raises for out-of-lexicon phrases."""
    try:
        return _INVERSE[phrase]
    except KeyError:
        raise LexiconError(f"no descriptor value for phrase {phrase!r}") from None


def parse_enum(kind: type[enum.Enum], token: str) -> enum.Enum:
    """Look up an enum member by its canonical lowercase token (dataset encoding)."""
    try:
        return kind(token)
    except ValueError:
        raise LexiconError(f"{token!r} is not a valid {kind.__name__} token") from None

"""Finite constellations, product alphabets and complexity-limited modes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Alphabet",
    "VectorAlphabet",
    "TransmissionMode",
    "CONSTELLATION_NAMES",
    "make_constellation",
    "product_alphabet",
    "modes_for_complexity",
    "mode_from_name",
]

CONSTELLATION_NAMES = ("null", "bpsk", "qpsk", "qam8", "qam16")

_ALIASES = {
    "null": "null", "{0}": "null", "none": "null",
    "bpsk": "bpsk",
    "qpsk": "qpsk", "4qam": "qpsk",
    "qam8": "qam8", "8qam": "qam8",
    "qam16": "qam16", "16qam": "qam16",
}

# Gray-coded amplitude levels, indexed by label.
_GRAY_PAM2 = np.array([-1.0, 1.0])
_GRAY_PAM4 = np.array([-3.0, -1.0, 3.0, 1.0])


@dataclass(frozen=True, eq=False)
class Alphabet:
    """Uniformly used finite constellation.

    ``points[label]`` is the symbol carrying Gray label ``label``. All
    alphabets have unit average power except the null alphabet ``{0}``.
    """

    name: str
    points: np.ndarray

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def power(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def is_null(self) -> bool:
        return self.name == "null"

    def __eq__(self, other):
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.name, self.order))

    def __repr__(self):
        return f"Alphabet({self.name!r}, order={self.order})"


def _grid(i_levels, q_levels):
    # label = (i_label << q_bits) | q_label
    pts = np.array([complex(i, q) for i in i_levels for q in q_levels])
    return pts / np.sqrt(np.mean(np.abs(pts) ** 2))


def make_constellation(kind: str) -> Alphabet:
    """Return the unit-power constellation called `kind`.

    Accepted names are ``bpsk``, ``qpsk``, ``qam8``, ``qam16`` and ``null``
    (case-insensitive; ``8qam``/``16qam`` also work). ``qam8`` is the
    rectangular 4x2 grid.
    """
    key = _ALIASES.get(str(kind).strip().lower())
    if key is None:
        raise ValueError(f"unknown constellation {kind!r}; expected one of {CONSTELLATION_NAMES}")
    if key == "null":
        pts = np.zeros(1, dtype=complex)
    elif key == "bpsk":
        pts = _GRAY_PAM2.astype(complex)
    elif key == "qpsk":
        pts = _grid(_GRAY_PAM2, _GRAY_PAM2)
    elif key == "qam8":
        pts = _grid(_GRAY_PAM4, _GRAY_PAM2)
    else:
        pts = _grid(_GRAY_PAM4, _GRAY_PAM4)
    pts.setflags(write=False)
    return Alphabet(key, pts)


@dataclass(frozen=True, eq=False)
class VectorAlphabet:
    """Cartesian product of scalar alphabets, one row per vector."""

    components: tuple
    vectors: np.ndarray = field(repr=False)

    @property
    def dims(self) -> int:
        return len(self.components)

    @property
    def order(self) -> int:
        return self.vectors.shape[0]

    @property
    def powers(self) -> np.ndarray:
        """Per-component average power (0 for null components)."""
        return np.array([a.power for a in self.components], dtype=float)

    def __len__(self):
        return self.order


def product_alphabet(components) -> VectorAlphabet:
    """All combinations of `components` in lexicographic order.

    An empty list gives a single zero-length vector.
    """
    components = tuple(components)
    rows = list(itertools.product(*(a.points for a in components)))
    vectors = np.array(rows, dtype=complex).reshape(len(rows), len(components))
    vectors.setflags(write=False)
    return VectorAlphabet(components, vectors)


@dataclass(frozen=True)
class TransmissionMode:
    """Private alphabet shared by all users plus the common-stream alphabet."""

    private: Alphabet
    common: Alphabet

    @property
    def complexity(self) -> int:
        return self.private.order * self.common.order

    @property
    def name(self) -> str:
        return f"{self.private.name}/{self.common.name}"

    @property
    def is_sdma(self) -> bool:
        return self.common.is_null

    @property
    def is_multicast(self) -> bool:
        return self.private.is_null

    @property
    def rate_cap_bits(self) -> float:
        """Per-user ceiling log2|Xp| + log2|Xc|."""
        return float(np.log2(self.private.order) + np.log2(self.common.order))

    def __str__(self):
        return self.name


def mode_from_name(name: str) -> TransmissionMode:
    """Parse ``"private/common"`` (e.g. ``"qam8/bpsk"``)."""
    try:
        p, c = name.split("/")
    except ValueError:
        raise ValueError(f"mode name must look like 'private/common', got {name!r}") from None
    mode = TransmissionMode(make_constellation(p), make_constellation(c))
    if mode.private.is_null and mode.common.is_null:
        raise ValueError("a mode needs at least one stream carrying data")
    return mode


def modes_for_complexity(delta: int) -> list:
    """Modes whose per-user decoding complexity |Xc||Xp| equals `delta`.

    Ordered by decreasing private-alphabet size, so the first entry is the
    private-only (SDMA) mode and the last the common-only (multicast) mode.
    """
    delta = int(delta)
    if delta < 2 or delta & (delta - 1):
        raise ValueError(f"decoding complexity must be a power of two >= 2, got {delta}")
    if delta > 16:
        raise ValueError(f"no constellation of order {delta} in the catalogue (max 16)")
    catalogue = [make_constellation(n) for n in CONSTELLATION_NAMES]
    modes = [
        TransmissionMode(p, c)
        for p in catalogue
        for c in catalogue
        if p.order * c.order == delta
    ]
    modes.sort(key=lambda m: -m.private.order)
    return modes

"""Core Dempster-Shafer machinery: frames, focal sets, mass functions.

Focal sets are plain ints, interpreted as bit patterns over a frame's
label order (bit i set <=> label i is a member). All belief arithmetic
uses math.fsum so that subset-monotonicity of belief/plausibility holds
exactly in floating point (correctly rounded sums of nonnegative terms).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

MAX_FRAME_SIZE = 16
MASS_SUM_TOL = 1e-9
RENORMALIZE_TOL = 1e-6
TOTAL_CONFLICT_TOL = 1e-12


class DSTError(Exception):
    """Base class for evidential-reasoning errors."""


class FrameMismatch(DSTError):
    """Operands refer to different frames, or a focal set is out of range."""


class TotalConflict(DSTError):
    """Combination conflict K reached 1; the sources fully contradict."""


class EmptyInput(DSTError):
    """An operation requiring at least one mass function got none."""


class InvalidMass(DSTError):
    """Mass values violate the basic-belief-assignment invariants."""


class Frame:
    """An ordered frame of discernment (set of mutually exclusive classes).

    The label order is fixed at construction; focal-set bit patterns and
    all iteration orders derive from it, so results are deterministic.
    """

    __slots__ = ("_labels", "_index")

    def __init__(self, labels: Sequence[str]):
        labels = tuple(labels)
        if not 1 <= len(labels) <= MAX_FRAME_SIZE:
            raise ValueError(
                f"frame must have between 1 and {MAX_FRAME_SIZE} labels, got {len(labels)}"
            )
        if len(set(labels)) != len(labels):
            raise ValueError(f"frame labels must be unique: {labels!r}")
        for lab in labels:
            if not isinstance(lab, str) or not lab:
                raise ValueError(f"frame labels must be non-empty strings: {lab!r}")
        self._labels = labels
        self._index = {lab: i for i, lab in enumerate(labels)}

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def __eq__(self, other) -> bool:
        return isinstance(other, Frame) and self._labels == other._labels

    def __hash__(self) -> int:
        return hash(self._labels)

    def __repr__(self) -> str:
        return f"Frame({list(self._labels)!r})"

    @property
    def full_set(self) -> int:
        """Bit pattern of the whole frame (total ignorance set)."""
        return (1 << len(self._labels)) - 1

    @property
    def n_sets(self) -> int:
        """Size of the power set, empty set included."""
        return 1 << len(self._labels)

    def singleton(self, label: str) -> int:
        try:
            return 1 << self._index[label]
        except KeyError:
            raise FrameMismatch(f"label {label!r} not in frame {self._labels}") from None

    def focal_set(self, members: Iterable[str]) -> int:
        bits = 0
        for lab in members:
            bits |= self.singleton(lab)
        return bits

    def members(self, bits: int) -> tuple[str, ...]:
        self.check_set(bits)
        return tuple(lab for i, lab in enumerate(self._labels) if bits >> i & 1)

    def set_name(self, bits: int) -> str:
        """Stable display name of a focal set.

        Member labels joined in frame order; plain concatenation when every
        frame label is a single character (so {s,m} reads "sm"), otherwise
        '+'-joined. The empty set reads "{}".
        """
        mem = self.members(bits)
        if not mem:
            return "{}"
        sep = "" if all(len(lab) == 1 for lab in self._labels) else "+"
        return sep.join(mem)

    def parse_set(self, name: str) -> int:
        """Inverse of set_name, also accepting any single frame label."""
        if name in self._index:
            return self.singleton(name)
        if name == "{}":
            return 0
        if "+" in name:
            return self.focal_set(name.split("+"))
        if all(len(lab) == 1 for lab in self._labels):
            try:
                return self.focal_set(name)
            except FrameMismatch:
                pass
        raise FrameMismatch(f"cannot parse focal set {name!r} over frame {self._labels}")

    def focal_sets(self, include_empty: bool = False) -> Iterator[int]:
        """All focal sets in ascending bit order."""
        return iter(range(0 if include_empty else 1, self.n_sets))

    def singletons(self) -> Iterator[int]:
        return (1 << i for i in range(len(self._labels)))

    def complement(self, bits: int) -> int:
        self.check_set(bits)
        return self.full_set & ~bits

    def check_set(self, bits: int) -> None:
        if not isinstance(bits, (int, np.integer)) or bits < 0 or bits > self.full_set:
            raise FrameMismatch(f"focal set {bits!r} not valid over frame {self._labels}")


@dataclass(frozen=True)
class BeliefInterval:
    """Lower/upper probability bounds and their gap for one hypothesis."""

    belief: float
    plausibility: float
    uncertainty: float

    @classmethod
    def from_bounds(cls, belief: float, plausibility: float) -> "BeliefInterval":
        belief = min(max(belief, 0.0), 1.0)
        plausibility = min(max(plausibility, belief), 1.0)
        return cls(belief, plausibility, plausibility - belief)


MassLike = Union[Mapping[int, float], Sequence[float], np.ndarray]


class MassFunction:
    """A normalized basic belief assignment over the power set of a frame.

    Immutable. Accepts either a dense array over all 2^n focal sets or a
    {bit-pattern: mass} mapping. Masses must be in [0,1] and sum to 1;
    sums off by at most 1e-6 are renormalized with a warning, anything
    worse is an InvalidMass error. The empty set must carry (near-)zero
    mass.
    """

    __slots__ = ("_frame", "_masses")

    def __init__(self, frame: Frame, masses: MassLike):
        arr = np.zeros(frame.n_sets, dtype=np.float64)
        if isinstance(masses, Mapping):
            for bits, value in masses.items():
                frame.check_set(bits)
                arr[bits] = value
        else:
            values = np.asarray(masses, dtype=np.float64)
            if values.shape != (frame.n_sets,):
                raise InvalidMass(
                    f"expected {frame.n_sets} masses for frame {frame.labels}, got shape {values.shape}"
                )
            arr[:] = values
        if not np.all(np.isfinite(arr)):
            raise InvalidMass("masses must be finite")
        if arr.min() < -TOTAL_CONFLICT_TOL or arr.max() > 1.0 + MASS_SUM_TOL:
            raise InvalidMass(f"masses must lie in [0, 1], got range [{arr.min()}, {arr.max()}]")
        np.clip(arr, 0.0, 1.0, out=arr)
        if arr[0] > RENORMALIZE_TOL:
            raise InvalidMass(f"empty set carries mass {arr[0]}; normalized masses require m(emptyset)=0")
        arr[0] = 0.0
        total = math.fsum(arr)
        if abs(total - 1.0) > MASS_SUM_TOL:
            if abs(total - 1.0) <= RENORMALIZE_TOL:
                warnings.warn(
                    f"mass values sum to {total!r}; renormalizing", stacklevel=2
                )
                arr /= total
            else:
                raise InvalidMass(f"mass values must sum to 1, got {total!r}")
        arr.setflags(write=False)
        self._frame = frame
        self._masses = arr

    @property
    def frame(self) -> Frame:
        return self._frame

    def __getitem__(self, bits: int) -> float:
        self._frame.check_set(bits)
        return float(self._masses[bits])

    @property
    def values(self) -> np.ndarray:
        """Read-only dense mass array indexed by focal-set bit pattern."""
        return self._masses

    def items(self) -> Iterator[tuple[int, float]]:
        """(focal set, mass) pairs over non-empty sets, ascending bit order."""
        for bits in self._frame.focal_sets():
            yield bits, float(self._masses[bits])

    def to_dict(self) -> dict[str, float]:
        """Named masses over non-empty sets, in ascending bit order."""
        return {self._frame.set_name(b): v for b, v in self.items()}

    def belief(self, focal: int) -> float:
        """Total mass committed to subsets of the hypothesis."""
        self._frame.check_set(focal)
        m = self._masses
        return min(
            math.fsum(m[b] for b in range(1, self._frame.n_sets) if b & focal == b), 1.0
        )

    def plausibility(self, focal: int) -> float:
        """Total mass not contradicting the hypothesis."""
        self._frame.check_set(focal)
        m = self._masses
        return min(
            math.fsum(m[b] for b in range(1, self._frame.n_sets) if b & focal), 1.0
        )

    def interval(self, focal: int) -> BeliefInterval:
        return BeliefInterval.from_bounds(self.belief(focal), self.plausibility(focal))

    def allclose(self, other: "MassFunction", tol: float = MASS_SUM_TOL) -> bool:
        return self._frame == other._frame and bool(
            np.all(np.abs(self._masses - other._masses) <= tol)
        )

    def __repr__(self) -> str:
        body = ", ".join(f"{name}: {v:.6g}" for name, v in self.to_dict().items())
        return f"MassFunction({{{body}}})"


def vacuous(frame: Frame) -> MassFunction:
    """Total ignorance: all mass on the full frame."""
    arr = np.zeros(frame.n_sets)
    arr[frame.full_set] = 1.0
    return MassFunction(frame, arr)


def combine_details(m1: MassFunction, m2: MassFunction) -> tuple[MassFunction, float]:
    """Dempster's rule of combination, also returning the conflict K."""
    if m1.frame != m2.frame:
        raise FrameMismatch(f"cannot combine masses over {m1.frame} and {m2.frame}")
    frame = m1.frame
    out = np.zeros(frame.n_sets)
    conflict = 0.0
    idx1 = np.nonzero(m1.values)[0]
    idx2 = np.nonzero(m2.values)[0]
    for b1 in idx1:
        v1 = m1.values[b1]
        for b2 in idx2:
            product = v1 * m2.values[b2]
            inter = int(b1) & int(b2)
            if inter:
                out[inter] += product
            else:
                conflict += product
    if conflict >= 1.0 - TOTAL_CONFLICT_TOL:
        raise TotalConflict(f"sources fully contradict (K={conflict!r})")
    out /= 1.0 - conflict
    out[0] = 0.0
    return MassFunction(frame, out), conflict


def combine(m1: MassFunction, m2: MassFunction) -> MassFunction:
    """Dempster's rule of combination."""
    return combine_details(m1, m2)[0]


def combine_sequence(masses: Sequence[MassFunction]) -> MassFunction:
    """Left fold of Dempster's rule over an ordered list of masses."""
    masses = list(masses)
    if not masses:
        raise EmptyInput("combine_sequence requires at least one mass function")
    return reduce(combine, masses)

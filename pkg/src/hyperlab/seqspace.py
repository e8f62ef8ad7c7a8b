"""Finitely supported models of l^p(N) and l^p(Z).

A :class:`WindowVector` stores the coefficients on an explicit index window;
everything outside the window is zero.  Weak neighbourhoods are modelled by
finitely many coordinate functionals, and weak convergence to zero by the
pair (norm bounded, coordinatewise null), which is only sound for 1 < p < inf.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, ReflexivityError
from .report import Report, Verdict
from .schemas import validate


class Axis(str, enum.Enum):
    NATURAL = "N"
    INTEGERS = "Z"


@dataclass(frozen=True)
class IndexWindow:
    lo: int
    hi: int
    axis: Axis = Axis.INTEGERS

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "lo", int(self.lo))
        object.__setattr__(self, "hi", int(self.hi))
        if self.lo > self.hi:
            raise InputError(f"empty window [{self.lo}, {self.hi}]")
        if self.axis is Axis.NATURAL and self.lo < 1:
            raise InputError(f"window on N must start at index >= 1, got {self.lo}")

    def __len__(self):
        return self.hi - self.lo + 1

    def __contains__(self, j):
        return self.lo <= j <= self.hi

    def indices(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def union(self, other: "IndexWindow") -> "IndexWindow":
        if other.axis is not self.axis:
            raise InputError("cannot combine windows on different axes")
        return IndexWindow(min(self.lo, other.lo), max(self.hi, other.hi), self.axis)

    def shifted(self, by: int) -> "IndexWindow":
        """Translate by ``by``, clamping to index 1 on N."""
        lo, hi = self.lo + by, self.hi + by
        if self.axis is Axis.NATURAL:
            lo, hi = max(lo, 1), max(hi, 1)
        return IndexWindow(lo, hi, self.axis)


@dataclass(frozen=True, eq=False)
class WindowVector:
    window: IndexWindow
    coeffs: np.ndarray
    p: float = 2.0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size != len(self.window):
            raise InputError(f"{c.size} coefficients for a window of length {len(self.window)}")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        if not self.p >= 1:
            raise InputError(f"exponent p must be >= 1, got {self.p}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "p", float(self.p))

    # constructors -------------------------------------------------------

    @classmethod
    def from_mapping(cls, values: dict, p: float = 2.0, axis: Axis = Axis.INTEGERS) -> "WindowVector":
        """Build from ``{index: coefficient}``; the window is the tight hull."""
        if not values:
            raise InputError("empty coefficient mapping")
        keys = sorted(int(k) for k in values)
        window = IndexWindow(keys[0], keys[-1], axis)
        c = np.zeros(len(window), dtype=complex)
        for k, v in values.items():
            c[int(k) - window.lo] = v
        return cls(window, c, p)

    @classmethod
    def basis(cls, j: int, p: float = 2.0, axis: Axis = Axis.INTEGERS, scale: complex = 1.0) -> "WindowVector":
        return cls(IndexWindow(j, j, axis), [scale], p)

    @classmethod
    def zeros(cls, window: IndexWindow, p: float = 2.0) -> "WindowVector":
        return cls(window, np.zeros(len(window), dtype=complex), p)

    # coordinates --------------------------------------------------------

    @property
    def axis(self) -> Axis:
        return self.window.axis

    def coeff(self, j: int) -> complex:
        if j in self.window:
            return complex(self.coeffs[j - self.window.lo])
        return 0j

    def coords(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=int)
        out = np.zeros(idx.shape, dtype=complex)
        inside = (idx >= self.window.lo) & (idx <= self.window.hi)
        out[inside] = self.coeffs[idx[inside] - self.window.lo]
        return out

    def support(self) -> np.ndarray:
        return self.window.indices()[self.coeffs != 0]

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def embed(self, window: IndexWindow) -> "WindowVector":
        """Same vector on a window containing the current one."""
        if window.lo > self.window.lo or window.hi < self.window.hi:
            raise InputError("target window does not contain the vector's window")
        return WindowVector(window, self.coords(window.indices()), self.p)

    # arithmetic ---------------------------------------------------------

    def _combine(self, other: "WindowVector", sign: int) -> "WindowVector":
        if self.p != other.p:
            raise InputError(f"exponent mismatch: {self.p} vs {other.p}")
        w = self.window.union(other.window)
        idx = w.indices()
        return WindowVector(w, self.coords(idx) + sign * other.coords(idx), self.p)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        return WindowVector(self.window, self.coeffs * complex(scalar), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def allclose(self, other: "WindowVector", atol: float = 1e-12) -> bool:
        w = self.window.union(other.window)
        idx = w.indices()
        return bool(np.allclose(self.coords(idx), other.coords(idx), rtol=0, atol=atol))

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "lo": self.window.lo,
            "hi": self.window.hi,
            "axis": self.window.axis.value,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_dict(cls, data: dict, axis: Axis | None = None) -> "WindowVector":
        validate(data, "window_vector")
        ax = Axis(axis if axis is not None else data.get("axis", "Z"))
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        return cls(IndexWindow(data["lo"], data["hi"], ax), coeffs, data["p"])


def norm(x: WindowVector) -> float:
    """l^p norm, scaled by the largest modulus so it neither over- nor underflows."""
    a = np.abs(x.coeffs)
    m = a.max()
    if m == 0.0:
        return 0.0
    if x.p == 2.0:
        return float(m * np.sqrt(np.sum((a / m) ** 2)))
    return float(m * np.sum((a / m) ** x.p) ** (1.0 / x.p))


def in_ball(x: WindowVector, N: float) -> bool:
    """Membership in the closed ball of radius ``N``; no tolerance is applied."""
    if N < 0:
        raise InputError("ball radius must be non-negative")
    return norm(x) <= N


def restrict(x: WindowVector, window: IndexWindow) -> WindowVector:
    """Coordinates of ``x`` on ``window`` (zero where ``x`` is not stored)."""
    return WindowVector(window, x.coords(window.indices()), x.p)


def dropped_mass(x: WindowVector, window: IndexWindow) -> float:
    """l^p norm of the part of ``x`` that :func:`restrict` would discard."""
    outside = x.window.indices()
    mask = (outside < window.lo) | (outside > window.hi)
    if not mask.any():
        return 0.0
    return norm(WindowVector(x.window, np.where(mask, x.coeffs, 0), x.p))


@dataclass(frozen=True, eq=False)
class WeakNeighborhood:
    """Basic weak neighbourhood cut out by coordinate functionals.

    ``x`` belongs to it iff ``|x_j - center_j| < epsilon`` for every listed j.
    """

    center: WindowVector
    functional_indices: tuple
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "functional_indices", tuple(int(j) for j in self.functional_indices))
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.center.axis is Axis.NATURAL and any(j < 1 for j in self.functional_indices):
            raise InputError("functional index below 1 on N")

    def to_dict(self) -> dict:
        return {
            "center": self.center.to_dict(),
            "functional_indices": list(self.functional_indices),
            "epsilon": self.epsilon,
        }


def weak_member(x: WindowVector, W: WeakNeighborhood) -> bool:
    idx = np.array(W.functional_indices, dtype=int)
    if idx.size == 0:
        return True
    diff = x.coords(idx) - W.center.coords(idx)
    return bool(np.all(np.abs(diff) < W.epsilon))


def weak_null_surrogate(
    seq: Sequence[WindowVector],
    coord_tol: float = 1e-9,
    norm_bound: float = 10.0,
    indices: Iterable[int] | None = None,
) -> Report:
    """Bounded-plus-coordinatewise-null test for weak convergence to zero.

    The tracked coordinates default to the window of the first element: a
    fixed finite family of functionals, which is what weak convergence is
    tested against.  ``term`` in the witness is 1-based.
    """
    if len(seq) == 0:
        raise InputError("weak_null_surrogate needs a nonempty sequence")
    if any(x.p == 1.0 for x in seq):
        raise ReflexivityError(
            "l^1 is not reflexive and has the Schur property: bounded + coordinatewise "
            "null does not imply weakly null there; use 1 < p < inf"
        )
    tracked = np.asarray(list(indices) if indices is not None else seq[0].window.indices(), dtype=int)
    norms = np.array([norm(x) for x in seq])
    summary = {"sup_norm": float(norms.max()), "norm_bound": norm_bound, "coord_tol": coord_tol,
               "tracked_indices": tracked.tolist(), "terms": len(seq)}
    over = np.flatnonzero(norms > norm_bound)
    if over.size:
        t = int(over[0])
        return Report("weak_null", Verdict.FAIL,
                      witness={"reason": "norm", "term": t + 1, "norm": float(norms[t])},
                      summary=summary)
    tail = np.abs(seq[-1].coords(tracked))
    bad = np.flatnonzero(tail >= coord_tol)
    if bad.size:
        j = int(tracked[bad[0]])
        return Report("weak_null", Verdict.FAIL,
                      witness={"reason": "coordinate", "term": len(seq), "index": j,
                               "modulus": float(tail[bad[0]])},
                      summary=summary)
    summary["max_tail_coordinate"] = float(tail.max()) if tail.size else 0.0
    return Report("weak_null", Verdict.PASS, summary=summary)

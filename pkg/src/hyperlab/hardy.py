"""Truncated Taylor-coefficient model of H^2 and composition operators.

Orbits ``f o phi_n`` are never formed as series: every orbit quantity is a
point evaluation of ``f`` at ``phi_n(z)``, with ``phi_n`` taken from the
matrix side (exact group law), so nothing accumulates over 10^5 steps.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._parallel import map_chunks
from .errors import ConditioningError, InputError
from .moebius import (MapKind, MoebiusMap, apply, apply_many, classify, iterate_many,
                      parabolic)
from .report import Report, Verdict
from .schemas import validate

RESIDUAL_LIMIT = 1e-6
DEFAULT_DEGREE_CAP = 256


@dataclass(frozen=True, eq=False)
class HardyFunction:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size == 0:
            raise InputError("need at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def identity(cls) -> "HardyFunction":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "HardyFunction":
        return cls([c])

    @property
    def degree_cap(self) -> int:
        return self.coeffs.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, z):
        return eval_at(self, z)

    def _padded(self, other):
        n = max(self.coeffs.size, other.coeffs.size)
        return (np.pad(self.coeffs, (0, n - self.coeffs.size)),
                np.pad(other.coeffs, (0, n - other.coeffs.size)))

    def __add__(self, other):
        a, b = self._padded(other)
        return HardyFunction(a + b)

    def __sub__(self, other):
        a, b = self._padded(other)
        return HardyFunction(a - b)

    def __mul__(self, scalar):
        return HardyFunction(self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict) -> "HardyFunction":
        validate(data, "hardy_function")
        return cls([complex(re, im) for re, im in data["coeffs"]])


def eval_at(f: HardyFunction, z):
    """Horner evaluation of the truncated series; ``|z| >= 1`` is rejected."""
    z_arr = np.asarray(z, dtype=complex)
    if np.any(np.abs(z_arr) >= 1):
        raise InputError("point evaluation needs |z| < 1")
    acc = np.zeros(z_arr.shape, dtype=complex)
    for c in f.coeffs[::-1]:
        acc = acc * z_arr + c
    return complex(acc) if acc.ndim == 0 else acc


@dataclass(frozen=True)
class CompositionOperator:
    symbol: MoebiusMap
    degree_cap: int = DEFAULT_DEGREE_CAP

    def __post_init__(self):
        if not self.symbol.is_self_map():
            raise InputError("composition symbol must map the unit disk into itself")
        if self.degree_cap < 0:
            raise InputError("degree_cap must be non-negative")


def _test_grid(r):
    theta = 2 * np.pi * np.arange(32) / 32
    return np.concatenate([[0j], 0.5 * r * np.exp(1j * theta), r * np.exp(1j * theta)])


def _coefficients_at_radius(op, f, r):
    D = op.degree_cap
    K = 1 << max(6, math.ceil(math.log2(4 * (D + 1))))
    zeta = r * np.exp(2j * np.pi * np.arange(K) / K)
    g = eval_at(f, apply(op.symbol, zeta))
    c = np.fft.fft(g)[: D + 1] / K
    # coefficients at the roundoff floor carry no signal; dividing them by r^m would only amplify noise
    floor = 8 * np.finfo(float).eps * max(np.max(np.abs(g)), 1e-300)
    c[np.abs(c) < floor] = 0
    coeffs = c * np.exp(-np.arange(D + 1) * math.log(r))
    result = HardyFunction(coeffs)
    grid = _test_grid(r)
    residual = float(np.max(np.abs(eval_at(result, grid) - eval_at(f, apply(op.symbol, grid)))))
    return result, residual


def compose(op: CompositionOperator, f: HardyFunction, radius: float = 0.9,
            fallback_radius: float = 0.5) -> HardyFunction:
    """Taylor coefficients of ``f o phi`` up to ``op.degree_cap``.

    Samples ``f o phi`` on the circle of radius ``radius`` and inverts the
    DFT, dividing coefficient ``k`` by ``radius**k``.  If the residual on a
    test grid exceeds 1e-6 the smaller ``fallback_radius`` is tried before
    giving up with :class:`ConditioningError`.
    """
    best = None
    for r in (radius, fallback_radius):
        result, residual = _coefficients_at_radius(op, f, r)
        if residual <= RESIDUAL_LIMIT:
            return result
        best = residual if best is None else min(best, residual)
    raise ConditioningError(
        f"composition residual {best:.2e} exceeds {RESIDUAL_LIMIT:g}; "
        f"try degree_cap > {op.degree_cap}")


def growth_estimate_check(f: HardyFunction, z: complex, w: complex) -> Report:
    """``|f(z) - f(w)| <= 2 ||f|| |z - w| / min(1 - |z|, 1 - |w|)^{3/2}``.

    ``near_tight`` flags pairs where the left side reaches 99% of the
    bound; those are for manual review, not failures.
    """
    z, w = complex(z), complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise InputError("points must lie in the open unit disk")
    lhs = abs(eval_at(f, z) - eval_at(f, w))
    rhs = 2 * f.norm() * abs(z - w) / min(1 - abs(z), 1 - abs(w)) ** 1.5
    holds = lhs <= rhs + 1e-12
    return Report("growth_estimate", Verdict.PASS if holds else Verdict.FAIL,
                  summary={"lhs": lhs, "rhs": rhs, "holds": holds,
                           "near_tight": bool(rhs > 0 and lhs >= 0.99 * rhs), "z": z, "w": w})


def _orbit_points(phi, ns, z):
    return apply_many(iterate_many(phi, ns), z)


def orbit_decay(f: HardyFunction, a: complex, z: complex, n_max: int, threads: int = 1) -> Report:
    """``d_n = |f(phi_n(z)) - f(phi_n(0))|`` along the parabolic orbit with translation ``a``.

    ``fitted_M`` is the empirical ``max d_n sqrt(n)``.  The sequence counts
    as bounded when the later half of the range does not push ``d_n sqrt(n)``
    more than 5% above the earlier half's maximum.
    """
    a, z = complex(a), complex(z)
    if abs(z) >= 1:
        raise InputError("z must lie in the open unit disk")
    if a.real <= 0:
        raise InputError("translation must have positive real part")
    if n_max < 1:
        raise InputError("n_max must be >= 1")
    phi = parabolic(a)

    def chunk(lo, hi):
        ns = np.arange(lo, hi)
        return np.abs(eval_at(f, _orbit_points(phi, ns, z)) - eval_at(f, _orbit_points(phi, ns, 0j)))

    d = np.concatenate(map_chunks(chunk, 1, n_max + 1, threads))
    ns = np.arange(1, n_max + 1)
    scaled = d * np.sqrt(ns)
    half = max(1, n_max // 2)
    first, second = float(scaled[:half].max()), float(scaled[half:].max()) if n_max > 1 else 0.0
    bounded = second <= 1.05 * first
    return Report("orbit_decay", Verdict.PASS if bounded else Verdict.FAIL,
                  witness={"d_1": float(d[0])},
                  summary={"a": a, "z": z, "n_max": n_max, "fitted_M": float(scaled.max()),
                           "max_scaled_first_half": first, "max_scaled_second_half": second,
                           "bounded": bounded},
                  series={"n": ns, "d_n": d, "d_n_sqrt_n": scaled},
                  notes=["M is fitted from the data; no closed-form constant is computed"])


def fixed_point_obstruction(phi: MoebiusMap, f: HardyFunction, N: int, p: complex | None = None,
                            tol: float = 1e-9) -> Report:
    """Orbit values at an interior fixed point ``p`` never leave ``f(p)``.

    For the identity every point is fixed and ``p`` (default 0) must be
    given explicitly; otherwise ``p`` defaults to the classified interior
    fixed point.
    """
    cls = classify(phi)
    if cls.kind is MapKind.IDENTITY:
        p = 0j if p is None else complex(p)
    else:
        fp = cls.interior_fixed_point
        if fp is None:
            raise InputError("symbol has no fixed point in the open disk")
        if p is None:
            p = fp
        elif abs(apply(phi, p) - p) > 1e-9:
            raise InputError(f"{p} is not a fixed point of the symbol")
    if abs(p) >= 1:
        raise InputError("fixed point must lie in the open disk")
    ns = np.arange(1, N + 1)
    values = eval_at(f, apply_many(iterate_many(phi, ns), p))
    base = eval_at(f, p)
    dev = np.abs(values - base)
    max_dev = float(dev.max()) if dev.size else 0.0
    return Report("fixed_point_obstruction", Verdict.PASS if max_dev < tol else Verdict.FAIL,
                  witness={"p": p, "f_p": base},
                  summary={"N": N, "max_deviation": max_dev, "kind": cls.kind.value, "tol": tol},
                  series={"n": ns, "deviation": dev})


def _spread(f, phi, grid, n):
    vals = eval_at(f, apply_many(iterate_many(phi, [n]), grid))
    return max((abs(u - v) for u, v in itertools.combinations(vals, 2)), default=0.0)


def constant_cluster_check(f: HardyFunction, a: complex, grid, n: int) -> Report:
    """Spread of ``f o phi_m`` over ``grid`` at ``m = n/4, n/2, n`` must not grow."""
    grid = np.asarray(list(grid), dtype=complex)
    if grid.size == 0:
        raise InputError("grid must be nonempty")
    if np.any(np.abs(grid) >= 1):
        raise InputError("grid points must lie in the open unit disk")
    if complex(a).real <= 0:
        raise InputError("translation must have positive real part")
    if n < 4:
        raise InputError("n must be at least 4")
    phi = parabolic(a)
    ms = [n // 4, n // 2, n]
    spreads = [float(_spread(f, phi, grid, m)) for m in ms]
    ok = all(later <= earlier + 1e-12 for earlier, later in zip(spreads, spreads[1:]))
    return Report("constant_cluster", Verdict.PASS if ok else Verdict.FAIL,
                  summary={"a": complex(a), "grid_size": int(grid.size), "spreads": spreads},
                  series={"n": ms, "spread": spreads})

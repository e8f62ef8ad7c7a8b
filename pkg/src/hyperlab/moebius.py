"""Linear fractional maps ``z -> (az + b)/(cz + d)`` as normalized SL(2, C) matrices."""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np

from .errors import InputError, PoleError
from .report import Report, Verdict, jsonable
from .schemas import validate

BOUNDARY_GRID = 256
AUTOMORPHISM_TOL = 1e-9
IDENTITY_TOL = 1e-12
PARABOLIC_TOL = 1e-9
LOCATION_TOL = 1e-9


@dataclass(frozen=True)
class MoebiusMap:
    """Coefficients are rescaled on construction so that ``ad - bc = 1``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0 or abs(det) <= 1e-14 * scale * scale:
            raise InputError("degenerate map: ad - bc = 0")
        s = cmath.sqrt(det)
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v / s)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        return cls(m[0][0], m[0][1], m[1][0], m[1][1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def pole(self):
        """``-d/c``, or None for affine maps (pole at infinity)."""
        if abs(self.c) <= IDENTITY_TOL * max(abs(self.a), abs(self.d)):
            return None
        return -self.d / self.c

    def __call__(self, z):
        return apply(self, z)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def is_identity(self) -> bool:
        m = self.matrix
        lam = (m[0, 0] + m[1, 1]) / 2
        return bool(np.max(np.abs(m - lam * np.eye(2))) <= IDENTITY_TOL * max(1.0, abs(lam)))

    def boundary_moduli(self, points: int = BOUNDARY_GRID) -> np.ndarray:
        zeta = np.exp(2j * np.pi * np.arange(points) / points)
        den = self.c * zeta + self.d
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs((self.a * zeta + self.b) / den)

    def is_self_map(self) -> bool:
        """True when the map sends the open unit disk into itself."""
        pole = self.pole
        if pole is not None and abs(pole) <= 1 + AUTOMORPHISM_TOL:
            return False
        if abs(self.b / self.d) >= 1:
            return False
        return bool(np.max(self.boundary_moduli()) <= 1 + AUTOMORPHISM_TOL)

    def is_automorphism(self) -> bool:
        if not self.is_self_map():
            return False
        return bool(np.max(np.abs(self.boundary_moduli() - 1)) <= AUTOMORPHISM_TOL)

    def to_dict(self) -> dict:
        return {k: jsonable(getattr(self, k)) for k in "abcd"}

    @classmethod
    def from_dict(cls, data: dict) -> "MoebiusMap":
        validate(data, "moebius_map")
        return cls(*(complex(*data[k]) for k in "abcd"))


# constructors -------------------------------------------------------------


def identity() -> MoebiusMap:
    return MoebiusMap(1, 0, 0, 1)


def sigma() -> MoebiusMap:
    """``(1 + z)/(1 - z)``: the unit disk onto the right half-plane."""
    return MoebiusMap(1, 1, -1, 1)


def translation(a: complex) -> MoebiusMap:
    return MoebiusMap(1, a, 0, 1)


def rotation(theta: float) -> MoebiusMap:
    return MoebiusMap(cmath.exp(1j * theta), 0, 0, 1)


def disk_automorphism(p: complex) -> MoebiusMap:
    """``(z - p)/(1 - conj(p) z)``, sending ``p`` to 0."""
    if abs(p) >= 1:
        raise InputError("automorphism center must lie in the disk")
    return MoebiusMap(1, -p, -complex(p).conjugate(), 1)


def parabolic(a: complex, fixed_point: complex = 1.0) -> MoebiusMap:
    """Conjugate of ``w -> w + a`` by the half-plane map, with boundary fixed point ``fixed_point``."""
    omega = complex(fixed_point)
    if abs(abs(omega) - 1) > LOCATION_TOL:
        raise InputError("parabolic fixed point must lie on the unit circle")
    rot = MoebiusMap(omega, 0, 0, 1)
    s = sigma()
    return compose(rot, compose(s.inverse(), compose(translation(a), compose(s, rot.inverse()))))


# group operations ---------------------------------------------------------


def apply(m: MoebiusMap, z):
    """Evaluate the map at ``z`` (scalar or array); the pole raises :class:`PoleError`."""
    z_arr = np.asarray(z, dtype=complex)
    den = m.c * z_arr + m.d
    if np.any(den == 0):
        raise PoleError(m.pole)
    out = (m.a * z_arr + m.b) / den
    return complex(out) if out.ndim == 0 else out


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """``m1 o m2``."""
    return MoebiusMap.from_matrix(m1.matrix @ m2.matrix)


def _parabolic_part(m: MoebiusMap):
    """``(s, N)`` with ``m = s (I + N)``, N nilpotent, when the trace is +-2 up to roundoff.

    Stored coefficients are rounded, so a parabolic matrix is only parabolic
    to about ``eps``; its plain powers then drift by ``n^2 eps``.  Snapping
    to the Jordan form keeps the error linear in ``n``.
    """
    t = m.trace
    scale = max(1.0, float(np.max(np.abs(m.matrix))) ** 2)
    if abs(t * t - 4) > 16 * np.finfo(float).eps * scale:
        return None
    s = 1.0 if t.real > 0 else -1.0
    return s, m.matrix / s - np.eye(2)


def _from_power(mat) -> MoebiusMap:
    """Wrap a matrix power; powers that collapse to rank one stay max-normalized."""
    mat = mat / np.max(np.abs(mat))
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if abs(det) > 1e-14:
        return MoebiusMap.from_matrix(mat)
    out = object.__new__(MoebiusMap)
    for name, v in zip("abcd", mat.ravel()):
        object.__setattr__(out, name, complex(v))
    return out


def iterate(m: MoebiusMap, n: int) -> MoebiusMap:
    """``n``-th iterate: Jordan form for parabolic maps, binary powering otherwise.

    Iterates of hyperbolic or loxodromic maps tend to a constant map; once
    ``ad - bc`` vanishes at working precision the result keeps its
    coefficients scaled to unit max-modulus instead of determinant one.
    """
    if n < 0:
        raise InputError("iteration count must be non-negative")
    jordan = _parabolic_part(m)
    if jordan is not None:
        return _from_power(np.eye(2) + n * jordan[1])
    result = np.eye(2, dtype=complex)
    base = m.matrix
    while n:
        if n & 1:
            result = _renorm(result @ base)
        base = _renorm(base @ base)
        n >>= 1
    return _from_power(result)


def _renorm(mat):
    return mat / np.max(np.abs(mat))


def iterate_many(m: MoebiusMap, ns) -> tuple:
    """Coefficient arrays ``(A, B, C, D)`` of ``m^n`` for every ``n`` in ``ns``.

    Parabolic maps use the Jordan form ``M^n = s^n (I + n N)`` with ``N``
    nilpotent (see :func:`_parabolic_part`); the scalar ``s^n`` is dropped
    since maps are projective.
    Other maps accumulate products left to right with renormalization.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.size and ns.min() < 0:
        raise InputError("iteration counts must be non-negative")
    jordan = _parabolic_part(m)
    if jordan is not None:
        N = jordan[1]
        nf = ns.astype(float)
        return 1 + nf * N[0, 0], nf * N[0, 1], nf * N[1, 0], 1 + nf * N[1, 1]
    top = int(ns.max()) if ns.size else 0
    mats = np.empty((top + 1, 4), dtype=complex)
    cur = np.eye(2, dtype=complex)
    base = m.matrix
    mats[0] = cur.ravel()
    for k in range(1, top + 1):
        cur = cur @ base
        cur = cur / np.max(np.abs(cur))
        mats[k] = cur.ravel()
    sel = mats[ns]
    return sel[:, 0], sel[:, 1], sel[:, 2], sel[:, 3]


def apply_many(coeffs, z):
    A, B, C, D = coeffs
    return (A * z + B) / (C * z + D)


# classification -----------------------------------------------------------


class MapKind(str, enum.Enum):
    PARABOLIC = "PARABOLIC"
    HYPERBOLIC_AUTOMORPHISM = "HYPERBOLIC_AUTOMORPHISM"
    HYPERBOLIC_NON_AUTOMORPHISM = "HYPERBOLIC_NON_AUTOMORPHISM"
    ELLIPTIC = "ELLIPTIC"
    LOXODROMIC = "LOXODROMIC"
    IDENTITY = "IDENTITY"


class Location(str, enum.Enum):
    IN_DISK = "IN_DISK"
    ON_CIRCLE = "ON_CIRCLE"
    OUTSIDE_CLOSED_DISK = "OUTSIDE_CLOSED_DISK"


def locate(z) -> Location:
    if z is None:
        return Location.OUTSIDE_CLOSED_DISK
    r = abs(z)
    if abs(r - 1) <= LOCATION_TOL:
        return Location.ON_CIRCLE
    return Location.IN_DISK if r < 1 else Location.OUTSIDE_CLOSED_DISK


@dataclass(frozen=True)
class FixedPoint:
    value: complex | None  # None is the point at infinity
    location: Location

    def to_dict(self):
        return {"value": None if self.value is None else jsonable(self.value),
                "location": self.location.value}


@dataclass(frozen=True)
class MapClass:
    kind: MapKind
    fixed_points: tuple
    self_map: bool
    automorphism: bool

    @property
    def interior_fixed_point(self):
        for fp in self.fixed_points:
            if fp.location is Location.IN_DISK:
                return fp.value
        return None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "fixed_points": [fp.to_dict() for fp in self.fixed_points],
            "self_map": self.self_map,
            "automorphism": self.automorphism,
            "interior_fixed_point": jsonable(self.interior_fixed_point),
        }


def fixed_points(m: MoebiusMap) -> tuple:
    """Roots of ``c z^2 + (d - a) z - b = 0``; affine maps also fix infinity."""
    a, b, c, d = m.a, m.b, m.c, m.d
    if m.pole is None:
        if abs(d - a) <= PARABOLIC_TOL * max(abs(a), abs(d)):
            return (None,)
        return (b / (d - a), None)
    disc = (a + d) ** 2 - 4
    if abs(disc) <= PARABOLIC_TOL * max(1.0, abs(a + d) ** 2):
        return ((a - d) / (2 * c),)
    root = cmath.sqrt(disc)
    # pick the sign that avoids cancellation, recover the other root from the product -b/c
    q = (a - d) + root if abs((a - d) + root) >= abs((a - d) - root) else (a - d) - root
    z1 = q / (2 * c)
    z2 = -2 * b / q if q != 0 else (a - d - root) / (2 * c)
    return (z1, z2)


def classify(m: MoebiusMap) -> MapClass:
    """Trace-based kind plus located fixed points.

    For a self-map of the disk the kinds read: PARABOLIC (one boundary
    fixed point), HYPERBOLIC_* (two fixed points, real multiplier),
    ELLIPTIC / LOXODROMIC (an interior fixed point).  ``interior_fixed_point``
    is reported whatever the kind.
    """
    if m.is_identity():
        return MapClass(MapKind.IDENTITY, (), True, True)
    self_map = m.is_self_map()
    auto = self_map and m.is_automorphism()
    t = m.trace
    pts = tuple(FixedPoint(z, locate(z)) for z in fixed_points(m))
    if abs(t * t - 4) <= PARABOLIC_TOL * max(1.0, abs(t) ** 2):
        kind = MapKind.PARABOLIC
    elif abs(t.imag) <= PARABOLIC_TOL * max(1.0, abs(t)):
        if abs(t.real) > 2:
            kind = MapKind.HYPERBOLIC_AUTOMORPHISM if auto else MapKind.HYPERBOLIC_NON_AUTOMORPHISM
        else:
            kind = MapKind.ELLIPTIC
    else:
        kind = MapKind.LOXODROMIC
    return MapClass(kind, pts, self_map, auto)


# half-plane normal form ---------------------------------------------------


@dataclass(frozen=True)
class HalfPlaneForm:
    """``sigma o R^-1 o phi o R o sigma^-1 = (w -> w + a)`` with ``R(z) = rotation * z``."""

    a_translation: complex
    rotation: complex
    automorphism: bool

    def to_dict(self) -> dict:
        return {"a": jsonable(self.a_translation), "rotation": jsonable(self.rotation),
                "automorphism": self.automorphism, "conjugator": "(1+z)/(1-z)"}


def to_half_plane(m: MoebiusMap) -> HalfPlaneForm:
    cls = classify(m)
    if cls.kind is not MapKind.PARABOLIC:
        raise InputError(f"half-plane normal form needs a parabolic map, got {cls.kind.value}")
    omega = cls.fixed_points[0].value
    if omega is None or cls.fixed_points[0].location is not Location.ON_CIRCLE:
        raise InputError("parabolic fixed point is not on the unit circle")
    omega = omega / abs(omega)
    rot = MoebiusMap(omega, 0, 0, 1)
    s = sigma()
    Phi = compose(s, compose(rot.inverse(), compose(m, compose(rot, s.inverse()))))
    a = Phi.b / Phi.d
    w = np.array([0.5, 1.0, 2.0 + 1j, 3.0 - 2j, 0.1 + 5j])
    err = np.max(np.abs(apply(Phi, w) - (w + a)))
    if err > 1e-10 * max(1.0, abs(a)):
        raise InputError(f"conjugated map is not a translation (residual {err:.2e})")
    return HalfPlaneForm(a, omega, bool(abs(a.real) <= 1e-12 * max(1.0, abs(a))))


def parabolic_identity_check(a: complex, z: complex, n: int, tol: float = 1e-9) -> Report:
    """Compare both closed forms for the parabolic iterates against matrix iteration.

    ``1 - |phi_n(z)|^2 = 4 Re(s + na) / |1 + s + na|^2`` and
    ``phi_n(z) - phi_n(0) = 2 (s - s0) / ((s + na + 1)(s0 + na + 1))``
    with ``s = sigma(z)``, ``s0 = sigma(0) = 1``.
    """
    a, z = complex(a), complex(z)
    if abs(z) >= 1:
        raise InputError("z must lie in the open unit disk")
    if n < 1:
        raise InputError("n must be positive")
    phi_n = iterate(parabolic(a), n)
    wz, w0 = apply(phi_n, z), apply(phi_n, 0)
    s, s0 = apply(sigma(), z), 1.0
    lhs1 = 1 - abs(wz) ** 2
    rhs1 = 4 * (s + n * a).real / abs(1 + s + n * a) ** 2
    lhs2 = wz - w0
    rhs2 = 2 * (s - s0) / ((s + n * a + 1) * (s0 + n * a + 1))
    err1, err2 = abs(lhs1 - rhs1), abs(lhs2 - rhs2)
    verdict = Verdict.PASS if max(err1, err2) < tol else Verdict.FAIL
    return Report("parabolic_identity", verdict,
                  summary={"a": a, "z": z, "n": n, "lhs_modulus": lhs1, "rhs_modulus": rhs1,
                           "err_modulus": err1, "lhs_difference": lhs2, "rhs_difference": rhs2,
                           "err_difference": err2, "tol": tol})

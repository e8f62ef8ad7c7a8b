"""Inline text formats accepted on the command line."""
from __future__ import annotations

import json

from .errors import InputError
from .hardy import HardyFunction
from .moebius import MoebiusMap
from .seqspace import Axis, WindowVector


def parse_complex(text) -> complex:
    """``"0.5"``, ``"1+2j"``, ``"-i"`` and friends."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    if s in ("j", "+j"):
        return 1j
    if s == "-j":
        return -1j
    try:
        return complex(s)
    except ValueError:
        raise InputError(f"not a complex number: {text!r}") from None


def parse_vector(text: str, axis: Axis, p: float = 2.0) -> WindowVector:
    """Either WindowVector JSON or ``"j:value,j:value"`` pairs."""
    s = text.strip()
    if s.startswith("{"):
        try:
            return WindowVector.from_dict(json.loads(s), axis=axis)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad vector JSON: {exc}") from None
    values = {}
    for part in s.split(","):
        if ":" not in part:
            raise InputError(f"expected index:value, got {part!r}")
        j, v = part.split(":", 1)
        try:
            values[int(j)] = parse_complex(v)
        except ValueError:
            raise InputError(f"bad index {j!r}") from None
    return WindowVector.from_mapping(values, p=p, axis=axis)


def _sympify(expr: str):
    import sympy

    z = sympy.Symbol("z")
    try:
        e = sympy.sympify(expr.replace("^", "**"), locals={"z": z, "i": sympy.I, "j": sympy.I})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InputError(f"cannot parse {expr!r}: {exc}") from None
    if e.free_symbols - {z}:
        raise InputError(f"{expr!r} may only depend on z")
    return sympy, z, e


def parse_symbol(expr: str) -> MoebiusMap:
    """A linear fractional expression in ``z`` such as ``"z/(2-z)"``."""
    sympy, z, e = _sympify(expr)
    num, den = sympy.fraction(sympy.together(e))
    try:
        pn, pd = sympy.Poly(num, z), sympy.Poly(den, z)
    except sympy.PolynomialError:
        raise InputError(f"{expr!r} is not a rational function of z") from None
    if pn.degree() > 1 or pd.degree() > 1:
        raise InputError(f"{expr!r} is not linear fractional")
    a, b = (complex(pn.coeff_monomial(z ** k)) for k in (1, 0))
    c, d = (complex(pd.coeff_monomial(z ** k)) for k in (1, 0))
    return MoebiusMap(a, b, c, d)


def parse_function(expr: str) -> HardyFunction:
    """``"identity"``, a polynomial in ``z``, a JSON coefficient object, or a file path."""
    s = expr.strip()
    if s == "identity":
        return HardyFunction.identity()
    if s.startswith("{"):
        try:
            return HardyFunction.from_dict(json.loads(s))
        except json.JSONDecodeError as exc:
            raise InputError(f"bad function JSON: {exc}") from None
    sympy, z, e = _sympify(s)
    try:
        poly = sympy.Poly(sympy.expand(e), z)
    except sympy.PolynomialError:
        raise InputError(f"{expr!r} is not a polynomial in z") from None
    coeffs = [complex(c) for c in reversed(poly.all_coeffs())]
    return HardyFunction(coeffs)

"""Weighted backward shifts on l^p(N) and l^p(Z).

``T e_j = w_j e_{j-1}`` (with ``T e_1 = 0`` on N).  Weight products are
always formed in log space from per-value counts, so a product over a
range of a million indices costs O(#distinct values) and cannot overflow.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_chunks
from .errors import InputError, ProductOverflowError
from .report import Report, Verdict, jsonable
from .schemas import validate
from .seqspace import Axis, WindowVector

LOG_MAX = math.log(np.finfo(float).max)
LOG_TINY = math.log(np.finfo(float).tiny)
LOG10 = math.log(10.0)


def _log10(x):
    return np.asarray(x, dtype=float) / LOG10


class WeightSequence:
    """Positive bounded weights ``w_j`` indexed by N or Z.

    Rules:

    * ``constant(c)``: ``w_j = c``.
    * ``periodic(values)``: ``w_j = values[(j - j0) % len(values)]`` with
      ``j0`` = 1 on N and 0 on Z.
    * ``piecewise(neg, pos, breakpoint)``: ``neg`` for ``j <= breakpoint``,
      ``pos`` above it.
    * ``explicit(values, default_tail)``: listed indices take their value,
      every other index takes ``default_tail``.
    """

    def __init__(self, axis, kind, **params):
        self.axis = Axis(axis)
        self.kind = kind
        self.params = params
        if kind == "constant":
            vals = [params["value"]]
        elif kind == "periodic":
            vals = list(params["values"])
        elif kind == "piecewise":
            params.setdefault("breakpoint", 0)
            params["breakpoint"] = int(params["breakpoint"])
            vals = [params["neg_value"], params["pos_value"]]
        elif kind == "explicit":
            params["values"] = {int(k): float(v) for k, v in params["values"].items()}
            vals = list(params["values"].values()) + [params["default_tail"]]
        else:
            raise InputError(f"unknown weight rule {kind!r}")
        vals = [float(v) for v in vals]
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise InputError("weights must be finite and strictly positive")
        self.bound = max(vals)
        self._prepare()

    # constructors -------------------------------------------------------

    @classmethod
    def constant(cls, value, axis=Axis.INTEGERS):
        return cls(axis, "constant", value=float(value))

    @classmethod
    def periodic(cls, values, axis=Axis.INTEGERS):
        return cls(axis, "periodic", values=[float(v) for v in values])

    @classmethod
    def piecewise(cls, neg_value, pos_value, breakpoint=0, axis=Axis.INTEGERS):
        return cls(axis, "piecewise", neg_value=float(neg_value), pos_value=float(pos_value),
                   breakpoint=int(breakpoint))

    @classmethod
    def explicit(cls, values, default_tail, axis=Axis.INTEGERS):
        return cls(axis, "explicit", values=dict(values), default_tail=float(default_tail))

    def _prepare(self):
        p = self.params
        if self.kind == "periodic":
            self._logs = np.log(np.array(p["values"]))
            self._start = 1 if self.axis is Axis.NATURAL else 0
        elif self.kind == "explicit":
            keys = sorted(p["values"])
            self._keys = np.array(keys, dtype=np.int64)
            self._log_default = math.log(p["default_tail"])
            deltas = np.array([math.log(p["values"][k]) - self._log_default for k in keys])
            self._delta_prefix = np.concatenate([[0.0], np.cumsum(deltas)])

    # evaluation ---------------------------------------------------------

    def _check_indices(self, j):
        if self.axis is Axis.NATURAL and np.any(np.asarray(j) < 1):
            raise InputError("weights on N are indexed from 1")

    def weights(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=np.int64)
        self._check_indices(j)
        p = self.params
        if self.kind == "constant":
            return np.full(j.shape, p["value"])
        if self.kind == "periodic":
            vals = np.array(p["values"])
            return vals[(j - self._start) % len(vals)]
        if self.kind == "piecewise":
            return np.where(j <= p["breakpoint"], p["neg_value"], p["pos_value"])
        out = np.full(j.shape, p["default_tail"], dtype=float)
        for k, v in p["values"].items():
            out[j == k] = v
        return out

    def weight(self, j: int) -> float:
        return float(self.weights(np.array([j]))[0])

    def log_range_product(self, lo, hi) -> np.ndarray:
        """``log(w_lo * ... * w_hi)`` elementwise; an empty range gives 0."""
        lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=np.int64), np.asarray(hi, dtype=np.int64))
        length = np.maximum(hi - lo + 1, 0)
        if self.axis is Axis.NATURAL and np.any((length > 0) & (lo < 1)):
            raise InputError("weights on N are indexed from 1")
        p = self.params
        if self.kind == "constant":
            return length * math.log(p["value"])
        if self.kind == "piecewise":
            n_neg = np.clip(np.minimum(hi, p["breakpoint"]) - lo + 1, 0, length)
            return n_neg * math.log(p["neg_value"]) + (length - n_neg) * math.log(p["pos_value"])
        if self.kind == "periodic":
            P = len(self._logs)
            r = np.arange(P)
            shift = self._start + r
            counts = (hi[..., None] - shift) // P - (lo[..., None] - 1 - shift) // P
            counts = np.where(length[..., None] > 0, counts, 0)
            return counts @ self._logs
        base = length * self._log_default
        i_hi = np.searchsorted(self._keys, hi, side="right")
        i_lo = np.searchsorted(self._keys, lo, side="left")
        extra = np.where(length > 0, self._delta_prefix[i_hi] - self._delta_prefix[np.minimum(i_lo, i_hi)], 0.0)
        return base + extra

    def range_product(self, lo, hi) -> np.ndarray:
        return np.exp(self.log_range_product(lo, hi))

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        rule = {"kind": self.kind}
        if self.kind == "explicit":
            rule["values"] = {str(k): v for k, v in sorted(self.params["values"].items())}
            rule["default_tail"] = self.params["default_tail"]
        else:
            rule.update(self.params)
        return {"axis": self.axis.value, "rule": rule}

    @classmethod
    def from_dict(cls, data: dict) -> "WeightSequence":
        validate(data, "weight_sequence")
        rule = dict(data["rule"])
        kind = rule.pop("kind")
        return cls(data["axis"], kind, **rule)

    def __repr__(self):
        return f"WeightSequence({self.axis.value}, {self.kind}, {self.params})"


@dataclass(frozen=True)
class BackwardShift:
    weights: WeightSequence

    @property
    def axis(self) -> Axis:
        return self.weights.axis

    @property
    def unilateral(self) -> bool:
        return self.axis is Axis.NATURAL


def _check_axis(T: BackwardShift, x: WindowVector):
    if x.axis is not T.axis:
        raise InputError(f"vector lives on {x.axis.value} but the shift acts on {T.axis.value}")


def apply(T: BackwardShift, x: WindowVector) -> WindowVector:
    """One application of the shift, multiplying by single weights."""
    _check_axis(T, x)
    lo, hi = x.window.lo, x.window.hi
    out_window = x.window.shifted(-1)
    if T.unilateral:
        if hi == 1:
            return WindowVector.zeros(out_window, x.p)
        src = np.arange(max(lo, 2), hi + 1)
        return WindowVector(out_window, T.weights.weights(src) * x.coords(src), x.p)
    return WindowVector(out_window, T.weights.weights(x.window.indices()) * x.coeffs, x.p)


def apply_power(T: BackwardShift, x: WindowVector, n: int) -> WindowVector:
    """``T^n x`` via ``(T^n x)_{j-n} = w_j w_{j-1} ... w_{j-n+1} x_j``."""
    _check_axis(T, x)
    if n < 0:
        raise InputError("power must be non-negative")
    if n == 0:
        return x
    lo, hi = x.window.lo, x.window.hi
    out_window = x.window.shifted(-n)
    if T.unilateral:
        if hi <= n:
            return WindowVector.zeros(out_window, x.p)
        src = np.arange(max(lo, n + 1), hi + 1)
    else:
        src = x.window.indices()
    xs = x.coords(src)
    logs = T.weights.log_range_product(src - n + 1, src)
    nz = xs != 0
    with np.errstate(divide="ignore"):
        mag = np.where(nz, np.log(np.abs(xs)), -np.inf) + logs
    if np.any(mag > LOG_MAX):
        j = int(src[np.argmax(mag > LOG_MAX)])
        raise ProductOverflowError(f"T^{n} overflows at index {j}", index=j)
    return WindowVector(out_window, np.where(nz, xs * np.exp(np.where(nz, logs, 0.0)), 0), x.p)


def right_inverse_power(T: BackwardShift, z: WindowVector, k: int) -> WindowVector:
    """``S^k z`` for the weighted forward shift ``S e_j = e_{j+1} / w_{j+1}``.

    ``apply_power(T, right_inverse_power(T, z, k), k)`` reproduces ``z``.
    Raises :class:`ProductOverflowError` naming the source index when a
    coefficient would leave the normal double range.
    """
    _check_axis(T, z)
    if k < 0:
        raise InputError("power must be non-negative")
    if k == 0:
        return z
    src = z.window.indices()
    logs = T.weights.log_range_product(src + 1, src + k)
    nz = z.coeffs != 0
    with np.errstate(divide="ignore"):
        mag = np.where(nz, np.log(np.abs(z.coeffs)), 0.0) - logs
    # only flag underflow the weights cause; an already tiny input coefficient is passed through
    bad = nz & ((mag > LOG_MAX) | ((mag < LOG_TINY) & (logs > 0)))
    if np.any(bad):
        j = int(src[np.argmax(bad)])
        raise ProductOverflowError(
            f"S^{k} coefficient from index {j} leaves double range (log magnitude {mag[np.argmax(bad)]:.1f})",
            index=j)
    coeffs = np.where(nz, z.coeffs * np.exp(-np.where(nz, logs, 0.0)), 0)
    return WindowVector(z.window.shifted(k), coeffs, z.p)


# Salas tests --------------------------------------------------------------


def salas_unilateral(w: WeightSequence, horizon: int, threshold: float, threads: int = 1,
                     with_series: bool = False) -> Report:
    """Scan ``P_n = w_1 ... w_n`` for ``n <= horizon``.

    A finite scan can only produce evidence that ``sup P_n`` is infinite,
    never a disproof; the verdict is EVIDENCE_HYPERCYCLIC or
    UNDETERMINED_AT_HORIZON.
    """
    if w.axis is not Axis.NATURAL:
        raise InputError("salas_unilateral needs weights on N")
    if horizon < 1 or not threshold > 0:
        raise InputError("horizon must be >= 1 and threshold > 0")
    chunks = map_chunks(lambda a, b: w.log_range_product(1, np.arange(a, b)), 1, horizon + 1, threads)
    logs = np.concatenate(chunks)
    log_thr = math.log(threshold)
    i_max = int(np.argmax(logs))
    summary = {
        "horizon": horizon,
        "threshold": threshold,
        "argmax_n": i_max + 1,
        "max_log_product": float(logs[i_max]),
        "max_log10_product": float(logs[i_max] / LOG10),
        "max_product": float(math.exp(min(logs[i_max], LOG_MAX))),
    }
    series = {"n": np.arange(1, horizon + 1), "log10_product": _log10(logs)} if with_series else {}
    hit = np.flatnonzero(logs >= log_thr)
    if hit.size:
        n = int(hit[0]) + 1
        return Report("salas_unilateral", Verdict.EVIDENCE_HYPERCYCLIC,
                      witness={"n": n, "log10_product": float(logs[n - 1] / LOG10)},
                      summary=summary, series=series)
    return Report("salas_unilateral", Verdict.UNDETERMINED_AT_HORIZON, summary=summary, series=series,
                  notes=["finite horizon cannot certify a bounded product sequence"])


@dataclass(frozen=True)
class SalasQuery:
    epsilon: float
    q: int
    horizon: int

    def __post_init__(self):
        if not self.epsilon > 0 or self.q < 1 or self.horizon < 1:
            raise InputError("need epsilon > 0, q >= 1, horizon >= 1")


def _bilateral_extremes(w: WeightSequence, q: int, n_lo: int, n_hi: int):
    js = np.arange(-q + 1, q)[None, :]
    ns = np.arange(n_lo, n_hi)[:, None]
    fwd = w.log_range_product(js + 1, js + ns).min(axis=1)
    bwd = w.log_range_product(js - ns + 1, js).max(axis=1)
    return fwd, bwd


def salas_bilateral(w: WeightSequence, query: SalasQuery, threads: int = 1,
                    with_series: bool = False) -> Report:
    """Smallest ``n <= horizon`` meeting both product inequalities for every ``|j| < q``."""
    if w.axis is not Axis.INTEGERS:
        raise InputError("salas_bilateral needs weights on Z")
    parts = map_chunks(lambda a, b: _bilateral_extremes(w, query.q, a, b), 1, query.horizon + 1, threads)
    fwd = np.concatenate([f for f, _ in parts])
    bwd = np.concatenate([b for _, b in parts])
    ok = (fwd > -math.log(query.epsilon)) & (bwd < math.log(query.epsilon))
    summary = {"epsilon": query.epsilon, "q": query.q, "horizon": query.horizon,
               "j_range": [-query.q + 1, query.q - 1]}
    series = ({"n": np.arange(1, query.horizon + 1), "min_forward_log10": _log10(fwd),
               "max_backward_log10": _log10(bwd)} if with_series else {})
    hit = np.flatnonzero(ok)
    if hit.size:
        i = int(hit[0])
        return Report("salas_bilateral", Verdict.EVIDENCE_HYPERCYCLIC,
                      witness={"n": i + 1, "min_forward_log10": float(fwd[i] / LOG10),
                               "max_backward_log10": float(bwd[i] / LOG10)},
                      summary=summary, series=series)
    return Report("salas_bilateral", Verdict.UNDETERMINED_AT_HORIZON, summary=summary, series=series,
                  notes=["no n up to the horizon satisfies both inequalities for all |j| < q"])


# Conjecture refutation ----------------------------------------------------


class Condition(str, enum.Enum):
    COND1 = "COND1"
    COND2 = "COND2"
    UNDETERMINED = "UNDETERMINED"


READING_NOTE = ("N is read as universally quantified: for every N some n_k must give "
                "w_0 w_1 ... w_{n_k} > alpha * N")


@dataclass
class RefutationCertificate:
    """Which conjectured condition fails on the supplied data, and where.

    ``alpha_log10`` is the observed backward-product bound (log10).  For a
    COND1 verdict the witness product exceeds it; for COND2 the forward
    product at ``j = 0`` stays at or below ``alpha * N``.
    """

    alpha_log10: float
    alpha_infinite: bool
    violated_condition: Condition
    witness: dict
    w0_lower_bound: int = 0
    j_range: int = 0
    N_max: int = 0
    profile: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.violated_condition = Condition(self.violated_condition)
        self.witness = jsonable(self.witness)
        self.profile = jsonable(self.profile)
        self.alpha_log10 = float(self.alpha_log10)
        self.notes = [str(n) for n in self.notes]

    @property
    def verdict(self) -> Verdict:
        if self.violated_condition is Condition.UNDETERMINED:
            return Verdict.UNDETERMINED_AT_HORIZON
        return Verdict.VIOLATED

    def to_dict(self) -> dict:
        return {
            "check": "refute_conjecture",
            "verdict": self.verdict.value,
            "alpha_log10": self.alpha_log10,
            "alpha_infinite": self.alpha_infinite,
            "violated_condition": self.violated_condition.value,
            "witness": self.witness,
            "w0_lower_bound": self.w0_lower_bound,
            "j_range": self.j_range,
            "N_max": self.N_max,
            "profile": self.profile,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RefutationCertificate":
        keys = ("alpha_log10", "alpha_infinite", "violated_condition", "witness",
                "w0_lower_bound", "j_range", "N_max", "profile", "notes")
        missing = [k for k in keys if k not in data]
        if missing:
            raise InputError(f"certificate missing fields {missing}")
        return cls(**{k: data[k] for k in keys})


def refute_conjecture(w: WeightSequence, nk, N_max: int = 1000, j_range: int | None = None,
                      growth_margin: float = 2.0) -> RefutationCertificate:
    """Replay the impossibility argument for the conjectured weight conditions.

    Condition (1): ``sup_{k,j} w_j w_{j-1} ... w_{j-n_k+1} < inf``.
    Condition (2): ``w_j w_{j+1} ... w_{j+n_k} -> inf`` for every j.

    Steps, on the finite data ``|j| <= j_range``:

    1. If the per-k maximal backward product in the later half of ``nk``
       exceeds the earlier-half maximum by more than ``growth_margin``, the
       products trend upward without bound: COND1.
    2. ``alpha`` is the observed maximum.  The backward product at
       ``j = n_k`` must stay below it; if ``j_range < n_k`` and it does not,
       that product is a COND1 witness.
    3. For ``N = 1, 2, ...`` look for k with ``w_0 ... w_{n_k} > alpha * N``.
       Each success certifies ``w_0 > N``; the first N without one is a
       COND2 witness at ``j = 0``.  Surviving to ``N_max`` is UNDETERMINED.
    """
    if w.axis is not Axis.INTEGERS:
        raise InputError("refute_conjecture needs weights on Z")
    nk = np.asarray(list(nk), dtype=np.int64)
    if nk.size == 0:
        raise InputError("nk must be nonempty")
    if np.any(nk < 1) or np.any(np.diff(nk) <= 0):
        raise InputError("nk must be strictly increasing positive integers")
    if N_max < 1:
        raise InputError("N_max must be >= 1")
    J = int(j_range) if j_range is not None else 10 * int(nk.max())
    js = np.arange(-J, J + 1)

    K = nk.size
    back_max = np.empty(K)
    back_arg = np.empty(K, dtype=np.int64)
    fwd_min = np.empty(K)
    for i, n in enumerate(nk):
        b = w.log_range_product(js - n + 1, js)
        back_arg[i] = js[np.argmax(b)]
        back_max[i] = b.max()
        fwd_min[i] = w.log_range_product(js, js + n).min()
    fwd0 = w.log_range_product(0, nk)
    back_at_nk = w.log_range_product(1, nk)
    profile = {
        "n": nk,
        "max_backward_log10": _log10(back_max),
        "forward_at_0_log10": _log10(fwd0),
        "min_forward_log10": _log10(fwd_min),
        "backward_at_nk_log10": _log10(back_at_nk),
    }
    common = dict(j_range=J, N_max=N_max, profile=profile, notes=[READING_NOTE,
                  f"sup over j approximated by |j| <= {J}"])

    if K >= 2:
        h = (K + 1) // 2
        early = back_max[:h].max()
        rising = np.flatnonzero(back_max[h:] > early + math.log(growth_margin))
        if rising.size:
            i = h + int(rising[0])
            return RefutationCertificate(
                alpha_log10=early / LOG10, alpha_infinite=True, violated_condition=Condition.COND1,
                witness={"k": i + 1, "n_k": int(nk[i]), "j": int(back_arg[i]),
                         "product_log10": float(back_max[i] / LOG10), "N": None},
                **common)
    alpha = back_max.max()
    over = np.flatnonzero(back_at_nk > alpha)
    if over.size:
        i = int(over[0])
        return RefutationCertificate(
            alpha_log10=alpha / LOG10, alpha_infinite=False, violated_condition=Condition.COND1,
            witness={"k": i + 1, "n_k": int(nk[i]), "j": int(nk[i]),
                     "product_log10": float(back_at_nk[i] / LOG10), "N": None},
            **common)

    i_best = int(np.argmax(fwd0))
    gap = fwd0[i_best] - alpha
    if gap > math.log(N_max):
        common["notes"].append(f"every N <= {N_max} admits n_k with w_0...w_n_k > alpha*N, "
                               f"so w_0 > {N_max}; raise N_max past sup w = {w.bound}")
        return RefutationCertificate(
            alpha_log10=alpha / LOG10, alpha_infinite=False, violated_condition=Condition.UNDETERMINED,
            witness={"k": i_best + 1, "n_k": int(nk[i_best]), "j": 0,
                     "product_log10": float(fwd0[i_best] / LOG10), "N": N_max},
            w0_lower_bound=N_max, **common)
    N_star = 1 if gap <= 0 else max(1, math.ceil(math.exp(gap)))
    while N_star > 1 and math.log(N_star - 1) >= gap:
        N_star -= 1
    return RefutationCertificate(
        alpha_log10=alpha / LOG10, alpha_infinite=False, violated_condition=Condition.COND2,
        witness={"k": i_best + 1, "n_k": int(nk[i_best]), "j": 0,
                 "product_log10": float(fwd0[i_best] / LOG10), "N": N_star},
        w0_lower_bound=N_star - 1, **common)

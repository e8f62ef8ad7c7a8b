"""Sampled checks of the weak hypercyclicity criterion for backward shifts.

The dense sets ``Y`` and ``Z`` are replaced by finite samples of finitely
supported vectors, so a PASS means "every sampled condition holds at the
sampled horizon" and nothing more.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .report import Report, Verdict
from .schemas import validate
from .seqspace import (WeakNeighborhood, WindowVector, in_ball, norm, weak_member,
                       weak_null_surrogate)
from .shift import BackwardShift, WeightSequence, apply_power, right_inverse_power

SAMPLING_NOTE = "Y and Z are finite samples of finitely supported vectors; density is not checked"
EXACTNESS_TOL = 1e-10


@dataclass
class CriterionInstance:
    operator: BackwardShift
    Y_samples: list
    Z_samples: list
    nk: list
    M: float = 10.0

    def __post_init__(self):
        self.nk = [int(n) for n in self.nk]
        if not self.nk:
            raise InputError("nk must be nonempty")
        if any(n < 1 for n in self.nk) or any(b <= a for a, b in zip(self.nk, self.nk[1:])):
            raise InputError("nk must be strictly increasing positive integers")
        if not self.M > 0:
            raise InputError("M must be positive")
        for v in list(self.Y_samples) + list(self.Z_samples):
            if v.axis is not self.operator.axis:
                raise InputError("sample axis does not match the operator")

    def to_dict(self) -> dict:
        return {
            "weights": self.operator.weights.to_dict(),
            "Y": [y.to_dict() for y in self.Y_samples],
            "Z": [z.to_dict() for z in self.Z_samples],
            "nk": list(self.nk),
            "M": self.M,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CriterionInstance":
        validate(data, "criterion_instance")
        w = WeightSequence.from_dict(data["weights"])
        Y = [WindowVector.from_dict(v, axis=w.axis) for v in data["Y"]]
        Z = [WindowVector.from_dict(v, axis=w.axis) for v in data["Z"]]
        return cls(BackwardShift(w), Y, Z, data["nk"], data.get("M", 10.0))


@dataclass
class CriterionReport:
    cond1: Report
    cond2: Report
    cond3: Report
    notes: list = field(default_factory=lambda: [SAMPLING_NOTE])

    @property
    def overall(self) -> bool:
        return self.cond1.passed and self.cond2.passed and self.cond3.passed

    @property
    def verdict(self) -> Verdict:
        return Verdict.PASS if self.overall else Verdict.FAIL

    def to_dict(self) -> dict:
        return {
            "check": "criterion",
            "verdict": self.verdict.value,
            "overall": self.overall,
            "cond1": self.cond1.to_dict(),
            "cond2": self.cond2.to_dict(),
            "cond3": self.cond3.to_dict(),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CriterionReport":
        try:
            parts = [Report.from_dict(data[k]) for k in ("cond1", "cond2", "cond3")]
        except KeyError as exc:
            raise InputError(f"criterion report missing {exc}") from None
        return cls(*parts, notes=list(data.get("notes", [])))


def _orbit(inst: CriterionInstance, y: WindowVector):
    return [apply_power(inst.operator, y, n) for n in inst.nk]


def check_condition1(inst: CriterionInstance, coord_tol: float = 1e-9,
                     norm_bound: float | None = None) -> Report:
    """``T^{n_k} y -> 0`` weakly, for each sampled y.

    Any finite sample is bounded, so without an explicit ``norm_bound`` the
    bound is growth-based: ``max(M, 1.05 * max of the first half of the
    orbit norms)``, per sample.  An explicit ``norm_bound`` is used as is.
    """
    per_sample = []
    bound = norm_bound
    for i, y in enumerate(inst.Y_samples):
        orbit = _orbit(inst, y)
        if norm_bound is None:
            early = [norm(v) for v in orbit[: max(1, len(orbit) // 2)]]
            bound = max(inst.M, 1.05 * max(early))
        r = weak_null_surrogate(orbit, coord_tol=coord_tol, norm_bound=bound)
        per_sample.append(r.summary["sup_norm"])
        if not r.passed:
            t = r.witness["term"]
            witness = dict(r.witness, sample=i, k=t, n_k=inst.nk[t - 1])
            return Report("condition1", Verdict.FAIL, witness=witness,
                          summary={"norm_bound": bound, "coord_tol": coord_tol})
    return Report("condition1", Verdict.PASS,
                  summary={"norm_bound": "growth" if norm_bound is None else norm_bound,
                           "coord_tol": coord_tol, "sup_norm_per_sample": per_sample})


def check_condition2(inst: CriterionInstance) -> Report:
    """Find, per normalized sample, the first N with ``sup_{k>=N} ||T^{n_k} y|| <= M``."""
    if not inst.Y_samples:
        raise InputError("condition 2 needs at least one Y sample")
    Ns, sups, scales = [], [], []
    series = {"n": list(inst.nk)}
    for i, y in enumerate(inst.Y_samples):
        ny = norm(y)
        scale = 1.0 / ny if ny > 1.0 else 1.0
        scales.append(scale)
        r = np.array([norm(v) for v in _orbit(inst, y * scale)])
        series[f"norm_y{i}"] = r
        over = np.flatnonzero(r > inst.M)
        if over.size and over[-1] == r.size - 1:
            return Report("condition2", Verdict.FAIL,
                          witness={"sample": i, "k": int(r.size), "n_k": inst.nk[-1], "norm": float(r[-1])},
                          summary={"M": inst.M, "scales": scales, "observed_sup": float(r.max())},
                          series=series)
        N = int(over[-1]) + 2 if over.size else 1
        Ns.append(N)
        sups.append(float(r[N - 1:].max()))
    return Report("condition2", Verdict.PASS,
                  witness={"N": Ns},
                  summary={"M": inst.M, "scales": scales, "tail_sup": sups,
                           "observed_sup": max(sups)},
                  series=series)


def check_condition3(inst: CriterionInstance, tol: float = 1e-6, s_index: str = "nk") -> Report:
    """Right-inverse decay ``||S z|| -> 0`` and exactness ``T^{n_k} S^{n_k} z = z``.

    ``s_index`` selects whether the decaying term uses ``S^{n_k}`` ("nk")
    or ``S^k`` ("k"); the exactness term always uses ``n_k``.
    """
    if s_index not in ("nk", "k"):
        raise InputError("s_index must be 'nk' or 'k'")
    T = inst.operator
    series = {"n": list(inst.nk)}
    worst_a, worst_b = 0.0, 0.0
    failure = None
    for i, z in enumerate(inst.Z_samples):
        res_a, res_b = [], []
        for k, n in enumerate(inst.nk, start=1):
            s_pow = n if s_index == "nk" else k
            res_a.append(norm(right_inverse_power(T, z, s_pow)))
            back = apply_power(T, right_inverse_power(T, z, n), n)
            res_b.append(norm(back - z))
        series[f"residual_a_z{i}"] = res_a
        series[f"residual_b_z{i}"] = res_b
        worst_a = max(worst_a, res_a[-1])
        worst_b = max(worst_b, max(res_b))
        if failure is None:
            if res_a[-1] >= tol:
                failure = {"sample": i, "reason": "no_decay", "residual_a_last": res_a[-1]}
            elif max(res_b) >= EXACTNESS_TOL:
                failure = {"sample": i, "reason": "inexact", "residual_b_max": max(res_b)}
    summary = {"tol": tol, "s_index": s_index, "max_residual_a_last": worst_a, "max_residual_b": worst_b}
    verdict = Verdict.FAIL if failure else Verdict.PASS
    return Report("condition3", verdict, witness=failure or {}, summary=summary, series=series)


def check_criterion(inst: CriterionInstance, coord_tol: float = 1e-9, tol: float = 1e-6,
                    s_index: str = "nk") -> CriterionReport:
    return CriterionReport(check_condition1(inst, coord_tol), check_condition2(inst),
                           check_condition3(inst, tol, s_index))


def transitivity_witness(T: BackwardShift, G_center: WindowVector, G_radius: float,
                         W: WeakNeighborhood, horizon: int, min_n: int = 0,
                         M: float | None = None) -> Report:
    """Search ``n`` with ``T^n x`` in ``W`` for some ``x`` within ``G_radius`` of ``G_center``.

    Candidates are ``x_n = g + S^n P(c - T^n g)`` where ``P`` keeps only the
    coordinates ``W`` inspects; ``T^n S^n = I`` makes ``T^n x_n`` agree
    with ``W``'s center on those coordinates.  The witness norm and image
    norm are always reported; ``M`` adds a ball-membership flag.
    """
    if not G_radius > 0:
        raise InputError("G_radius must be positive")
    if G_center.axis is not T.axis or W.center.axis is not T.axis:
        raise InputError("G/W live on a different axis than the shift")
    idx = np.array(W.functional_indices, dtype=int)
    summary = {"horizon": horizon, "min_n": min_n, "G_radius": G_radius}
    for n in range(min_n, horizon + 1):
        image = apply_power(T, G_center, n)
        if idx.size:
            gap = W.center.coords(idx) - image.coords(idx)
            target = WindowVector.from_mapping(dict(zip(idx.tolist(), gap)), p=G_center.p, axis=T.axis)
            x = G_center + right_inverse_power(T, target, n)
        else:
            x = G_center
        dist = norm(x - G_center)
        Tx = apply_power(T, x, n)
        if dist < G_radius and weak_member(Tx, W):
            witness = {"n": n, "x": x.to_dict(), "distance_to_G_center": dist,
                       "witness_norm": norm(x), "image_norm": norm(Tx)}
            if M is not None:
                witness["image_in_ball_M"] = in_ball(Tx, M)
                witness["witness_in_unit_ball"] = in_ball(x, 1.0)
            return Report("transitivity", Verdict.PASS, witness=witness, summary=summary)
    return Report("transitivity", Verdict.UNDETERMINED_AT_HORIZON, summary=summary,
                  notes=["no constructed candidate landed in G and W up to the horizon"])

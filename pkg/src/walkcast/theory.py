"""Closed-form predictions of the broadcast time on K_n, plus tail-bound calculators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

EULER_GAMMA = 0.5772156649015329
_DIRECT_SUM_LIMIT = 10**6


class Case(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"


REGIME_OF = {
    Case.A: "sparse", Case.B: "sparse",
    Case.C: "linear", Case.D: "linear",
    Case.E: "superlinear", Case.F: "superlinear", Case.G: "superlinear",
}


@dataclass(frozen=True)
class RegimePrediction:
    case_label: Case
    estimate: float
    c: float
    lower: float | None = None
    upper: float | None = None
    x: float | None = None
    i: int | None = None
    values: tuple[int, ...] = field(default=())
    ratio: float | None = None
    note: str = ""

    @property
    def regime(self) -> str:
        return REGIME_OF[self.case_label]

    def as_dict(self) -> dict:
        d = {
            "case": self.case_label.value,
            "regime": self.regime,
            "estimate": self.estimate,
            "c": self.c,
        }
        for key in ("lower", "upper", "x", "i", "ratio"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.values:
            d["values"] = list(self.values)
        if self.note:
            d["note"] = self.note
        return d


def harmonic(m: int) -> float:
    if m < 0:
        raise ValueError(f"harmonic number needs m >= 0, got {m}")
    if m <= _DIRECT_SUM_LIMIT:
        return math.fsum(1.0 / i for i in range(1, m + 1))
    return math.log(m) + EULER_GAMMA + 1.0 / (2 * m)


def _near_int(v: float, tol=1e-9):
    r = round(v)
    return r if abs(v - r) <= tol * max(1.0, abs(v)) else None


def classify_and_predict(n: int, k: int, c_low: float = 0.05, omega: float | None = None,
                         interval_max_k: int = 64) -> RegimePrediction:
    """Pick the asymptotic case that a finite ``(n, k)`` falls in and evaluate it.

    Cut-offs: ``k <= c_low * n`` is sparse, ``k <= n ln^2 n`` is linear,
    anything larger is superlinear. ``omega`` (default ``ln n``) widens the
    case A interval, which is only reported for ``k <= interval_max_k``.
    """
    if n < 3:
        raise ValueError(f"n must be >= 3, got {n}")
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if c_low <= 0:
        raise ValueError(f"c_low must be positive, got {c_low}")
    ln_n = math.log(n)
    if omega is None:
        omega = ln_n
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    c = k / n

    if k <= c_low * n:
        est = 2 * n * harmonic(k - 1) / k
        if k <= interval_max_k:
            base = n * math.log(k) / k
            return RegimePrediction(Case.A, est, c, lower=base / omega, upper=omega * base)
        return RegimePrediction(Case.B, est, c)

    if k <= n * ln_n**2:
        est = (1 / c + 1 / math.log1p(c)) * ln_n
        return RegimePrediction(Case.C if c <= ln_n else Case.D, est, c)

    x = math.log(c) / ln_n
    inv = 1 / x
    i = _near_int(inv)
    if i is not None:
        ratio = c**i / (n * ln_n)
        if ratio > 1:
            return RegimePrediction(Case.G, float(i), c, lower=i, upper=i, x=x, i=i,
                                    values=(i,), ratio=ratio,
                                    note="(k/n)^i > n ln n => i a.a.s.")
        return RegimePrediction(Case.G, float(i + 1), c, lower=i, upper=i + 1, x=x, i=i,
                                values=(i, i + 1), ratio=ratio,
                                note="(k/n)^i < (1-eps) n ln n => i+1 a.a.s.; "
                                     "within (1 +- eps) either value")
    if x > 0.5:
        return RegimePrediction(Case.F, 2.0, c, x=x, i=2)
    i = math.ceil(inv)
    return RegimePrediction(Case.E, float(i), c, x=x, i=i)


def chernoff_tail(eps: float, mean: float) -> float:
    """Bound on P(|X - EX| >= eps EX) for a sum of independent Bernoullis."""
    if not 0 < eps < 1.5:
        raise ValueError(f"Chernoff bound needs 0 < eps < 3/2, got {eps}")
    if mean < 0:
        raise ValueError(f"mean must be >= 0, got {mean}")
    return 2 * math.exp(-eps * eps * mean / 3)


def janson_geom_tail(lam: float, p_star: float, mean: float) -> float:
    """Tail bound for a sum of independent geometrics with min success prob ``p_star``.

    For ``lam >= 1`` bounds P(X >= lam EX); for ``lam <= 1`` bounds P(X <= lam EX).
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if not 0 < p_star <= 1:
        raise ValueError(f"p_star must be in (0, 1], got {p_star}")
    if mean <= 0:
        raise ValueError(f"mean must be positive, got {mean}")
    return math.exp(-p_star * mean * (lam - 1 - math.log(lam)))


def chebyshev_tail(eps: float, mean: float, variance: float) -> float:
    if eps <= 0 or mean <= 0:
        raise ValueError("Chebyshev bound needs eps > 0 and mean > 0")
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    return min(1.0, variance / (eps * mean) ** 2)

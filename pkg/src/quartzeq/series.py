"""Certified evaluation of the equilibrium cohort series.

At an equilibrium with free-dust level x > 0 and supply r, the cohort
sizes are

    M_i = r x^i / (k_i * prod_{j=0..i} (x + d_j)),

equivalently k_i M_i = r/(x+d_0) * Q_i with Q_i = prod_{j=1..i} x/(x+d_j).
Every series evaluated here is a nonnegative weighted sum of the Q_i:

    sum_kM  : weight 1            (total uptake flux / x)
    sum_iqM : weight i q_i / k_i  (dust re-released by death)
    H       : weight i rho_i      (drives the equilibrium function)

and the equilibrium function itself is F(x) = H(x) / (x + d_0).

Truncation control: past an index n where the certified step-ratio bound
    s_n = [sup_{i>=n} w_{i+1}/w_i] * x / (x + inf_{i>n} d_i)
drops below 1, the tail is at most t_n * s_n / (1 - s_n).  Reported
tail bounds add a standard floating-point envelope on top of the
truncation bound, so the interval [value - pad, value + tail_bound]
honestly covers the exact sum.  All functions are pure.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .accumulate import NeumaierSum
from .coefficients import CoefficientFamily
from .errors import ConsistencyError, ConvergenceError, DomainError

__all__ = [
    "BoundedValue",
    "EquilibriumProfile",
    "GridSpec",
    "GridRow",
    "sum_kM",
    "sum_iqM",
    "H_series",
    "F_equilibrium",
    "cohort_profile",
    "audit_G_identity",
    "audit_d_identity",
    "tail_product",
    "grid_evaluate",
]

DEFAULT_TOL = 1e-12
DEFAULT_TERM_CAP = 10**6

_EPS = sys.float_info.epsilon
_UNDERFLOW_FLOOR = 2.3e-308  # just above the smallest normal double


@dataclass(frozen=True)
class BoundedValue:
    """A numeric result with a one-sided certified error bound.

    The exact quantity lies in [value - fp_pad, value + tail_bound] where
    fp_pad is a few ulps of the reported value; tail_bound covers both the
    omitted series tail and the rounding envelope of the computed part.
    """

    value: float
    tail_bound: float
    terms_used: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"non-finite series value {self.value}")
        if not (self.tail_bound >= 0.0):
            raise DomainError(f"negative tail bound {self.tail_bound}")


@dataclass(frozen=True)
class EquilibriumProfile:
    """Truncated equilibrium cohort profile M_0..M_n plus a mass tail bound."""

    x: float
    r: float
    M: np.ndarray
    tail_mass_bound: float
    requested_n: int

    @property
    def n(self) -> int:
        return len(self.M) - 1


class _Partial(NamedTuple):
    total: float
    trunc_tail: float
    terms: int
    abs_sum: float
    max_index: int


def _weight_values(fam: CoefficientFamily, which: str, idx: np.ndarray) -> np.ndarray:
    if which == "ones":
        return np.ones(idx.shape)
    if which == "iq":
        return idx * fam.g_values(idx)
    if which == "irho":
        return idx * fam.rho_values(idx)
    raise ValueError(which)


def _weight_ratio_sup(fam: CoefficientFamily, which: str, n: int) -> float:
    if which == "ones":
        return 1.0
    if which == "iq":
        return fam.iq_ratio_sup(n)
    if which == "irho":
        return fam.irho_ratio_sup(n)
    raise ValueError(which)


def _q_weighted_sum(fam, x, which, tol, term_cap, series_name) -> _Partial:
    """sum_{i>=1} w_i Q_i with a certified truncation bound <= tol."""
    acc = NeumaierSum()
    abs_sum = 0.0
    q_run = 1.0
    n = 0
    block = 64
    while n < term_cap:
        hi = min(n + block, term_cap)
        idx = np.arange(n + 1, hi + 1)
        qvals = q_run * np.cumprod(x / (x + fam.d_values(idx)))
        terms = _weight_values(fam, which, idx) * qvals
        acc.add(float(np.sum(terms)))
        abs_sum += float(np.sum(terms))  # terms are nonnegative
        q_run = float(qvals[-1])
        n = hi
        last = float(terms[-1])
        sup = _weight_ratio_sup(fam, which, n)
        if sup == 0.0:
            # every later weight vanishes: truncation is exact
            return _Partial(acc.value, 0.0, n, abs_sum, n)
        if math.isfinite(sup):
            step = sup * x / (x + fam.d_inf_beyond(n))
            if step < 1.0:
                if q_run < _UNDERFLOW_FLOOR:
                    # Q underflowed; the true tail is below any usable tol
                    return _Partial(acc.value, 0.0, n, abs_sum, n)
                tail = last * step / (1.0 - step)
                if tail <= tol:
                    return _Partial(acc.value, tail, n, abs_sum, n)
        block = min(block * 2, 8192)
    raise ConvergenceError(
        f"{series_name} did not reach tol={tol} within {term_cap} terms at x={x}",
        series=series_name, x=x, terms_used=term_cap,
    )


def _fp_envelope(partial: _Partial, prefactor: float = 1.0) -> float:
    # covers cumulative product drift (linear in index, worst case) plus
    # block-pairwise summation error
    scaled_abs = partial.abs_sum * abs(prefactor)
    return _EPS * scaled_abs * (2.0 * partial.max_index + 64.0)


def _check_x(x: float) -> None:
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"x must be finite and >= 0, got {x}")


def _check_r(r: float) -> None:
    if not (math.isfinite(r) and r > 0.0):
        raise DomainError(f"r must be finite and positive, got {r}")


def sum_kM(fam: CoefficientFamily, x: float, r: float = 1.0, *,
           tol: float = DEFAULT_TOL, term_cap: int = DEFAULT_TERM_CAP) -> BoundedValue:
    """sum_i k_i M_i at the equilibrium profile."""
    _check_x(x)
    _check_r(r)
    d0 = fam.d(0)
    if x == 0.0:
        return BoundedValue(r * fam.k(0) / (fam.p(0) + fam.q(0)), 0.0, 1)
    pref = r / (x + d0)
    core_tol = tol / pref if pref > 0 else tol
    part = _q_weighted_sum(fam, x, "ones", core_tol, term_cap, "sum_kM")
    value = pref * (1.0 + part.total)
    tail = pref * part.trunc_tail + _fp_envelope(part, pref) + 4.0 * _EPS * abs(value)
    return BoundedValue(value, tail, part.terms + 1)


def sum_iqM(fam: CoefficientFamily, x: float, r: float = 1.0, *,
            tol: float = DEFAULT_TOL, term_cap: int = DEFAULT_TERM_CAP) -> BoundedValue:
    """sum_i i q_i M_i at the equilibrium profile (dust re-release rate)."""
    _check_x(x)
    _check_r(r)
    if x == 0.0:
        return BoundedValue(0.0, 0.0, 1)
    pref = r / (x + fam.d(0))
    core_tol = tol / pref if pref > 0 else tol
    part = _q_weighted_sum(fam, x, "iq", core_tol, term_cap, "sum_iqM")
    value = pref * part.total
    tail = pref * part.trunc_tail + _fp_envelope(part, pref) + 4.0 * _EPS * abs(value)
    return BoundedValue(value, tail, part.terms)


def H_series(fam: CoefficientFamily, x: float, *,
             tol: float = DEFAULT_TOL, term_cap: int = DEFAULT_TERM_CAP) -> BoundedValue:
    """H(x) = sum_{i>=1} i rho_i prod_{j<=i} x/(x+d_j)."""
    _check_x(x)
    if x == 0.0:
        return BoundedValue(0.0, 0.0, 0)
    part = _q_weighted_sum(fam, x, "irho", tol, term_cap, "H_series")
    value = part.total
    tail = part.trunc_tail + _fp_envelope(part) + 4.0 * _EPS * abs(value)
    return BoundedValue(value, tail, part.terms)


def F_equilibrium(fam: CoefficientFamily, x: float, *,
                  tol: float = DEFAULT_TOL, term_cap: int = DEFAULT_TERM_CAP,
                  cross_check: bool = True) -> BoundedValue:
    """Equilibrium function F(x) = H(x) / (x + d_0).

    An equilibrium with dust inflow alpha and cell supply r exists at x
    iff F(x) = alpha/r.  Evaluated through the all-nonnegative H form;
    with cross_check the flux form x*sum_kM - sum_iqM (with r = 1) must
    agree within the combined certified bounds or ConsistencyError is
    raised.
    """
    _check_x(x)
    if x == 0.0:
        return BoundedValue(0.0, 0.0, 0)
    h = H_series(fam, x, tol=tol, term_cap=term_cap)
    denom = x + fam.d(0)
    value = h.value / denom
    tail = h.tail_bound / denom + 4.0 * _EPS * abs(value)
    result = BoundedValue(value, tail, h.terms_used)
    if cross_check:
        skm = sum_kM(fam, x, 1.0, tol=tol, term_cap=term_cap)
        siqm = sum_iqM(fam, x, 1.0, tol=tol, term_cap=term_cap)
        flux = x * skm.value - siqm.value
        budget = (
            tail
            + x * skm.tail_bound
            + siqm.tail_bound
            + 64.0 * _EPS * (abs(x * skm.value) + abs(siqm.value) + abs(value))
            + 1e-300
        )
        if abs(flux - value) > budget:
            raise ConsistencyError(
                f"equilibrium-function routes disagree at x={x}: "
                f"H-form {value!r} vs flux form {flux!r}, budget {budget!r}"
            )
    return result


def cohort_profile(fam: CoefficientFamily, x: float, r: float, n: int) -> EquilibriumProfile:
    """Equilibrium cohorts M_0..M_n by the stable forward recursion.

    M_0 = r / (k_0 x + p_0 + q_0), then
    M_i = M_{i-1} * k_{i-1} x / (k_i x + p_i + q_i).  Indices whose value
    underflows below the normal range are truncated and folded into
    tail_mass_bound.
    """
    _check_x(x)
    _check_r(r)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    denom0 = fam.k(0) * x + fam.p(0) + fam.q(0)
    if denom0 <= 0.0:
        raise DomainError("k_0 x + p_0 + q_0 must be positive")
    m = [r / denom0]
    if x > 0.0:
        for i in range(1, n + 1):
            num = fam.k(i - 1) * x * m[-1]
            den = fam.k(i) * x + fam.p(i) + fam.q(i)
            mi = num / den
            if mi < _UNDERFLOW_FLOOR:
                break
            m.append(mi)
    arr = np.array(m)
    n_kept = len(m) - 1
    last = m[-1]
    if x == 0.0:
        tail = 0.0
    else:
        s = fam.m_ratio_sup(n_kept) * x / (x + fam.d_inf_beyond(n_kept))
        tail = last * s / (1.0 - s) if s < 1.0 else math.inf
    return EquilibriumProfile(x=x, r=r, M=arr, tail_mass_bound=tail, requested_n=n)


def tail_product(fam: CoefficientFamily, x: float, n: int) -> float:
    """Q_n = prod_{j=1..n} x / (x + d_j); may underflow to 0 for large n."""
    _check_x(x)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    q = 1.0
    lo = 1
    while lo <= n:
        hi = min(lo + 8191, n)
        idx = np.arange(lo, hi + 1)
        q *= float(np.prod(x / (x + fam.d_values(idx))))
        lo = hi + 1
    return q


def _audit_terms(fam, x, n_terms, weight_fn) -> tuple[float, float]:
    """(compensated partial sum of weight(i)*Q_i over i<=n, final Q_n)."""
    terms = []
    q_run = 1.0
    lo = 1
    while lo <= n_terms:
        hi = min(lo + 8191, n_terms)
        idx = np.arange(lo, hi + 1)
        qvals = q_run * np.cumprod(x / (x + fam.d_values(idx)))
        terms.extend((weight_fn(idx) * qvals).tolist())
        q_run = float(qvals[-1])
        lo = hi + 1
    return math.fsum(terms), q_run


def audit_G_identity(fam: CoefficientFamily, x: float, n_terms: int) -> tuple[float, float]:
    """Check the telescoping identity 1 - S_n = (n+1) Q_n.

    S_n = (1/x) sum_{i<=n} (i d_i - x) prod_{j<=i} x/(x+d_j).  Returns
    (S_n, |1 - S_n - (n+1) Q_n|).  At x = 0 every term vanishes and the
    identity is trivially satisfied, so (0, 0) is returned.
    """
    _check_x(x)
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    if x == 0.0:
        return 0.0, 0.0
    s, q_n = _audit_terms(
        fam, x, n_terms, lambda idx: (idx * fam.d_values(idx) - x) / x
    )
    a_n = (n_terms + 1) * q_n
    return s, abs(1.0 - s - a_n)


def audit_d_identity(fam: CoefficientFamily, x: float, n_terms: int) -> tuple[float, float]:
    """Check sum_{i<=n} d_i prod_{j<=i} x/(x+d_j) = x - x Q_n.

    Returns (partial_sum, |partial_sum + x Q_n - x|); (0, 0) at x = 0.
    """
    _check_x(x)
    if n_terms < 1:
        raise DomainError(f"n_terms must be >= 1, got {n_terms}")
    if x == 0.0:
        return 0.0, 0.0
    s, q_n = _audit_terms(fam, x, n_terms, lambda idx: fam.d_values(idx))
    b_n = x * q_n
    return s, abs(s + b_n - x)


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid {x_min, x_max, count, spacing: linear|log}."""

    x_min: float
    x_max: float
    count: int
    spacing: str = "log"

    def __post_init__(self):
        if self.spacing not in ("linear", "log"):
            raise DomainError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise DomainError("grid endpoints must be finite")
        if self.x_max < self.x_min:
            raise DomainError("x_max must be >= x_min")
        if self.count < 1:
            raise DomainError(f"count must be >= 1, got {self.count}")
        if self.spacing == "log" and self.x_min <= 0.0:
            raise DomainError("log spacing requires x_min > 0")
        if self.x_min < 0.0:
            raise DomainError("x_min must be >= 0")

    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.x_min])
        if self.spacing == "linear":
            return np.linspace(self.x_min, self.x_max, self.count)
        return np.geomspace(self.x_min, self.x_max, self.count)


class GridRow(NamedTuple):
    x: float
    value: float
    tail_bound: float
    terms_used: int


_QUANTITIES = {
    "F": lambda fam, x, r, tol, cap: F_equilibrium(fam, x, tol=tol, term_cap=cap),
    "H": lambda fam, x, r, tol, cap: H_series(fam, x, tol=tol, term_cap=cap),
    "kM": lambda fam, x, r, tol, cap: sum_kM(fam, x, r, tol=tol, term_cap=cap),
    "iqM": lambda fam, x, r, tol, cap: sum_iqM(fam, x, r, tol=tol, term_cap=cap),
}


def grid_evaluate(fam: CoefficientFamily, quantity: str, grid: GridSpec,
                  r: float = 1.0, *, tol: float = DEFAULT_TOL,
                  term_cap: int = DEFAULT_TERM_CAP) -> Iterator[GridRow]:
    """Evaluate one series quantity over a grid, yielding CSV-ready rows."""
    if quantity not in _QUANTITIES:
        raise DomainError(
            f"unknown quantity {quantity!r}; expected one of {sorted(_QUANTITIES)}"
        )
    evaluate = _QUANTITIES[quantity]
    for x in grid.points():
        bv = evaluate(fam, float(x), r, tol, term_cap)
        yield GridRow(float(x), bv.value, bv.tail_bound, bv.terms_used)

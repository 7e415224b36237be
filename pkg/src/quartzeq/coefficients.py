"""Rate-coefficient families for the cohort model.

A family supplies, for each cohort index i >= 0, the uptake rate k_i > 0, the
removal-with-load rate p_i >= 0 and the death-with-release rate q_i >= 0.
Derived quantities used throughout the package:

    d_i   = (p_i + q_i) / k_i        (per-cohort decay-to-uptake ratio)
    rho_i = p_i / k_i
    g_i   = q_i / k_i
    z     = inf_i d_i  > 0           (standing hypothesis)

The three concrete families are

* ``PiecewiseConstantFamily(k, N)``: k_i = k, p_i = 1 for i <= N else 0,
  q_i = 0 for i <= N else 1, so d_i = 1/k identically.
* ``PowerLawFamily(p_exp, q_exp, k_exp, ...)``: for i >= 1,
  k_i = i^-k_exp, p_i = i^-p_exp, q_i = i^q_exp, giving d_i = i^a + i^b
  with a = q_exp + k_exp and b = k_exp - p_exp (note b <= a always).
* ``TabulatedFamily(k, p, q)``: explicit leading entries, constant
  extension beyond the stored range.

Families are immutable and safe to share across threads.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError

__all__ = [
    "CoefficientFamily",
    "PiecewiseConstantFamily",
    "PowerLawFamily",
    "TabulatedFamily",
    "family_from_config",
    "load_family",
    "infimum_d",
    "ratio_bound",
]


class CoefficientFamily:
    """Shared interface; concrete families implement the per-kind pieces."""

    kind = "abstract"

    # -- scalar accessors -------------------------------------------------

    def k(self, i: int) -> float:
        raise NotImplementedError

    def p(self, i: int) -> float:
        raise NotImplementedError

    def q(self, i: int) -> float:
        raise NotImplementedError

    def d(self, i: int) -> float:
        """(p_i + q_i) / k_i, in the per-kind exact form where one exists."""
        return (self.p(i) + self.q(i)) / self.k(i)

    def rho(self, i: int) -> float:
        return self.p(i) / self.k(i)

    def g(self, i: int) -> float:
        return self.q(i) / self.k(i)

    # -- vectorised accessors over index arrays (i >= 1) ------------------

    def d_values(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def g_values(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def rho_values(self, idx: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- tail-certification hooks -----------------------------------------

    @cached_property
    def z(self) -> float:
        """inf_{i>=0} d_i; positive for every valid family."""
        value = self._infimum_d()
        if not value > 0.0:
            raise DomainError(f"infimum of d is {value}; z > 0 is required")
        return value

    def _infimum_d(self) -> float:
        raise NotImplementedError

    def d_inf_beyond(self, n: int) -> float:
        """inf of d_i over i > n (i >= 1); used for certified step ratios."""
        raise NotImplementedError

    def iq_ratio_sup(self, n: int) -> float:
        """sup over i >= n of w_{i+1}/w_i for w_i = i * g_i.

        Returns math.inf while the weight may still jump from zero to a
        positive value, and 0.0 once every later weight vanishes.
        """
        raise NotImplementedError

    def irho_ratio_sup(self, n: int) -> float:
        """Same contract as iq_ratio_sup for w_i = i * rho_i."""
        raise NotImplementedError

    def m_ratio_sup(self, n: int) -> float:
        """sup over i >= n of k_i / k_{i+1} (cohort-profile tail factor)."""
        raise NotImplementedError

    def describe(self) -> dict:
        """Config-style mapping that reconstructs the family."""
        raise NotImplementedError


@dataclass(frozen=True)
class PiecewiseConstantFamily(CoefficientFamily):
    """k_i = k; removal only up to load N, death with release beyond."""

    k_value: float
    N: int

    kind = "piecewise_constant"

    def __post_init__(self):
        if not (math.isfinite(self.k_value) and self.k_value > 0.0):
            raise DomainError(f"k must be finite and positive, got {self.k_value}")
        if not (isinstance(self.N, int) and self.N >= 0):
            raise DomainError(f"N must be an integer >= 0, got {self.N!r}")

    def k(self, i):
        return self.k_value

    def p(self, i):
        return 1.0 if i <= self.N else 0.0

    def q(self, i):
        return 0.0 if i <= self.N else 1.0

    def d(self, i):
        return 1.0 / self.k_value

    def rho(self, i):
        return 1.0 / self.k_value if i <= self.N else 0.0

    def g(self, i):
        return 0.0 if i <= self.N else 1.0 / self.k_value

    def d_values(self, idx):
        return np.full(idx.shape, 1.0 / self.k_value)

    def g_values(self, idx):
        return np.where(idx <= self.N, 0.0, 1.0 / self.k_value)

    def rho_values(self, idx):
        return np.where(idx <= self.N, 1.0 / self.k_value, 0.0)

    def _infimum_d(self):
        return 1.0 / self.k_value

    def d_inf_beyond(self, n):
        return 1.0 / self.k_value

    def iq_ratio_sup(self, n):
        if n <= self.N:
            return math.inf
        return (n + 1.0) / n

    def irho_ratio_sup(self, n):
        if n >= self.N:
            return 0.0
        return (n + 1.0) / n

    def m_ratio_sup(self, n):
        return 1.0

    def describe(self):
        return {"kind": self.kind, "k": self.k_value, "N": self.N}


def _power_law_inf_from(a: float, b: float, m: int) -> float:
    """inf over integer i >= m of i^a + i^b, by monotonicity analysis."""
    if b >= 0.0:
        # both exponents nonnegative: nondecreasing in i
        return float(m) ** a + float(m) ** b
    if a == 0.0:
        # 1 + i^b strictly decreasing; infimum is the limit
        return 1.0
    # interior minimum of t^a + t^b at t* = (-b/a)^(1/(a-b))
    t_star = (-b / a) ** (1.0 / (a - b))
    if t_star <= m:
        return float(m) ** a + float(m) ** b
    candidates = {m, int(math.floor(t_star)), int(math.ceil(t_star))}
    return min(float(c) ** a + float(c) ** b for c in candidates if c >= m)


@dataclass(frozen=True)
class PowerLawFamily(CoefficientFamily):
    """k_i = i^-k_exp, p_i = i^-p_exp, q_i = i^q_exp for i >= 1.

    Index 0 is set by (k0, p0, q0); the defaults keep d_0 = 1.
    """

    p_exp: float
    q_exp: float
    k_exp: float
    p0: float = 1.0
    q0: float = 0.0
    k0: float = 1.0

    kind = "power_law"

    def __post_init__(self):
        for name in ("p_exp", "q_exp", "k_exp"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
        if not (math.isfinite(self.k0) and self.k0 > 0.0):
            raise DomainError(f"k0 must be positive, got {self.k0}")
        if self.p0 < 0.0 or self.q0 < 0.0:
            raise DomainError("p0 and q0 must be nonnegative")
        if self.p0 + self.q0 <= 0.0:
            raise DomainError("p0 + q0 must be positive (d_0 > 0 required)")

    @property
    def a(self) -> float:
        return self.q_exp + self.k_exp

    @property
    def b(self) -> float:
        return self.k_exp - self.p_exp

    @classmethod
    def from_ab(cls, a: float, b: float, **index0) -> "PowerLawFamily":
        """Family with d_i = i^a + i^b and rho_i = i^b.

        Requires a >= 0 and b <= a (forced by nonnegative exponents).
        """
        if not (math.isfinite(a) and a >= 0.0):
            raise DomainError(f"a must be finite and >= 0, got {a}")
        if not (math.isfinite(b) and b <= a):
            raise DomainError(f"b must satisfy b <= a, got a={a}, b={b}")
        k_exp = max(b, 0.0)
        return cls(p_exp=k_exp - b, q_exp=a - k_exp, k_exp=k_exp, **index0)

    def k(self, i):
        return self.k0 if i == 0 else float(i) ** (-self.k_exp)

    def p(self, i):
        return self.p0 if i == 0 else float(i) ** (-self.p_exp)

    def q(self, i):
        return self.q0 if i == 0 else float(i) ** self.q_exp

    def d(self, i):
        if i == 0:
            return (self.p0 + self.q0) / self.k0
        fi = float(i)
        return fi ** self.a + fi ** self.b

    def rho(self, i):
        return self.p0 / self.k0 if i == 0 else float(i) ** self.b

    def g(self, i):
        return self.q0 / self.k0 if i == 0 else float(i) ** self.a

    def d_values(self, idx):
        fi = idx.astype(float)
        return fi ** self.a + fi ** self.b

    def g_values(self, idx):
        return idx.astype(float) ** self.a

    def rho_values(self, idx):
        return idx.astype(float) ** self.b

    def _infimum_d(self):
        d0 = (self.p0 + self.q0) / self.k0
        return min(d0, _power_law_inf_from(self.a, self.b, 1))

    def d_inf_beyond(self, n):
        return _power_law_inf_from(self.a, self.b, max(n + 1, 1))

    def iq_ratio_sup(self, n):
        # w_i = i^(1+a); the step factor decreases toward 1
        return ((n + 1.0) / n) ** (1.0 + self.a)

    def irho_ratio_sup(self, n):
        s = 1.0 + self.b
        if s <= 0.0:
            return 1.0
        return ((n + 1.0) / n) ** s

    def m_ratio_sup(self, n):
        if n == 0:
            return max(self.k0, 2.0 ** self.k_exp)
        return ((n + 1.0) / n) ** self.k_exp

    def describe(self):
        return {
            "kind": self.kind,
            "p_exp": self.p_exp,
            "q_exp": self.q_exp,
            "k_exp": self.k_exp,
            "p0": self.p0,
            "q0": self.q0,
            "k0": self.k0,
        }


class TabulatedFamily(CoefficientFamily):
    """Explicit (k_i, p_i, q_i) entries, constant beyond the stored range.

    The constant extension means the tail of d and rho (and g) equals the
    last stored value; tables therefore cannot represent unboundedly
    growing death rates q_i, and the infimum of d is taken over the stored
    entries (the tail never dips below the last one).
    """

    kind = "tabulated"

    def __init__(self, k, p, q):
        k = tuple(float(v) for v in k)
        p = tuple(float(v) for v in p)
        q = tuple(float(v) for v in q)
        if not (len(k) == len(p) == len(q)) or len(k) == 0:
            raise DomainError("k, p, q must be nonempty arrays of equal length")
        if any(not (math.isfinite(v) and v > 0.0) for v in k):
            raise DomainError("all k entries must be finite and positive")
        if any(v < 0.0 or not math.isfinite(v) for v in p + q):
            raise DomainError("p and q entries must be finite and nonnegative")
        if any(pi + qi <= 0.0 for pi, qi in zip(p, q)):
            raise DomainError("p_i + q_i must be positive for every stored i")
        self._k, self._p, self._q = k, p, q
        self._d = tuple((pi + qi) / ki for ki, pi, qi in zip(k, p, q))
        self._g = tuple(qi / ki for ki, qi in zip(k, q))
        self._rho = tuple(pi / ki for ki, pi in zip(k, p))
        # suffix minima of d, including the constant tail
        suffix = [self._d[-1]] * len(self._d)
        for i in range(len(self._d) - 2, -1, -1):
            suffix[i] = min(self._d[i], suffix[i + 1])
        self._d_suffix_min = tuple(suffix)
        self._d_arr = np.array(self._d)
        self._g_arr = np.array(self._g)
        self._rho_arr = np.array(self._rho)
        for name, arr in (("k", k), ("p", p)):
            if any(arr[i + 1] > arr[i] * (1.0 + 1e-12) for i in range(len(arr) - 1)):
                warnings.warn(
                    f"tabulated {name} is not non-increasing; downstream "
                    "monotonicity-based arguments may not apply",
                    stacklevel=2,
                )

    def __repr__(self):
        return f"TabulatedFamily(len={len(self._k)})"

    def _at(self, seq, i):
        return seq[i] if i < len(seq) else seq[-1]

    def k(self, i):
        return self._at(self._k, i)

    def p(self, i):
        return self._at(self._p, i)

    def q(self, i):
        return self._at(self._q, i)

    def d(self, i):
        return self._at(self._d, i)

    def rho(self, i):
        return self._at(self._rho, i)

    def g(self, i):
        return self._at(self._g, i)

    def _clipped(self, idx):
        return np.minimum(idx, len(self._d) - 1)

    def d_values(self, idx):
        return self._d_arr[self._clipped(idx)]

    def g_values(self, idx):
        return self._g_arr[self._clipped(idx)]

    def rho_values(self, idx):
        return self._rho_arr[self._clipped(idx)]

    def _infimum_d(self):
        return min(self._d)

    def d_inf_beyond(self, n):
        j = min(n + 1, len(self._d) - 1)
        return self._d_suffix_min[j]

    def _weight_ratio_sup(self, values, n):
        """sup over i >= n of ((i+1) v_{i+1}) / (i v_i) with constant tail."""
        L = len(values)
        tail_start = max(n, L - 1)
        if values[-1] > 0.0:
            sup = (tail_start + 1.0) / tail_start
        else:
            sup = 0.0
        for i in range(max(n, 1), L - 1):
            wi = i * values[i]
            wj = (i + 1) * values[i + 1]
            if wi == 0.0:
                if wj > 0.0:
                    return math.inf
                continue
            sup = max(sup, wj / wi)
        if sup == 0.0 and any(values[i] > 0.0 for i in range(min(n + 1, L), L)):
            # a zero tail value but positive stored entries beyond n
            return math.inf
        return sup

    def iq_ratio_sup(self, n):
        return self._weight_ratio_sup(self._g, n)

    def irho_ratio_sup(self, n):
        return self._weight_ratio_sup(self._rho, n)

    def m_ratio_sup(self, n):
        L = len(self._k)
        sup = 1.0
        for i in range(n, L - 1):
            sup = max(sup, self._k[i] / self._k[i + 1])
        return sup

    def describe(self):
        return {
            "kind": self.kind,
            "k": list(self._k),
            "p": list(self._p),
            "q": list(self._q),
            "tail": "constant",
        }


_REQUIRED_KEYS = {
    "piecewise_constant": {"k", "N"},
    "power_law": {"p_exp", "q_exp", "k_exp"},
    "tabulated": {"k", "p", "q"},
}


def family_from_config(config: dict) -> CoefficientFamily:
    """Build a family from a key-value document.

    Schema (also documented in the README):

    * ``{"kind": "piecewise_constant", "k": float, "N": int}``
    * ``{"kind": "power_law", "p_exp": f, "q_exp": f, "k_exp": f,
       "p0": f=1, "q0": f=0, "k0": f=1}``
    * ``{"kind": "tabulated", "k": [...], "p": [...], "q": [...],
       "tail": "constant"}``
    """
    if not isinstance(config, dict):
        raise DomainError(f"family config must be a mapping, got {type(config).__name__}")
    kind = config.get("kind")
    if kind not in _REQUIRED_KEYS:
        raise DomainError(
            f"unknown family kind {kind!r}; expected one of {sorted(_REQUIRED_KEYS)}"
        )
    missing = _REQUIRED_KEYS[kind] - config.keys()
    if missing:
        raise DomainError(f"family config for {kind!r} is missing keys {sorted(missing)}")
    if kind == "piecewise_constant":
        N = config["N"]
        if isinstance(N, float):
            if not N.is_integer():
                raise DomainError(f"N must be an integer, got {N}")
            N = int(N)
        return PiecewiseConstantFamily(k_value=float(config["k"]), N=N)
    if kind == "power_law":
        kwargs = {key: float(config[key]) for key in ("p_exp", "q_exp", "k_exp")}
        for key in ("p0", "q0", "k0"):
            if key in config:
                kwargs[key] = float(config[key])
        return PowerLawFamily(**kwargs)
    tail = config.get("tail", "constant")
    if tail != "constant":
        raise DomainError(f"unsupported tabulated tail policy {tail!r}")
    return TabulatedFamily(k=config["k"], p=config["p"], q=config["q"])


def load_family(path) -> CoefficientFamily:
    """Read a JSON family config from disk."""
    with open(path) as fh:
        return family_from_config(json.load(fh))


def infimum_d(family: CoefficientFamily, probe_limit: int = 1000) -> float:
    """z = inf_i d_i, exact by per-kind analysis.

    probe_limit caps the defensive numeric sweep that cross-checks the
    analytic value (cheap; it has caught sign mistakes in development).
    """
    if probe_limit < 1:
        raise DomainError(f"probe_limit must be >= 1, got {probe_limit}")
    z = family.z
    n_probe = min(probe_limit, 512)
    probed = min(family.d(i) for i in range(0, n_probe + 1))
    if probed < z * (1.0 - 1e-12):
        raise AssertionError(
            f"analytic infimum {z} exceeds probed minimum {probed}"
        )
    return z


def ratio_bound(family: CoefficientFamily, x: float) -> float:
    """Uniform geometric ratio x / (x + z) < 1 for the equilibrium series."""
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"x must be finite and >= 0, got {x}")
    return x / (x + family.z)

"""Large-x behavior of the cohort series and their exponential-sum kernels.

Two model sums dominate the analysis:

    R_{a,A}(v) = sum_{i>=1} i^A exp(-v i^{a+1})        as v -> 0+
    K_{a,b}(x) = sum_{i>=1} i^{b+1} prod_{j<=i} x/(x+j^a)   as x -> oo

K controls the equilibrium function of power-law families: with
d_j = j^a + j^b the series H(x) is sandwiched between K(x/2) and K(x),
so the growth exponent of K decides whether equilibria exist for every
inflow or only below a threshold.

R has a complete expansion in powers of v (Mellin residues): a leading
v^{-theta} with theta = (A+1)/(a+1), plus zeta-value corrections; when
theta collides with a nonpositive integer the two residues merge into a
log(1/v) term.  K is expanded by writing the product as
exp(-v i^{a+1} - W_i) with v = 1/((a+1)x), expanding exp(-W_i) into
monomials i^A / x^B by exact Euler-Maclaurin bookkeeping, and feeding
each monomial back through the R expansion.  The refined K expansion is
hand-validated through depth 4 at a = 1, where it reproduces

    K_{1,-1}(x) = sqrt(pi/2) sqrt(x) - 2/3 + sqrt(2 pi)/24 x^{-1/2} + O(1/x).

Also here: exact/asymptotic power sums sum_{i<=n} i^a, the closed form
for H at (a,b) = (1,0), and fitted super-polynomial envelopes for the
mass sitting beyond the cutoff index x^{3/(3a+2)}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, ConvergenceError, DomainError
from .series import BoundedValue
from .special import DEFAULT_TABLE, EULER_GAMMA

__all__ = [
    "ExpansionTerm",
    "AsymptoticExpansion",
    "R_sum_direct",
    "R_expansion",
    "power_sum",
    "K_direct",
    "H_direct",
    "K_leading_asymptotics",
    "K_expansion_refined",
    "h10_closed_form",
    "cutoff_index",
    "tail_beyond_cutoff",
    "relative_tail_beyond_cutoff",
    "TailEnvelope",
    "fit_tail_envelope",
    "tail_cutoff_check",
]

_MAX_REFINED_DEPTH = 4  # coefficient bookkeeping hand-validated through here


@dataclass(frozen=True)
class ExpansionTerm:
    """coefficient * t^power * L^log_power, L = log t or log(1/t)."""

    coefficient: float
    power: float
    log_power: int = 0


@dataclass(frozen=True)
class AsymptoticExpansion:
    """A truncated expansion in x -> oo (L = log x) or v -> 0 (L = log 1/v).

    remainder_power is the growth order of the first omitted correction;
    the coefficient of that order may vanish, so it is an upper bound on
    the error order, not an estimate of its size.
    """

    variable: str  # "x->oo" | "v->0"
    terms: tuple[ExpansionTerm, ...]
    remainder_power: float

    def __post_init__(self):
        if self.variable not in ("x->oo", "v->0"):
            raise DomainError(f"unknown expansion variable {self.variable!r}")

    def evaluate(self, t: float) -> float:
        if not (math.isfinite(t) and t > 0.0):
            raise DomainError(f"expansion argument must be positive, got {t}")
        log_factor = math.log(t) if self.variable == "x->oo" else math.log(1.0 / t)
        return math.fsum(
            term.coefficient * t**term.power * log_factor**term.log_power
            for term in self.terms
        )

    @property
    def leading(self) -> ExpansionTerm:
        """Dominant term in the expansion's own limit.

        Highest power as x -> oo, lowest as v -> 0; at equal power a log
        factor dominates in both limits.
        """
        if not self.terms:
            raise DomainError("empty expansion has no leading term")
        if self.variable == "x->oo":
            return max(self.terms, key=lambda tm: (tm.power, tm.log_power))
        return max(self.terms, key=lambda tm: (-tm.power, tm.log_power))

    def __str__(self) -> str:
        var = "x" if self.variable == "x->oo" else "v"
        log_sym = "log(x)" if self.variable == "x->oo" else "log(1/v)"
        parts = []
        for tm in sorted(self.terms, key=lambda tm: -tm.power):
            piece = f"{tm.coefficient:+.12g}*{var}^{tm.power:g}"
            if tm.log_power:
                piece += f"*{log_sym}" + (f"^{tm.log_power}" if tm.log_power > 1 else "")
            parts.append(piece)
        parts.append(f"O({var}^{self.remainder_power:g})")
        return " ".join(parts)


def _check_a(a: float) -> None:
    if not (math.isfinite(a) and a >= 0.0):
        raise DomainError(f"a must be finite and >= 0, got {a}")


def R_sum_direct(a: float, A: float, v: float, *,
                 tol: float = 1e-12, term_cap: int = 10**6) -> BoundedValue:
    """sum_{i>=1} i^A exp(-v i^{a+1}) with a certified truncation bound.

    Past index n the term ratio is at most
    ((n+1)/n)^{max(A,0)} * exp(-v (a+1) n^a) (increments of i^{a+1} grow),
    giving a geometric tail bound once that ratio drops below 1.
    """
    _check_a(a)
    if not (math.isfinite(v) and v > 0.0):
        raise DomainError(f"v must be finite and positive, got {v}")
    acc = 0.0
    n = 0
    block = 64
    a_pos = max(A, 0.0)
    while n < term_cap:
        hi = min(n + block, term_cap)
        idx = np.arange(n + 1, hi + 1, dtype=float)
        terms = idx**A * np.exp(-v * idx ** (a + 1.0))
        acc += float(np.sum(terms))
        n = hi
        last = float(terms[-1])
        step = ((n + 1.0) / n) ** a_pos * math.exp(-v * (a + 1.0) * n**a)
        if step < 1.0:
            tail = last * step / (1.0 - step)
            if tail <= tol:
                envelope = 16.0 * np.finfo(float).eps * acc
                return BoundedValue(acc, tail + envelope, n)
        block = min(block * 2, 8192)
    raise ConvergenceError(
        f"R sum did not reach tol={tol} within {term_cap} terms at v={v}",
        series="R_sum", x=v, terms_used=term_cap,
    )


def _pole_order(theta: float, *, tol: float = 1e-12) -> int | None:
    """k0 >= 0 if theta is (numerically) the nonpositive integer -k0."""
    if theta > 0.5:
        return None
    k0 = round(-theta)
    if k0 >= 0 and abs(theta + k0) <= tol:
        return k0
    return None


def R_expansion(a: float, A: float, depth: int) -> AsymptoticExpansion:
    """Small-v expansion of R_{a,A} with depth zeta-correction orders.

    Non-resonant case (theta = (A+1)/(a+1) not a nonpositive integer):

        Gamma(theta)/(a+1) v^{-theta}
          + sum_{k<=depth} (-1)^k/k! zeta(-A - k(a+1)) v^k.

    When theta = -k0 the Gamma pole and the k0-th zeta pole merge into

        (-1)^{k0}/((a+1) k0!) * (log(1/v) + H_{k0} + a*gamma) * v^{k0}.
    """
    _check_a(a)
    if not (isinstance(depth, int) and 0 <= depth <= 12):
        raise DomainError(f"depth must be an integer in 0..12, got {depth}")
    theta = (A + 1.0) / (a + 1.0)
    k0 = _pole_order(theta)
    terms: list[ExpansionTerm] = []
    if k0 is None:
        terms.append(ExpansionTerm(DEFAULT_TABLE.gamma(theta) / (a + 1.0), -theta))
    elif k0 <= depth:
        base = (-1.0) ** k0 / ((a + 1.0) * math.factorial(k0))
        terms.append(ExpansionTerm(base, float(k0), log_power=1))
        terms.append(
            ExpansionTerm(base * (DEFAULT_TABLE.harmonic(k0) + a * EULER_GAMMA), float(k0))
        )
    for k in range(depth + 1):
        if k0 is not None and k == k0:
            continue
        coeff = (-1.0) ** k / math.factorial(k) * DEFAULT_TABLE.zeta(-A - k * (a + 1.0))
        if coeff != 0.0:
            terms.append(ExpansionTerm(coeff, float(k)))
    return AsymptoticExpansion("v->0", tuple(terms), depth + 0.5)


def _falling(a, m: int):
    """a (a-1) ... (a-m+1); exact for int/Fraction a, float otherwise."""
    out = a**0  # 1 of the right type
    for t in range(m):
        out = out * (a - t)
    return out


def power_sum(a, n: int, *, depth: int = 6):
    """sum_{i=1..n} i^a.

    Integer a >= 1: exact (returned as int) via the Bernoulli closed
    form.  Non-integer a > 0: Euler-Maclaurin asymptotic with the
    zeta(-a) constant,

        zeta(-a) + n^{a+1}/(a+1) + n^a/2
        + sum_{k<=depth} B_{2k}/(2k)! * a(a-1)...(a-2k+2) * n^{a-2k+1},

    accurate to O(n^{a-2 depth-1}).
    """
    if not (isinstance(n, int) and n >= 1):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not (isinstance(depth, int) and 0 <= depth <= 25):
        raise DomainError(f"depth must be an integer in 0..25, got {depth}")
    if isinstance(a, int) and not isinstance(a, bool) and a >= 1:
        nf = Fraction(n)
        # zeta(-a) = -B_{a+1}/(a+1); finitely many correction terms
        total = -DEFAULT_TABLE.bernoulli_fraction(a + 1) / (a + 1)
        total += nf ** (a + 1) / (a + 1) + nf**a / Fraction(2)
        k = 1
        while 2 * k - 1 <= a:
            ff = _falling(Fraction(a), 2 * k - 1)
            total += (
                DEFAULT_TABLE.bernoulli_fraction(2 * k)
                / math.factorial(2 * k) * ff * nf ** (a - 2 * k + 1)
            )
            k += 1
        if total.denominator != 1:
            raise ConvergenceError(
                f"exact power sum lost integrality for a={a}, n={n}",
                series="power_sum",
            )
        return int(total)
    a = float(a)
    if not (math.isfinite(a) and a > 0.0):
        raise DomainError(f"a must be positive, got {a}")
    pieces = [
        DEFAULT_TABLE.zeta(-a),
        n ** (a + 1.0) / (a + 1.0),
        0.5 * n**a,
    ]
    for k in range(1, depth + 1):
        ff = _falling(a, 2 * k - 1)
        if ff == 0.0:
            break
        pieces.append(
            float(DEFAULT_TABLE.bernoulli_fraction(2 * k)) / math.factorial(2 * k)
            * ff * n ** (a - 2 * k + 1.0)
        )
    return math.fsum(pieces)


def _check_bx(b: float, x: float) -> None:
    if not math.isfinite(b):
        raise DomainError(f"b must be finite, got {b}")
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"x must be finite and positive, got {x}")


def K_direct(a: float, b: float, x: float, *, tol: float = 1e-12,
             term_cap: int = 10**6, start: int = 0) -> BoundedValue:
    """sum_{i>start} i^{b+1} prod_{j=1..i} x/(x+j^a), certified.

    With start > 0 the product prefix over j <= start is included, so the
    result is the exact tail of K beyond the start index.
    """
    _check_a(a)
    _check_bx(b, x)
    if start < 0:
        raise DomainError(f"start must be >= 0, got {start}")
    q_run = 1.0
    lo = 1
    while lo <= start:
        hi = min(lo + 8191, start)
        idx = np.arange(lo, hi + 1, dtype=float)
        q_run *= float(np.prod(x / (x + idx**a)))
        lo = hi + 1
    acc = 0.0
    n = start
    block = 64
    w_pos = max(b + 1.0, 0.0)
    while n < start + term_cap:
        hi = min(n + block, start + term_cap)
        idx = np.arange(n + 1, hi + 1, dtype=float)
        qvals = q_run * np.cumprod(x / (x + idx**a))
        terms = idx ** (b + 1.0) * qvals
        acc += float(np.sum(terms))
        q_run = float(qvals[-1])
        n = hi
        last = float(terms[-1])
        step = ((n + 1.0) / n) ** w_pos * x / (x + (n + 1.0) ** a)
        if step < 1.0:
            if q_run < 2.3e-308:
                return BoundedValue(acc, 16.0 * np.finfo(float).eps * acc, n - start)
            tail = last * step / (1.0 - step)
            if tail <= tol:
                envelope = np.finfo(float).eps * acc * (2.0 * (n - start) + 64.0)
                return BoundedValue(acc, tail + envelope, n - start)
        block = min(block * 2, 8192)
    raise ConvergenceError(
        f"K sum did not reach tol={tol} within {term_cap} terms at x={x}",
        series="K_direct", x=x, terms_used=term_cap,
    )


def H_direct(a: float, b: float, x: float, *, tol: float = 1e-12,
             term_cap: int = 10**6) -> BoundedValue:
    """sum_{i>=1} i^{b+1} prod_{j<=i} x/(x+j^a+j^b), certified.

    This is the numerator series of the power-law equilibrium function;
    it is sandwiched between K(x/2) and K(x) whenever b <= a.
    """
    from .coefficients import PowerLawFamily
    from .series import H_series

    fam = PowerLawFamily.from_ab(a, b)
    return H_series(fam, x, tol=tol, term_cap=term_cap)


def K_leading_asymptotics(a: float, b: float, *, allow_log: bool = False) -> AsymptoticExpansion:
    """Leading large-x order of K: Gamma(th) (a+1)^{th-1} x^th, th=(b+2)/(a+1).

    Requires b > -2 (positive growth order th > 0).  At b = -2 the order
    degenerates to log x / (a+1); pass allow_log=True to receive that
    single logarithmic term instead of an error.
    """
    _check_a(a)
    if not math.isfinite(b):
        raise DomainError(f"b must be finite, got {b}")
    if b <= -2.0:
        if b == -2.0 and allow_log:
            c = 1.0 / (a + 1.0)
            return AsymptoticExpansion(
                "x->oo",
                (ExpansionTerm(c, 0.0, log_power=1),
                 ExpansionTerm(c * math.log(a + 1.0), 0.0)),
                0.0,
            )
        raise DomainError(
            f"leading order requires b > -2 (got b={b}); "
            "b = -2 has log-order growth, available with allow_log=True"
        )
    theta = (b + 2.0) / (a + 1.0)
    coeff = DEFAULT_TABLE.gamma(theta) * (a + 1.0) ** (theta - 1.0)
    return AsymptoticExpansion(
        "x->oo", (ExpansionTerm(coeff, theta),), max(theta - a / (a + 1.0), 0.0)
    )


def _exact_zeta_neg(m: int) -> Fraction:
    """zeta(-m) for integer m >= 1, exact: -B_{m+1}/(m+1)."""
    return -DEFAULT_TABLE.bernoulli_fraction(m + 1) / (m + 1)


def _build_W(a_frac: Fraction, exact: bool, depth: int) -> dict:
    """Monomials of W_i: {(i_power, x_power): coeff}.

    W_i = sum_{j<=i} log(1 + j^a/x) - i^{a+1}/((a+1)x), expanded through
    x^{-depth} by the log series in j^a/x and Euler-Maclaurin power sums
    (with the zeta constant).  Coefficients are exact Fractions when a is
    an integer.
    """
    W: dict[tuple[Fraction, int], object] = {}

    def add(ipow, xpow, coeff):
        if coeff == 0:
            return
        key = (ipow, xpow)
        W[key] = W.get(key, 0) + coeff

    for ell in range(1, depth + 1):
        sgn = Fraction((-1) ** (ell + 1), ell)
        al = a_frac * ell
        # constant (zeta) part of the power sum
        if exact:
            zc = sgn * _exact_zeta_neg(int(al))
        else:
            zc = float(sgn) * DEFAULT_TABLE.zeta(-float(al))
        add(Fraction(0), ell, zc)
        # i^{al+1}/(al+1); the ell = 1 piece is the split-off v i^{a+1}
        if ell >= 2:
            c = sgn / (al + 1) if exact else float(sgn) / float(al + 1)
            add(al + 1, ell, c)
        # i^{al}/2
        add(al, ell, sgn / 2 if exact else float(sgn) / 2.0)
        # Bernoulli corrections i^{al+1-2k}
        for k in range(1, depth + 3):
            ff = _falling(al if exact else float(al), 2 * k - 1)
            if ff == 0:
                break
            bk = DEFAULT_TABLE.bernoulli_fraction(2 * k)
            c = sgn * bk * ff / math.factorial(2 * k)
            if not exact:
                c = float(c) if not isinstance(c, float) else c
            add(al + 1 - 2 * k, ell, c)
    return W


def _poly_mul(p: dict, q: dict, depth: int) -> dict:
    out: dict = {}
    for (ip1, xp1), c1 in p.items():
        for (ip2, xp2), c2 in q.items():
            xp = xp1 + xp2
            if xp > depth:
                continue
            key = (ip1 + ip2, xp)
            out[key] = out.get(key, 0) + c1 * c2
    return out


def _exp_neg(W: dict, depth: int) -> dict:
    """exp(-W) truncated past x^{-depth}, as {(i_power, x_power): coeff}."""
    neg = {k: -v for k, v in W.items()}
    unit = {(Fraction(0), 0): Fraction(1)}
    total = dict(unit)
    running = dict(unit)
    for m in range(1, depth + 1):
        running = _poly_mul(running, neg, depth)
        inv_fact = Fraction(1, math.factorial(m))
        for key, c in running.items():
            total[key] = total.get(key, 0) + c * inv_fact
    return total


def K_expansion_refined(a: float, b: float, depth: int = 4) -> AsymptoticExpansion:
    """Multi-term large-x expansion of K_{a,b} via exp(-W) composition.

    The product prod_{j<=i} x/(x+j^a) is written exp(-v i^{a+1} - W_i)
    with v = 1/((a+1)x); exp(-W_i) is expanded into monomials i^A x^{-B}
    with exact rational bookkeeping, and each monomial is summed by the
    R expansion (pole orders become log x terms).  Emitted terms stop at
    the certified remainder order

        (b+2)/(a+1) + (floor((depth+1)/2) - (depth+1)) / (a+1).

    Depth is capped at 4, the order through which the coefficient
    pipeline is hand-validated (at a = 1 it reproduces the known
    sqrt(pi/2) x^{1/2} - 2/3 + sqrt(2 pi)/24 x^{-1/2} for b = -1).
    """
    _check_a(a)
    if not math.isfinite(b) or b <= -2.0:
        raise DomainError(f"refined expansion requires finite b > -2, got {b}")
    if not (isinstance(depth, int) and 0 <= depth <= _MAX_REFINED_DEPTH):
        raise DomainError(
            f"depth must be an integer in 0..{_MAX_REFINED_DEPTH}, got {depth}"
        )
    a_frac = Fraction(a) if float(a).is_integer() else Fraction(*float(a).as_integer_ratio())
    exact = float(a).is_integer() and a >= 1
    if not exact and a == 0:
        exact = False
    b_frac = Fraction(*float(b).as_integer_ratio())
    ap1 = a_frac + 1
    log_ap1 = math.log(float(ap1))

    monomials = _exp_neg(_build_W(a_frac, exact, depth), depth)

    # accumulate (power, log_power) -> list of contributions
    buckets: dict[tuple[float, int], list[float]] = {}

    def emit(power, log_power, value):
        if value == 0.0:
            return
        key = (round(float(power), 12), log_power)
        buckets.setdefault(key, []).append(float(value))

    for (ipow, B), c_tilde in monomials.items():
        ct = float(c_tilde)
        if ct == 0.0:
            continue
        A_prime = b_frac + 1 + ipow  # weight exponent i^{b+1+ipow}
        theta = (A_prime + 1) / ap1
        theta_f = float(theta)
        # pole test is exact in the rational case
        if isinstance(theta, Fraction):
            k0 = -int(theta) if theta.denominator == 1 and theta <= 0 else None
        else:
            k0 = _pole_order(theta_f)
        budget = depth - B
        if k0 is None:
            # Gamma residue: ct x^{-B} Gamma(th)/(a+1) ((a+1)x)^{th}
            coeff = ct * DEFAULT_TABLE.gamma(theta_f) * float(ap1) ** (theta_f - 1.0)
            emit(theta_f - B, 0, coeff)
        elif k0 <= budget:
            base = ct * (-1.0) ** k0 / (float(ap1) * math.factorial(k0))
            scale = float(ap1) ** (-k0)
            # log(1/v) = log x + log(a+1)
            emit(-B - k0, 1, base * scale)
            emit(
                -B - k0, 0,
                base * scale * (DEFAULT_TABLE.harmonic(k0) + float(a_frac) * EULER_GAMMA + log_ap1),
            )
        for k in range(budget + 1):
            if k0 is not None and k == k0:
                continue
            zarg = -float(A_prime) - k * float(ap1)
            zv = DEFAULT_TABLE.zeta(zarg)
            if zv == 0.0:
                continue
            coeff = ct * (-1.0) ** k / math.factorial(k) * zv * float(ap1) ** (-k)
            emit(-B - k, 0, coeff)

    theta_K = float((b_frac + 2) / ap1)
    remainder = theta_K + ((depth + 1) // 2 - (depth + 1)) / float(ap1)
    terms = tuple(
        ExpansionTerm(math.fsum(vals), power, log_power)
        for (power, log_power), vals in sorted(buckets.items(), reverse=True)
        if power > remainder + 1e-9 and abs(math.fsum(vals)) > 1e-300
    )
    return AsymptoticExpansion("x->oo", terms, remainder)


def h10_closed_form(x: float) -> float:
    """H at (a,b) = (1,0) in closed form.

    With d_j = j + 1 the product telescopes into Gamma ratios and

        H(x) = x - P(x+2, x) * exp(x + lgamma(x+2) - (x+1) log x),

    P the regularized lower incomplete gamma function.
    """
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"x must be finite and positive, got {x}")
    p = DEFAULT_TABLE.reg_lower_gamma(x + 2.0, x)
    return x - p * math.exp(x + math.lgamma(x + 2.0) - (x + 1.0) * math.log(x))


def cutoff_index(a: float, x: float) -> int:
    """Index i0 = ceil(x^{3/(3a+2)}) separating bulk from far tail."""
    _check_a(a)
    if not (math.isfinite(x) and x > 0.0):
        raise DomainError(f"x must be finite and positive, got {x}")
    return max(1, math.ceil(x ** (3.0 / (3.0 * a + 2.0))))


def tail_beyond_cutoff(a: float, b: float, x: float, *,
                       tol: float = 1e-12, term_cap: int = 10**6) -> BoundedValue:
    """Mass of the K series beyond the cutoff index, certified."""
    return K_direct(a, b, x, tol=tol, term_cap=term_cap, start=cutoff_index(a, x))


def relative_tail_beyond_cutoff(a: float, b: float, x: float, *,
                                tol: float = 1e-12, term_cap: int = 10**6) -> float:
    """Upper bound on (beyond-cutoff mass) / K, the fraction the cutoff drops.

    The absolute beyond-cutoff mass grows with x (K itself grows
    polynomially); exponential smallness is a statement about this
    fraction, which is what the fitted envelopes bound.
    """
    t = tail_beyond_cutoff(a, b, x, tol=tol, term_cap=term_cap)
    k = K_direct(a, b, x, tol=tol, term_cap=term_cap)
    return (t.value + t.tail_bound) / k.value


@dataclass(frozen=True)
class TailEnvelope:
    """Fitted bound amplitude * exp(-rate * x^exponent) for the relative tail.

    exponent = 1/(3a+1); rate is the shallowest pairwise decay observed
    on the fitting grid, clamped at 0 (the decay often has not set in
    yet on small-x windows, in which case the envelope degenerates to a
    constant), and amplitude carries a factor-2 headroom.  Conservative
    by construction on the fitted range; validity beyond it is checked,
    not assumed.
    """

    amplitude: float
    rate: float
    exponent: float
    n_points: int

    def bound(self, x: float) -> float:
        if not (math.isfinite(x) and x > 0.0):
            raise DomainError(f"x must be finite and positive, got {x}")
        return self.amplitude * math.exp(-self.rate * x**self.exponent)


def fit_tail_envelope(a: float, b: float, xs, *,
                      tol: float = 1e-12, term_cap: int = 10**6) -> TailEnvelope:
    """Fit a TailEnvelope to measured relative beyond-cutoff tails."""
    _check_a(a)
    xs = sorted(float(x) for x in xs)
    if len(xs) < 3:
        raise DomainError("need at least 3 fitting points")
    s = 1.0 / (3.0 * a + 1.0)
    us, logs, tails = [], [], []
    for x in xs:
        ratio = relative_tail_beyond_cutoff(a, b, x, tol=tol, term_cap=term_cap)
        if not ratio > 0.0:
            raise DomainError(f"relative tail underflowed at x={x}")
        us.append(x**s)
        logs.append(math.log(ratio))
        tails.append(ratio)
    rate = max(
        0.0,
        min(
            (logs[i] - logs[j]) / (us[j] - us[i])
            for i in range(len(xs)) for j in range(i + 1, len(xs))
        ),
    )
    amplitude = 2.0 * max(t * math.exp(rate * u) for t, u in zip(tails, us))
    return TailEnvelope(amplitude, rate, s, len(xs))


def tail_cutoff_check(a: float, b: float, x: float, *,
                      envelope: TailEnvelope | None = None,
                      tol: float = 1e-12, term_cap: int = 10**6) -> tuple[int, float]:
    """(cutoff index, certified beyond-cutoff mass upper bound) at x.

    With an envelope, additionally asserts that the relative tail at x
    stays under envelope.bound(x), raising ConsistencyError when a fitted
    envelope fails to hold out of sample.
    """
    i0 = cutoff_index(a, x)
    t = tail_beyond_cutoff(a, b, x, tol=tol, term_cap=term_cap)
    t_hi = t.value + t.tail_bound
    if envelope is not None:
        k = K_direct(a, b, x, tol=tol, term_cap=term_cap)
        ratio = t_hi / k.value
        if ratio > envelope.bound(x):
            raise ConsistencyError(
                f"relative tail {ratio!r} at x={x} exceeds fitted envelope "
                f"bound {envelope.bound(x)!r}"
            )
    return i0, t_hi

"""Fourier-side objects for the block walk X_s = 2^{s-1} b_1 + ... + b_s on Z_p.

Transforms use the convention f^(l) = sum_j w^{lj} f(j), w = exp(2 pi i / p),
under which p * sum |f|^2 = sum |f^|^2. Transforms are evaluated directly,
O(p^2), with the exponent l*j reduced mod p before taking the exponential.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, getcontext

import numpy as np

from .mixing_lab import GOLDEN_Q, INV_SQRT5, block_distribution, block_increment_law, distances
from .modmath import check_odd_modulus

MAX_FOURIER_P = 1023
PLANCHEREL_TOL = 1e-9


def _xi() -> float:
    getcontext().prec = 40
    return float(1 - (4 - Decimal(10).sqrt()) / 9)


XI = _xi()


class PlancherelMismatch(AssertionError):
    pass


def bit_count_exponent(p: int) -> int:
    """m with 2^{m-1} < p < 2^m (p odd, so p is never a power of two)."""
    check_odd_modulus(p)
    return p.bit_length()


@dataclass(frozen=True)
class FourierContext:
    p: int
    m: int
    omega: complex
    xi: float = XI

    @classmethod
    def for_modulus(cls, p: int) -> "FourierContext":
        m = bit_count_exponent(p)
        return cls(p, m, complex(math.cos(2 * math.pi / p), math.sin(2 * math.pi / p)))


def dft_matrix(p: int) -> np.ndarray:
    j = np.arange(p)
    return np.exp(2j * np.pi * (np.outer(j, j) % p) / p)


def dft(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return dft_matrix(v.shape[0]) @ v


def plancherel_residual(v, vhat) -> float:
    """Relative gap between p sum |v|^2 and sum |v^|^2."""
    p = len(v)
    lhs = p * float(np.sum(np.abs(v) ** 2))
    rhs = float(np.sum(np.abs(vhat) ** 2))
    return abs(lhs - rhs) / max(lhs, rhs, 1e-300)


def checked_dft(v) -> np.ndarray:
    """``dft`` that also asserts the Plancherel identity on its own output."""
    vhat = dft(v)
    res = plancherel_residual(np.asarray(v, dtype=complex), vhat)
    if res > PLANCHEREL_TOL:
        raise PlancherelMismatch(f"relative residual {res:.3g}")
    return vhat


def l2_bound(s: int, m: int) -> float:
    """2 ((1 + xi^{2 floor(s/m)})^{m-1} - 1)."""
    if s < 0 or m < 2:
        raise ValueError("need s >= 0 and m >= 2")
    return 2 * ((1 + XI ** (2 * (s // m))) ** (m - 1) - 1)


@dataclass(frozen=True)
class L2Result:
    p: int
    s: int
    value: float
    fourier_value: float
    plancherel_residual: float


def exact_l2(p: int, s: int) -> L2Result:
    """p * sum_j (nu_s(j) - 1/p)^2 for the block walk from 0 with k = p - 1 increments,
    recomputed as sum_{l != 0} |nu_s^(l)|^2 and checked against it."""
    check_odd_modulus(p)
    if p > MAX_FOURIER_P:
        raise ValueError(f"exact_l2 is limited to p <= {MAX_FOURIER_P}")
    nu = block_distribution(p, s)
    direct = p * float(np.sum((nu - 1.0 / p) ** 2))
    nuhat = checked_dft(nu)
    via_fourier = float(np.sum(np.abs(nuhat[1:]) ** 2))
    gap = abs(direct - via_fourier)
    if gap > PLANCHEREL_TOL * max(1.0, direct):
        raise PlancherelMismatch(f"L2 distance {direct!r} vs Fourier side {via_fourier!r}")
    return L2Result(p, s, direct, via_fourier, gap)


def l2_table(p: int, multiples=range(1, 6)) -> list[dict]:
    """Rows (p, m, s, exact_l2, l2_bound, sep_exact) for s = m, 2m, ...

    sep_exact is the separation of the 2s-block law, the quantity the L2
    bound controls through Cauchy-Schwarz.
    """
    m = bit_count_exponent(p)
    rows = []
    for j in multiples:
        s = j * m
        res = exact_l2(p, s)
        sep, _ = distances(block_distribution(p, 2 * s))
        rows.append({
            "p": p, "m": m, "s": s,
            "exact_l2": res.value, "l2_bound": l2_bound(s, m), "sep_exact": sep,
            "plancherel_residual": res.plancherel_residual,
        })
    return rows


def cosine_nonpositive(freq: int, p: int) -> bool:
    """cos(2 pi freq / p) <= 0, decided exactly: freq mod p lies in [p/4, 3p/4]."""
    f = freq % p
    return p <= 4 * f <= 3 * p


def phi_s(ell: int, s: int, ctx: FourierContext) -> int:
    p = ctx.p
    if not 1 <= ell <= p - 1:
        raise ValueError("ell must lie in [1, p-1]")
    count = 0
    f = ell
    for _ in range(s):
        count += cosine_nonpositive(f, p)
        f = 2 * f % p
    return count


def binary_digits(ell: int, p: int, n: int) -> list[int]:
    """First n digits of the binary expansion of ell/p (the one with infinitely many zeros)."""
    out = []
    rem = ell % p
    for _ in range(n):
        rem *= 2
        d = int(rem >= p)
        out.append(d)
        rem -= d * p
    return out


def alternations(bits) -> int:
    return sum(a != b for a, b in zip(bits, bits[1:]))


def sigma(r: int, ell: int, ctx: FourierContext) -> int:
    """The permutation l -> 2^{rm} l mod p: shifts the digit window by r*m places."""
    return pow(2, r * ctx.m, ctx.p) * ell % ctx.p


def alternation_lower(ell: int, s: int, ctx: FourierContext) -> int:
    """sum over r < floor(s/m) of the alternations in the first m digits of sigma_r(ell)/p."""
    if not 1 <= ell <= ctx.p - 1:
        raise ValueError("ell must lie in [1, p-1]")
    return sum(
        alternations(binary_digits(sigma(r, ell, ctx), ctx.p, ctx.m)) for r in range(s // ctx.m)
    )


def window_alternations(ell: int, s: int, ctx: FourierContext) -> int:
    """Alternations among digits 1..s+1 of ell/p."""
    return alternations(binary_digits(ell, ctx.p, s + 1))


def alternation_census(m: int) -> list[int]:
    """H(z): number of m-bit strings with exactly z alternations, by enumeration."""
    if m < 1:
        raise ValueError("m must be >= 1")
    H = [0] * m
    for w in range(1 << m):
        bits = [(w >> i) & 1 for i in range(m)]
        H[alternations(bits)] += 1
    return H


def g_transform(x: float) -> float:
    """sum_k a_k e^{2 pi i k x} in closed form."""
    q = GOLDEN_Q
    return INV_SQRT5 * (1 - q * q) / (1 + q * q - (3 - math.sqrt(5)) * math.cos(2 * math.pi * x))


def _check_mersenne(t: int) -> int:
    if t < 2:
        raise ValueError("t must be >= 2")
    return (1 << t) - 1


def pi_product(j: int, t: int) -> float:
    """Pi_j = prod_{alpha < t} G(2^alpha (2^j - 1) / p), p = 2^t - 1."""
    p = _check_mersenne(t)
    if not 0 <= j <= t - 1:
        raise ValueError("j must lie in [0, t-1]")
    base = (1 << j) - 1
    # reduce numerators mod p: G has period 1
    return math.prod(g_transform(((1 << a) * base % p) / p) for a in range(t))


def separating_function(t: int) -> np.ndarray:
    """f(j) = sum_{a < t} w^{j 2^a} on Z_p, p = 2^t - 1."""
    p = _check_mersenne(t)
    j = np.arange(p)
    return sum(np.exp(2j * np.pi * (j * (1 << a) % p) / p) for a in range(t))


@dataclass(frozen=True)
class SeparatingStats:
    t: int
    r: int
    mean: complex
    second_moment: float
    variance: float
    mean_closed: float
    second_moment_closed: float
    variance_closed: float


def separating_stats(t: int, r: int, tol: float = 1e-6) -> SeparatingStats:
    """Moments of f under the r*t-block law, directly and from the Pi_j products."""
    p = _check_mersenne(t)
    if p > MAX_FOURIER_P:
        raise ValueError(f"separating_stats is limited to p <= {MAX_FOURIER_P}")
    if r < 0:
        raise ValueError("r must be >= 0")
    f = separating_function(t)
    law = block_distribution(p, r * t, mu=block_increment_law(p))
    mean = complex(np.sum(law * f))
    second = float(np.sum(law * np.abs(f) ** 2))
    variance = second - abs(mean) ** 2

    pis = [pi_product(j, t) for j in range(t)]
    mean_c = t * pis[1] ** r
    second_c = t * sum(x**r for x in pis)
    variance_c = second_c - (t * abs(pis[1]) ** r) ** 2
    if abs(mean - mean_c) > tol or abs(second - second_c) > tol:
        raise AssertionError(
            f"closed forms disagree: mean {mean} vs {mean_c}, second moment {second} vs {second_c}"
        )
    return SeparatingStats(t, r, mean, second, variance, mean_c, second_c, variance_c)


def increment_transform_bound_holds(p: int) -> bool:
    """For every (l, j) with cos(2 pi l 2^j / p) <= 0, |mu^(l 2^j)| <= xi.

    The per-factor bound needs only Pr[b=0] >= 1/3 and Pr[b=1] >= 1/9, which
    are checked as well.
    """
    mu = block_increment_law(p)
    if mu[0] < 1 / 3 or mu[1] < 1 / 9:
        return False
    muhat = np.abs(dft(mu))
    for freq in range(1, p):
        if cosine_nonpositive(freq, p) and muhat[freq] > XI:
            return False
    return True

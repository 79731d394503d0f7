"""Canonical paths for the K walk, congestion, and spectral-gap bounds.

``exact_gap`` is a numerical oracle for small p: it builds dense transition
matrices and runs power iteration on the orthogonal complement of the constant
vector (all three walks are doubly stochastic, so uniform is stationary).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .modmath import check_odd_modulus

MAX_DENSE_P = 512
POWER_TOL = 1e-10
POWER_CAP = 10**6


class NoConvergence(RuntimeError):
    def __init__(self, cap: int, residual: float):
        super().__init__(f"power iteration hit {cap} iterations, residual {residual:.3g}")
        self.cap = cap
        self.residual = residual


def path_length(p: int) -> int:
    """ceil(log2 p), computed exactly."""
    return (p - 1).bit_length()


def canonical_path(x: int, y: int, p: int) -> list[tuple[int, int]]:
    """K-path of length ceil(log2 p) from x to y.

    x_i = 2 x_{i-1} - c_i, so x_n = 2^n x - sum 2^{n-i} c_i. The digit word is
    the smallest representative in [0, 2^n) of 2^n x - y mod p.
    """
    check_odd_modulus(p)
    n = path_length(p)
    word = (pow(2, n, p) * x - y) % p
    edges = []
    cur = x % p
    for i in range(n - 1, -1, -1):
        c = (word >> i) & 1
        nxt = (2 * cur - c) % p
        edges.append((cur, nxt))
        cur = nxt
    return edges


def replay_path(x: int, edges: list[tuple[int, int]], p: int) -> int:
    cur = x % p
    for a, b in edges:
        if a != cur or b not in ((2 * a) % p, (2 * a - 1) % p):
            raise ValueError(f"({a}, {b}) is not a K-edge continuing from {cur}")
        cur = b
    return cur


def congestion(p: int) -> float:
    """Max over K-edges of the canonical-path load with uniform weights.

    Pairs x = y are excluded; a path that uses an edge twice loads it once.
    """
    check_odd_modulus(p)
    if p > MAX_DENSE_P:
        raise ValueError(f"congestion enumeration is limited to p <= {MAX_DENSE_P}")
    n = path_length(p)
    # edge (a, 2a - c) is indexed 2a + c
    counts = np.zeros(2 * p, dtype=np.int64)
    for x in range(p):
        for y in range(p):
            if x == y:
                continue
            used = {2 * a + (2 * a - b) % p for a, b in canonical_path(x, y, p)}
            for e in used:
                counts[e] += 1
    pi = 1.0 / p
    # load / (pi(a) K(a, b)) with K(a, b) = 1/2
    return float(counts.max() * pi * pi * n / (pi * 0.5))


@dataclass(frozen=True)
class GapBounds:
    lambda_K_bound: float
    lambda_R2_bound: float
    congestion: float | None = None
    fill_tau: int | None = None

    def to_dict(self) -> dict:
        return {
            "lambda_K_bound": self.lambda_K_bound,
            "lambda_R2_bound": self.lambda_R2_bound,
            "congestion": self.congestion,
            "fill_tau": self.fill_tau,
        }


COMPARISON_CONSTANT = 2 / 81


def gap_bounds(p: int) -> GapBounds:
    check_odd_modulus(p)
    lam_k = 1.0 / (2 * path_length(p) ** 2)
    return GapBounds(lambda_K_bound=lam_k, lambda_R2_bound=COMPARISON_CONSTANT * lam_k)


def fill_bound(lam: float, pi_min: float, epsilon: float) -> int:
    """ceil((1/lam) ln(1/(eps * pi_min))), natural log."""
    if not 0 < lam <= 1 or not 0 < pi_min <= 1 or not 0 < epsilon < 1:
        raise ValueError("need lam, pi_min in (0, 1] and epsilon in (0, 1)")
    return math.ceil(math.log(1.0 / (epsilon * pi_min)) / lam)


def transition_matrix(walk: str, p: int, k: int | None = None) -> np.ndarray:
    check_odd_modulus(p)
    i = np.arange(p)
    P = np.zeros((p, p))
    if walk == "K":
        np.add.at(P, (i, 2 * i % p), 0.5)
        np.add.at(P, (i, (2 * i - 1) % p), 0.5)
        return P
    if k is None:
        raise ValueError(f"walk {walk} needs k")
    np.add.at(P, (i, (i + 1) % p), 1 / 3)
    np.add.at(P, (i, (i + k) % p), 1 / 3)
    np.add.at(P, (i, 2 * i % p), 1 / 3)
    if walk == "R":
        return P
    if walk == "R_squared":
        return P @ P
    raise ValueError(f"unknown walk {walk!r}")


def second_eigenvalue(A: np.ndarray, tol: float = POWER_TOL, cap: int = POWER_CAP, seed: int = 0) -> float:
    """Largest eigenvalue of symmetric ``A`` on the complement of the constant vector.

    Assumes ``A`` is symmetric with spectrum in [-1, 1] and the constant vector
    as an eigenvector. Iterates on (A + I)/2 with the constant direction
    projected out, so the dominant eigenvalue is the algebraically largest one.
    Stops when the residual ||Bv - theta v|| drops below ``tol``.
    """
    p = A.shape[0]
    B = (A + np.eye(p)) / 2.0 - np.full((p, p), 1.0 / p)
    v = np.random.default_rng(seed).standard_normal(p)
    v -= v.mean()
    v /= np.linalg.norm(v)
    residual = math.inf
    for _ in range(cap):
        w = B @ v
        theta = float(v @ w)
        residual = float(np.linalg.norm(w - theta * v))
        if residual < tol:
            return 2.0 * theta - 1.0
        w -= w.mean()
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return -1.0
        v = w / norm
    raise NoConvergence(cap, residual)


def exact_gap(walk: str, p: int, mode: str = "dirichlet", k: int | None = None) -> float:
    """Numerical spectral gap.

    ``dirichlet``: 1 - lambda_2((P + P^T)/2), the gap of P's Dirichlet form
    (uniform stationary law). ``pp_star``: 1 - lambda_2(P P^T), the gap of
    P P^* that governs separation mixing.
    """
    if p > MAX_DENSE_P:
        raise ValueError(f"dense spectral computations are limited to p <= {MAX_DENSE_P}")
    P = transition_matrix(walk, p, k)
    if mode == "dirichlet":
        A = (P + P.T) / 2.0
    elif mode == "pp_star":
        A = P @ P.T
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return 1.0 - second_eigenvalue(A)

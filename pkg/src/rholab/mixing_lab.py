"""Exact distribution evolution for the Rho walk, the K walk and the block walk.

Distributions are float64 arrays over Z_p. Pushforwards accept either a single
vector or a 2-D array whose rows are distributions, so the all-starts mixing
computation is one array per step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .modmath import check_odd_modulus, mod_inverse
from .rho_walk import WalkParams

MAX_EXACT_P = 4096
MASS_TOL = 1e-12
SEP_MONOTONE_SLACK = 1e-10
GOLDEN_Q = (3 - math.sqrt(5)) / 2
INV_SQRT5 = 1 / math.sqrt(5)


class NotMixedWithinBudget(RuntimeError):
    def __init__(self, budget: int, sep: float):
        super().__init__(f"separation still {sep:.6g} after {budget} steps")
        self.budget = budget
        self.sep = sep


def check_prob_vector(v: np.ndarray, tol: float = MASS_TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("a probability vector is one-dimensional")
    if np.any(v < -tol):
        raise ValueError("negative probability mass")
    if abs(math.fsum(v) - 1.0) > tol:
        raise ValueError(f"mass {math.fsum(v)!r} differs from 1")
    return v


def point_mass(p: int, at: int = 0) -> np.ndarray:
    v = np.zeros(p)
    v[at % p] = 1.0
    return v


def uniform(p: int) -> np.ndarray:
    return np.full(p, 1.0 / p)


def _halving(p: int) -> np.ndarray:
    """Index array h with h[j] = j / 2 mod p."""
    return np.arange(p) * mod_inverse(2, p) % p


def pushforward_R(v: np.ndarray, params: WalkParams) -> np.ndarray:
    """One step of the Rho walk, written as gathers over the three preimages of each j."""
    p, k = params.p, params.k
    v = np.asarray(v, dtype=float)
    j = np.arange(p)
    return (v[..., (j - 1) % p] + v[..., (j - k) % p] + v[..., _halving(p)]) / 3.0


def pushforward_K(v: np.ndarray, p: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    h = _halving(p)
    j = np.arange(p)
    # 2i = j  or  2i - 1 = j
    return 0.5 * (v[..., h] + v[..., h[(j + 1) % p]])


def _circulant(mu: np.ndarray) -> np.ndarray:
    p = mu.shape[0]
    idx = (np.arange(p)[None, :] - np.arange(p)[:, None]) % p
    return mu[idx]


def pushforward_block(v: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """X -> 2X + b with b ~ mu: double (a permutation), then convolve with mu."""
    v = np.asarray(v, dtype=float)
    mu = np.asarray(mu, dtype=float)
    doubled = v[..., _halving(mu.shape[0])]
    return doubled @ _circulant(mu)


def distances(v: np.ndarray) -> tuple[float, float]:
    """(separation, total variation) from the uniform distribution."""
    v = np.asarray(v, dtype=float)
    p = v.shape[-1]
    sep = float(np.max(1.0 - p * v))
    tv = 0.5 * float(np.sum(np.abs(v - 1.0 / p)))
    return sep, tv


def _row_separation(M: np.ndarray) -> np.ndarray:
    return np.max(1.0 - M.shape[-1] * M, axis=-1)


@dataclass
class MixingReport:
    p: int
    k: int | None
    epsilon: float
    tau: int
    per_start_tau: list[int]
    sep_curve: list[float]
    worst_start: int
    walk: str = "R"
    max_sep_curve: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "walk": self.walk,
            "p": self.p,
            "k": self.k,
            "epsilon": self.epsilon,
            "tau": self.tau,
            "worst_start": self.worst_start,
            "per_start_tau": list(self.per_start_tau),
            "sep_curve": list(self.sep_curve),
        }


def _all_starts_mixing(p, epsilon, max_steps, step) -> tuple[int, list[int], list[list[float]]]:
    M = np.eye(p)
    first = np.full(p, -1)
    history = []
    for n in range(max_steps + 1):
        seps = _row_separation(M)
        history.append(seps)
        newly = (first < 0) & (seps <= epsilon)
        first[newly] = n
        if np.all(first >= 0):
            return n, first.tolist(), history
        if n < max_steps:
            M = step(M)
    raise NotMixedWithinBudget(max_steps, float(np.max(history[-1])))


def _report(p, k, epsilon, walk, tau, per_start, history) -> MixingReport:
    per = np.asarray(per_start)
    candidates = np.flatnonzero(per == tau)
    if tau > 0:
        # among starts that pass last, the one furthest from mixing just before
        before = history[tau - 1]
        worst = int(candidates[np.argmax(before[candidates])])
    else:
        worst = int(candidates[0])
    curve = [float(h[worst]) for h in history]
    for a, b in zip(curve, curve[1:]):
        if b > a + SEP_MONOTONE_SLACK:
            raise AssertionError("separation increased along an exact trajectory")
    return MixingReport(
        p=p, k=k, epsilon=epsilon, tau=tau, per_start_tau=list(per_start),
        sep_curve=curve, worst_start=worst, walk=walk,
        max_sep_curve=[float(np.max(h)) for h in history],
    )


def _check_exact_size(p: int) -> None:
    check_odd_modulus(p)
    if p > MAX_EXACT_P:
        raise ValueError(f"exact mixing computations are limited to p <= {MAX_EXACT_P}")


def tau_s(params: WalkParams, epsilon: float, max_steps: int = 10_000, power: int = 1) -> MixingReport:
    """Exact worst-start separation mixing time of R^power, evolving all p starts."""
    _check_exact_size(params.p)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")

    def step(M):
        for _ in range(power):
            M = pushforward_R(M, params)
        return M

    tau, per_start, history = _all_starts_mixing(params.p, epsilon, max_steps, step)
    walk = "R" if power == 1 else f"R^{power}"
    return _report(params.p, params.k, epsilon, walk, tau, per_start, history)


def block_mixing_report(p: int, epsilon: float, max_blocks: int = 10_000) -> MixingReport:
    _check_exact_size(p)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mu = block_increment_law(p)
    C = _circulant(mu)
    h = _halving(p)
    tau, per_start, history = _all_starts_mixing(p, epsilon, max_blocks, lambda M: M[:, h] @ C)
    return _report(p, p - 1, epsilon, "block", tau, per_start, history)


def tau_s_block(p: int, epsilon: float, max_blocks: int = 10_000) -> int:
    return block_mixing_report(p, epsilon, max_blocks).tau


def block_mixing_budget(m: int, epsilon: float) -> float:
    """Block count 2m ln(2(m-1)/eps) after which separation of the block walk is <= eps."""
    return 2 * m * math.log(2 * (m - 1) / epsilon)


def separation_curve(params: WalkParams, steps: int, start: int = 0) -> list[float]:
    """sep(P^t(start, .)) for t = 0..steps."""
    v = point_mass(params.p, start)
    out = [distances(v)[0]]
    for _ in range(steps):
        v = pushforward_R(v, params)
        out.append(distances(v)[0])
    return out


def block_distribution(p: int, blocks: int, start: int = 0, mu: np.ndarray | None = None) -> np.ndarray:
    """Exact law of the block walk after ``blocks`` blocks from ``start``."""
    mu = block_increment_law(p) if mu is None else mu
    v = point_mass(p, start)
    for _ in range(blocks):
        v = pushforward_block(v, mu)
    return v


def increment_weight(kk: int) -> float:
    """a_k = 5^{-1/2} ((3 - sqrt5)/2)^{|k|}: law of the ground covered between doublings when k = p-1."""
    return INV_SQRT5 * GOLDEN_Q ** abs(kk)


def increment_law_unfolded(cutoff: float = 1e-15) -> tuple[np.ndarray, np.ndarray]:
    """(offsets, a_k) for all |k| with a_k >= cutoff, offsets ascending."""
    kmax = 0
    while increment_weight(kmax + 1) >= cutoff:
        kmax += 1
    ks = np.arange(-kmax, kmax + 1)
    return ks, INV_SQRT5 * GOLDEN_Q ** np.abs(ks)


def block_increment_law(p: int) -> np.ndarray:
    """a_k folded onto Z_p in closed form (geometric series over each residue class)."""
    check_odd_modulus(p)
    q = GOLDEN_Q
    qp = q**p
    j = np.arange(p, dtype=float)
    mu = INV_SQRT5 * (q**j + q ** (p - j)) / (1 - qp)
    mu[0] = INV_SQRT5 * (1 + qp) / (1 - qp)
    return mu

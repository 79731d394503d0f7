"""Collision detection, discrete-log extraction and the collision-time bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .mixing_lab import tau_s
from .modmath import GroupInstance, NotInvertible, mod_inverse, mod_pow, validate_group
from .rho_walk import (
    ExponentState,
    PartitionMode,
    PartitionOracle,
    WalkParams,
    assign_partition,
    iterate_F,
    step_R,
)
from .rng import stream


class NoCollisionWithinBudget(RuntimeError):
    def __init__(self, max_steps: int):
        super().__init__(f"no collision within {max_steps} steps")
        self.max_steps = max_steps


class DegenerateCollision(ArithmeticError):
    """Collision with beta = b (mod p); it carries no information about k."""


class ExhaustedAttempts(RuntimeError):
    def __init__(self, attempts: int):
        super().__init__(f"every one of {attempts} attempts ended in a degenerate collision")
        self.attempts = attempts


@dataclass(frozen=True)
class CollisionEvent:
    first_index: int
    second_index: int
    state: int
    first_tag: tuple[int, int]
    second_tag: tuple[int, int]


def _first_revisit(start_key, start_tag, advance, max_steps):
    """Walk until a key repeats. ``advance(key, tag) -> (key, tag)``."""
    seen = {start_key: (0, start_tag)}
    key, tag = start_key, start_tag
    for n in range(1, max_steps + 1):
        key, tag = advance(key, tag)
        hit = seen.get(key)
        if hit is not None:
            return CollisionEvent(hit[0], n, key, hit[1], tag)
        seen[key] = (n, tag)
    raise NoCollisionWithinBudget(max_steps)


def find_collision(
    params: WalkParams, oracle: PartitionOracle, start: ExponentState, max_steps: int
) -> CollisionEvent:
    """First revisit of the exponent walk R, with the (a, b) tags of both visits.

    The partition is over positions in Z_p, which stand in for group elements.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    p, k = params.p, params.k

    def advance(pos, tag):
        move = assign_partition(pos, oracle)
        a, b = tag
        if move == 1:
            a += 1
        elif move == 2:
            b += 1
        else:
            a, b = 2 * a, 2 * b
        return step_R(pos, move, params), (a % p, b % p)

    return _first_revisit(start.position(params), (start.a, start.b), advance, max_steps)


def extract_dlog(a: int, b: int, alpha: int, beta: int, p: int) -> int:
    """k = (a - alpha) / (beta - b) mod p from x^(a + kb) = x^(alpha + k beta)."""
    if (beta - b) % p == 0:
        raise DegenerateCollision(f"beta = b = {b % p} (mod {p})")
    try:
        return (a - alpha) * mod_inverse(beta - b, p) % p
    except NotInvertible as exc:  # only possible for composite p
        raise DegenerateCollision(str(exc)) from exc


@dataclass
class SolveResult:
    k: int
    attempts: int
    degenerate: int
    collision: CollisionEvent


def find_group_collision(
    inst: GroupInstance, oracle: PartitionOracle, max_steps: int, start: ExponentState | None = None
) -> CollisionEvent:
    """Iterate F from g = x^a y^b until a group element repeats."""
    start = start or ExponentState(1, 0)
    g0 = mod_pow(inst.x, start.a, inst.q) * mod_pow(inst.y, start.b, inst.q) % inst.q

    def advance(g, tag):
        g, st = iterate_F(g, ExponentState(*tag), inst, oracle)
        return g, (st.a, st.b)

    return _first_revisit(g0, (start.a, start.b), advance, max_steps)


def solve_detailed(
    inst: GroupInstance,
    seed: int,
    max_attempts: int = 64,
    mode: PartitionMode = PartitionMode.LAZY_RANDOM,
) -> SolveResult:
    """Pollard Rho with full trajectory storage; a degenerate collision restarts
    with a freshly seeded partition."""
    validate_group(inst)
    degenerate = 0
    for attempt in range(max_attempts):
        part_seed = int(stream(seed, attempt).integers(0, 2**63))
        oracle = PartitionOracle(part_seed, mode)
        event = find_group_collision(inst, oracle, max_steps=inst.p + 1)
        (a, b), (alpha, beta) = event.first_tag, event.second_tag
        try:
            k = extract_dlog(a, b, alpha, beta, inst.p)
        except DegenerateCollision:
            degenerate += 1
            continue
        if mod_pow(inst.x, k, inst.q) != inst.y % inst.q:
            raise AssertionError(f"recovered k={k} fails x^k = y")
        return SolveResult(k, attempt + 1, degenerate, event)
    raise ExhaustedAttempts(max_attempts)


def solve(inst: GroupInstance, seed: int, max_attempts: int = 64) -> int:
    return solve_detailed(inst, seed, max_attempts).k


def collision_bound(tau_half: int, group_size: int, c: float) -> int:
    """ceil(1 + tau + 2 sqrt(2 c |G| tau)) steps."""
    if tau_half < 1 or group_size < 2 or c <= 0:
        raise ValueError("need tau_half >= 1, group_size >= 2, c > 0")
    return math.ceil(1 + tau_half + 2 * math.sqrt(2 * c * group_size * tau_half))


def block_collision_bound(tau_block: int, group_size: int, c: float) -> tuple[int, float]:
    """Rho-walk step count from the block-walk mixing time, and its success floor.

    The floor subtracts the Chebyshev estimate 32/t for seeing fewer than t/4
    doublings; it is returned even when negative.
    """
    if tau_block < 1 or group_size < 2 or c <= 0:
        raise ValueError("need tau_block >= 1, group_size >= 2, c > 0")
    t = math.ceil(4 * (1 + tau_block + 2 * math.sqrt(2 * c * group_size * tau_block)))
    return t, 1 - math.exp(-c) - 32 / t


@dataclass
class CollisionStats:
    trials: int
    steps_to_collision: list[int]
    bound_used: int
    fraction_within_bound: float
    tau_half: int = 0
    c: float = 1.0
    floor: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        miss = math.exp(-self.c)
        self.floor = 1 - miss
        self.sigma = math.sqrt(miss * (1 - miss) / self.trials)

    @property
    def passes(self) -> bool:
        return self.fraction_within_bound >= self.floor - 3 * self.sigma

    def to_dict(self) -> dict:
        steps = sorted(self.steps_to_collision)
        return {
            "trials": self.trials,
            "tau_half": self.tau_half,
            "c": self.c,
            "bound": self.bound_used,
            "fraction_within_bound": self.fraction_within_bound,
            "floor": self.floor,
            "sigma": self.sigma,
            "passes": self.passes,
            "median_steps": steps[len(steps) // 2],
            "max_steps": steps[-1],
        }


def collision_experiment(
    params: WalkParams, c: float, trials: int, seed: int, tau_half: int | None = None
) -> CollisionStats:
    """Independent lazy-partition walks from position 1, counted against the bound.

    Every step is checked for a revisit, which can only make the empirical
    collision fraction larger than a check every tau steps would.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if tau_half is None:
        tau_half = tau_s(params, 0.5).tau
    bound = collision_bound(max(tau_half, 1), params.p, c)
    budget = max(bound, params.p + 1)
    steps = []
    for trial in range(trials):
        oracle = PartitionOracle(int(stream(seed, trial).integers(0, 2**63)))
        event = find_collision(params, oracle, ExponentState(1, 0), budget)
        steps.append(event.second_index)
    within = sum(s <= bound for s in steps)
    return CollisionStats(trials, steps, bound, within / trials, tau_half, c)

"""The three walks everything else consumes.

* ``iterate_F`` -- Pollard's iterating function on group elements, carrying the
  exponent pair (a, b) with g = x^a y^b.
* ``step_R`` -- the idealized exponent walk on Z_p: i -> i+1, i+k or 2i.
* ``step_K`` -- the comparison walk i -> 2i or 2i-1.

Move types are numbered 1: multiply by x (+1), 2: multiply by y (+k),
3: square (x2). The same numbering is used by the stopping-time module.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .modmath import GroupInstance, check_odd_modulus
from .rng import stream

MASK64 = (1 << 64) - 1
MOVE_X, MOVE_Y, MOVE_SQUARE = 1, 2, 3


@dataclass(frozen=True)
class WalkParams:
    p: int
    k: int

    def __post_init__(self):
        check_odd_modulus(self.p)
        if not 1 <= self.k <= self.p - 1:
            raise ValueError(f"k must lie in [1, p-1], got k={self.k}, p={self.p}")


@dataclass(frozen=True)
class ExponentState:
    """Exponent pair (a, b) of g = x^a y^b, both reduced mod p.

    The walk position a + k*b is only known to callers that know k, so it is
    computed on demand rather than stored.
    """

    a: int
    b: int

    def position(self, params: WalkParams) -> int:
        return (self.a + params.k * self.b) % params.p


def splitmix64_finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64_finalize_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class PartitionMode(enum.Enum):
    HASHED = "hashed"
    LAZY_RANDOM = "lazy"


@dataclass
class PartitionOracle:
    """Assigns each state to S_1, S_2 or S_3, fixed for the oracle's lifetime.

    ``HASHED`` needs no memory; ``LAZY_RANDOM`` draws an independent uniform type
    the first time a state is seen and remembers it. A lazy oracle holds mutable
    state and must not be shared between walks.
    """

    seed: int
    mode: PartitionMode = PartitionMode.LAZY_RANDOM
    memo: dict = field(default_factory=dict, repr=False)
    _rng: np.random.Generator | None = field(default=None, repr=False)
    _buffer: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.seed &= MASK64
        if self.mode is PartitionMode.LAZY_RANDOM:
            self._rng = stream(self.seed, 0x5EED)

    def _draw(self) -> int:
        if not self._buffer:
            # drawn in chunks, consumed back to front
            self._buffer = self._rng.integers(1, 4, size=1024).tolist()
        return self._buffer.pop()

    def __call__(self, state: int) -> int:
        return assign_partition(state, self)


def assign_partition(state: int, oracle: PartitionOracle) -> int:
    if oracle.mode is PartitionMode.HASHED:
        return splitmix64_finalize(oracle.seed ^ state) % 3 + 1
    move = oracle.memo.get(state)
    if move is None:
        move = oracle.memo[state] = oracle._draw()
    return move


def apply_move(g: int, st: ExponentState, inst: GroupInstance, move: int) -> tuple[int, ExponentState]:
    q, p = inst.q, inst.p
    if move == MOVE_X:
        return g * inst.x % q, ExponentState((st.a + 1) % p, st.b)
    if move == MOVE_Y:
        return g * inst.y % q, ExponentState(st.a, (st.b + 1) % p)
    if move == MOVE_SQUARE:
        return g * g % q, ExponentState(2 * st.a % p, 2 * st.b % p)
    raise ValueError(f"move type must be 1, 2 or 3, got {move}")


def iterate_F(g: int, st: ExponentState, inst: GroupInstance, oracle: PartitionOracle) -> tuple[int, ExponentState]:
    """Pollard's iterating function: the move is chosen by the partition class of ``g``."""
    return apply_move(g, st, inst, assign_partition(g, oracle))


def step_R(i: int, move: int, params: WalkParams) -> int:
    p = params.p
    if move == MOVE_X:
        return (i + 1) % p
    if move == MOVE_Y:
        return (i + params.k) % p
    if move == MOVE_SQUARE:
        return 2 * i % p
    raise ValueError(f"move type must be 1, 2 or 3, got {move}")


def step_K(i: int, choice: int, p: int) -> int:
    if choice == 0:
        return 2 * i % p
    if choice == 1:
        return (2 * i - 1) % p
    raise ValueError(f"choice must be 0 or 1, got {choice}")

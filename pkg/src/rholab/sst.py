"""Strong stationary time for the Rho walk on Z_p with p = 2^m - 1.

Each step draws a symbol R_t uniform on 1..9: 1-3 move +1, 4-6 move +k and
7-9 double. The symbols between consecutive doublings form a history. The
histories (7) and (a, d) with a in 1..3, d in 7..9 are *special*: their
ground covered is exactly 0 or 1, each with probability 1/9, so they carry a
fair bit.

Histories are consumed in super-rounds of s = r*m. History j of a round
(1-based) sits at block position ((j - 1) mod m) + 1, and C_i is the bit of
the first special history at position i. When a round closes with every C_i
defined and not all equal to 1, the walk stops at that closing doubling.
Otherwise all C_i are discarded and the next s histories are used.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import stream

SYMBOL_CHUNK = 512
WILSON_Z99 = 2.5758293035489004


class MalformedHistory(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, max_steps: int, trace: "SstTrace | None" = None):
        super().__init__(f"no stopping time within {max_steps} steps")
        self.max_steps = max_steps
        self.trace = trace


class HistoryClass(enum.Enum):
    SPECIAL0 = 0
    SPECIAL1 = 1
    NOT_SPECIAL = 2


def default_rounds(m: int) -> int:
    return math.ceil(3 * math.log(m) / math.log(9 / 7))


def sst_budget(m: int) -> tuple[int, int]:
    """(r, 9 m r): the step count by which T has occurred with probability > 1/2."""
    if m < 2:
        raise ValueError("m must be >= 2")
    r = default_rounds(m)
    return r, 9 * m * r


@dataclass(frozen=True)
class SstParams:
    m: int
    k: int
    r: int | None = None

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if not 1 <= self.k < self.p:
            raise ValueError(f"k must lie in [1, p), got {self.k}")
        if self.r is None:
            object.__setattr__(self, "r", default_rounds(self.m))
        if self.r < 1:
            raise ValueError("r must be >= 1")

    @property
    def p(self) -> int:
        return (1 << self.m) - 1

    @property
    def s(self) -> int:
        return self.r * self.m


def classify_history(h) -> HistoryClass:
    if len(h) == 0 or h[-1] not in (7, 8, 9):
        raise MalformedHistory(f"history {tuple(h)} does not end in a doubling symbol")
    if len(h) == 1 and h[0] == 7:
        return HistoryClass.SPECIAL0
    if len(h) == 2 and h[0] in (1, 2, 3):
        return HistoryClass.SPECIAL1
    return HistoryClass.NOT_SPECIAL


@dataclass
class SstTrace:
    """One simulated trajectory up to the stopping time.

    ``history_ends[i]`` is T_{i+1}, the step of the doubling that closes
    history i+1; ``increments[i]`` is its ground covered b_{i+1} mod p.
    ``c_bits`` is the final round's C_1..C_m (None where undefined).
    """

    params: SstParams
    y0: int
    symbols: list[int] = field(default_factory=list)
    positions: list[int] = field(default_factory=list)
    history_ends: list[int] = field(default_factory=list)
    increments: list[int] = field(default_factory=list)
    special: list[int | None] = field(default_factory=list)
    c_bits: list[int | None] = field(default_factory=list)
    rounds_used: int = 0
    T: int | None = None

    @property
    def y_at_T(self) -> int | None:
        return None if self.T is None else self.positions[self.T]

    def histories(self) -> list[list[int]]:
        out, prev = [], 0
        for end in self.history_ends:
            out.append(self.symbols[prev:end])
            prev = end
        return out

    def to_dict(self) -> dict:
        runs: list[list[int]] = []
        for sym in self.symbols:
            if runs and runs[-1][0] == sym:
                runs[-1][1] += 1
            else:
                runs.append([sym, 1])
        return {
            "m": self.params.m,
            "k": self.params.k,
            "r": self.params.r,
            "y0": self.y0,
            "symbols_rle": runs,
            "T": self.T,
            "rounds_used": self.rounds_used,
            "c_bits": self.c_bits,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SstTrace":
        """Rebuild a trace from its serialized symbols by replaying them."""
        params = SstParams(d["m"], d["k"], d["r"])
        symbols = [sym for sym, n in d["symbols_rle"] for _ in range(n)]
        trace = _run(params, iter(symbols), len(symbols), d["y0"], keep=True)
        if trace.T != d["T"]:
            raise ValueError("serialized stopping time disagrees with the replay")
        return trace


def _symbol_source(rng: np.random.Generator):
    while True:
        yield from rng.integers(1, 10, size=SYMBOL_CHUNK).tolist()


def _run(params: SstParams, symbols, max_steps: int, y0: int = 0, keep: bool = False,
         rounds: int | None = None, census: list | None = None):
    """Core loop shared by every entry point.

    With ``rounds`` set, stopping is disabled and exactly that many super-rounds
    are simulated; each round's C vector is appended to ``census``.
    Returns an SstTrace when ``keep`` else (T, Y_T).
    """
    p, k, m, s = params.p, params.k, params.m, params.s
    trace = SstTrace(params, y0) if keep else None
    if keep:
        trace.positions.append(y0 % p)
    y = y0 % p
    t = 0
    hist_len = 0
    first = 0
    ground = 0
    j = 0
    C = [None] * m
    done_rounds = 0
    for sym in symbols:
        if t >= max_steps:
            break
        t += 1
        if sym <= 3:
            y += 1
            ground += 1
        elif sym <= 6:
            y += k
            ground += k
        else:
            y *= 2
        y %= p
        if keep:
            trace.symbols.append(sym)
            trace.positions.append(y)
        hist_len += 1
        if hist_len == 1:
            first = sym
        if sym < 7:
            continue
        # a doubling closes the history
        if hist_len == 1 and sym == 7:
            bit = 0
        elif hist_len == 2 and first <= 3:
            bit = 1
        else:
            bit = None
        i = j % m
        if bit is not None and C[i] is None:
            C[i] = bit
        if keep:
            trace.history_ends.append(t)
            trace.increments.append(ground % p)
            trace.special.append(bit)
        hist_len = 0
        ground = 0
        j += 1
        if j < s:
            continue
        done_rounds += 1
        if rounds is not None:
            census.append(C)
            if done_rounds == rounds:
                return trace
        elif None not in C and 0 in C:
            if keep:
                trace.c_bits = C
                trace.rounds_used = done_rounds
                trace.T = t
                return trace
            return t, y
        C = [None] * m
        j = 0
    if rounds is not None:
        raise BudgetExceeded(max_steps, trace)
    if keep:
        trace.c_bits = C
        trace.rounds_used = done_rounds
    raise BudgetExceeded(max_steps, trace)


def sst_run(params: SstParams, seed: int, max_steps: int = 10**7, stream_id: int = 0) -> SstTrace:
    """Simulate from Y_0 = 0 until the stopping time, keeping the full trace."""
    rng = stream(seed, stream_id)
    return _run(params, _symbol_source(rng), max_steps, keep=True)


def sample_stopping_times(params: SstParams, trials: int, seed: int, max_steps: int = 10**7) -> tuple[np.ndarray, np.ndarray]:
    """(T, Y_T) for ``trials`` independent runs; trial i uses stream (seed, i)."""
    Ts = np.empty(trials, dtype=np.int64)
    Ys = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        Ts[i], Ys[i] = _run(params, _symbol_source(stream(seed, i)), max_steps)
    return Ts, Ys


def replay_histories(histories, params: SstParams, y0: int = 0) -> tuple[list[int], list[int], list[int]]:
    """Positions Y_0..Y_t, increments b_i and doubling times T_i from histories alone."""
    p, k = params.p, params.k
    y = y0 % p
    positions, increments, ends = [y], [], []
    t = 0
    for h in histories:
        classify_history(h)
        ground = 0
        for sym in h:
            t += 1
            if sym <= 3:
                y, ground = y + 1, ground + 1
            elif sym <= 6:
                y, ground = y + k, ground + k
            else:
                y *= 2
            y %= p
            positions.append(y)
        increments.append(ground % p)
        ends.append(t)
    return positions, increments, ends


@dataclass(frozen=True)
class TailEstimate:
    t: int
    trials: int
    estimate: float
    lower: float
    upper: float

    @property
    def half_width(self) -> float:
        return (self.upper - self.lower) / 2


def wilson_interval(successes: int, n: int, z: float = WILSON_Z99) -> tuple[float, float]:
    phat = successes / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z / denom * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n))
    return max(0.0, centre - half), min(1.0, centre + half)


def tail_from_samples(Ts: np.ndarray, t: int) -> TailEstimate:
    n = len(Ts)
    over = int(np.count_nonzero(Ts > t))
    lo, hi = wilson_interval(over, n)
    return TailEstimate(t, n, over / n, lo, hi)


def sst_tail(params: SstParams, t: int, trials: int, seed: int) -> TailEstimate:
    """Monte Carlo estimate of Pr[T > t] with a 99% Wilson interval."""
    if trials < 100:
        raise ValueError("trials must be >= 100")
    Ts, _ = sample_stopping_times(params, trials, seed)
    return tail_from_samples(Ts, t)


@dataclass(frozen=True)
class RoundCensus:
    rounds: int
    m: int
    undefined: int
    defined: int
    ones: int

    @property
    def undefined_rate(self) -> float:
        return self.undefined / (self.rounds * self.m)


def superround_census(params: SstParams, rounds: int, seed: int) -> RoundCensus:
    """Run ``rounds`` consecutive super-rounds with stopping disabled and tally the C_i."""
    census: list = []
    _run(params, _symbol_source(stream(seed, 0)), 10**12, rounds=rounds, census=census)
    flat = [c for C in census for c in C]
    undefined = sum(c is None for c in flat)
    ones = sum(c == 1 for c in flat)
    return RoundCensus(rounds, params.m, undefined, len(flat) - undefined, ones)

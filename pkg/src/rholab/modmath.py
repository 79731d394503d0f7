"""Exact modular arithmetic on word-sized moduli and group-instance checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

MAX_MODULUS = 1 << 62
MAX_Q = 1 << 32


class NotInvertible(ArithmeticError):
    pass


class GroupInstanceError(ValueError):
    """Base class for a failed group-instance check; ``check`` names it."""

    check = "GroupInstanceError"


class QNotPrime(GroupInstanceError):
    check = "QNotPrime"


class PNotPrime(GroupInstanceError):
    check = "PNotPrime"


class OrderNotDivisor(GroupInstanceError):
    check = "OrderNotDivisor"


class GeneratorTrivial(GroupInstanceError):
    check = "GeneratorTrivial"


class GeneratorWrongOrder(GroupInstanceError):
    check = "GeneratorWrongOrder"


class TargetNotInSubgroup(GroupInstanceError):
    check = "TargetNotInSubgroup"


class ModulusOutOfRange(GroupInstanceError):
    check = "ModulusOutOfRange"


def check_odd_modulus(p: int) -> int:
    """Return ``p`` if it is an odd integer in [3, 2^62), else raise ValueError."""
    if not isinstance(p, int) or isinstance(p, bool):
        raise TypeError(f"modulus must be int, got {type(p).__name__}")
    if p < 3 or p % 2 == 0:
        raise ValueError(f"modulus must be odd and >= 3, got {p}")
    if p >= MAX_MODULUS:
        raise ValueError(f"modulus {p} exceeds 2^62")
    return p


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """Square-and-multiply ``base**exp % modulus``."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    if exp < 0:
        raise ValueError("exponent must be nonnegative")
    if modulus == 1:
        return 0
    result = 1
    b = base % modulus
    e = exp
    while e:
        if e & 1:
            result = result * b % modulus
        b = b * b % modulus
        e >>= 1
    return result


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Iterative extended Euclid: (g, s, t) with a*s + b*t = g."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_s, s = s, old_s - quot * s
        old_t, t = t, old_t - quot * t
    return old_r, old_s, old_t


def mod_inverse(a: int, p: int) -> int:
    if p < 2:
        raise ValueError("modulus must be >= 2")
    a %= p
    g, s, _ = egcd(a, p)
    if g != 1:
        raise NotInvertible(f"gcd({a}, {p}) = {g}")
    return s % p


def is_prime(n: int) -> bool:
    """Deterministic trial division; intended for n <= 2^32."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class GroupInstance:
    """Order-``p`` subgroup of (Z/qZ)^* generated by ``x``, with target ``y``."""

    q: int
    p: int
    x: int
    y: int


def validate_group(inst: GroupInstance) -> GroupInstance:
    """Run every instance check in order and raise the first violation."""
    q, p, x, y = inst.q, inst.p, inst.x, inst.y
    if not 3 <= q < MAX_Q:
        raise ModulusOutOfRange(f"q={q} outside [3, 2^32)")
    if not is_prime(q):
        raise QNotPrime(f"q={q} is composite")
    if not is_prime(p) or p == 2:
        raise PNotPrime(f"p={p} is not an odd prime")
    if (q - 1) % p:
        raise OrderNotDivisor(f"p={p} does not divide q-1={q - 1}")
    if x % q == 1:
        raise GeneratorTrivial("x = 1")
    if not 1 < x < q or mod_pow(x, p, q) != 1:
        raise GeneratorWrongOrder(f"x={x} does not have order p={p} mod q={q}")
    if not 0 < y < q or mod_pow(y, p, q) != 1:
        raise TargetNotInSubgroup(f"y={y} is not in the order-{p} subgroup")
    return inst

import pytest
from hypothesis import given, strategies as st

from rholab.modmath import (
    GeneratorTrivial,
    GroupInstance,
    NotInvertible,
    OrderNotDivisor,
    QNotPrime,
    TargetNotInSubgroup,
    is_prime,
    mod_inverse,
    mod_pow,
    validate_group,
)


@pytest.mark.parametrize("args, expected", [((5, 0, 7), 1), ((2, 11, 23), 1), ((3, 4, 7), 4)])
def test_mod_pow_examples(args, expected):
    assert mod_pow(*args) == expected


def test_mod_pow_modulus_one():
    assert mod_pow(7, 3, 1) == 0


def test_mod_pow_matches_repeated_multiplication():
    for modulus in range(1, 102):
        for base in range(0, 12):
            acc = 1 % modulus
            for exp in range(65):
                assert mod_pow(base, exp, modulus) == acc
                acc = acc * base % modulus


def test_mod_inverse_examples():
    assert mod_inverse(1, 11) == 1
    assert mod_inverse(3, 11) == 4
    with pytest.raises(NotInvertible):
        mod_inverse(0, 11)


def test_mod_inverse_exhaustive():
    for p in range(2, 102):
        for a in range(1, p):
            if gcd_is_one(a, p):
                assert a * mod_inverse(a, p) % p == 1
            else:
                with pytest.raises(NotInvertible):
                    mod_inverse(a, p)


def gcd_is_one(a, b):
    while b:
        a, b = b, a % b
    return a == 1


@given(st.integers(-10**6, 10**6), st.integers(2, 10**4))
def test_mod_inverse_negative_and_large_inputs(a, p):
    if gcd_is_one(a % p, p):
        assert a * mod_inverse(a, p) % p == 1


def test_is_prime_against_sieve():
    n = 5000
    sieve = [True] * n
    sieve[0] = sieve[1] = False
    for i in range(2, n):
        if sieve[i]:
            for j in range(i * i, n, i):
                sieve[j] = False
    assert [is_prime(i) for i in range(n)] == sieve


def test_validate_group_examples():
    inst = GroupInstance(23, 11, 2, 13)
    assert validate_group(inst) is inst
    with pytest.raises(GeneratorTrivial):
        validate_group(GroupInstance(23, 11, 1, 1))
    with pytest.raises(QNotPrime):
        validate_group(GroupInstance(24, 11, 2, 13))
    with pytest.raises(OrderNotDivisor):
        validate_group(GroupInstance(23, 7, 2, 13))
    # 5 generates all of (Z/23)^*, so 5 is not in the order-11 subgroup
    with pytest.raises(TargetNotInSubgroup):
        validate_group(GroupInstance(23, 11, 2, 5))


def test_validated_instances_have_generator_of_order_p():
    for q, p, x in [(23, 11, 2), (47, 23, 2), (2027, 1013, 4)]:
        inst = validate_group(GroupInstance(q, p, x, mod_pow(x, 5, q)))
        assert mod_pow(inst.x, inst.p, inst.q) == 1

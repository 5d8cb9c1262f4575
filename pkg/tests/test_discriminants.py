import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab.arith import is_squarefree, kronecker, primes_upto
from twistlab.discriminants import (TwistClass, admissible_classes, character_table, chi_over_d,
                                    class_density, enumerate_class, twist_root_number)


def brute_class(cls, X, prime_only=False, lo=0):
    prime_set = set(primes_upto(X).tolist()) if prime_only else None
    out = []
    for m in range(lo + 1, X + 1):
        d = cls.kappa * m
        if d % cls.N0 == cls.residue and is_squarefree(m):
            if prime_only and m not in prime_set:
                continue
            out.append(d)
    return sorted(out)


def test_admissible_classes(curve):
    labels = [c.label() for c in admissible_classes(curve)]
    assert labels == ["+1,1", "+1,9", "+1,17", "+1,25", "-1,5", "-1,13", "-1,21", "-1,29"]


@pytest.mark.parametrize("kappa,a,msg", [(1, 3, "1 or 5 mod 8"), (1, 5, "root number"), (2, 1, "kappa")])
def test_invalid_classes(curve, kappa, a, msg):
    with pytest.raises(ValueError, match=msg):
        TwistClass(curve, kappa, a)


def test_enumerate_examples(cls17):
    assert enumerate_class(cls17, 100).to_array().tolist() == [17]
    assert enumerate_class(cls17, 0).to_array().tolist() == []
    assert enumerate_class(cls17, 100, prime_only=True).to_array().tolist() == [17]


def test_enumerate_matches_scan(curve):
    for cls in admissible_classes(curve):
        for prime_only in (False, True):
            got = sorted(enumerate_class(cls, 20000, prime_only).to_array().tolist())
            assert got == brute_class(cls, 20000, prime_only)
    cls = admissible_classes(curve)[5]
    assert sorted(enumerate_class(cls, 5000, lo=1234).to_array().tolist()) == brute_class(cls, 5000, lo=1234)


def test_enumerate_across_blocks(cls17):
    ds = enumerate_class(cls17, 3 * 2**20 + 17).to_array()
    assert np.all(np.diff(ds) > 0)
    tail = ds[ds > 3 * 2**20 - 5000].tolist()
    assert tail == brute_class(cls17, 3 * 2**20 + 17, lo=3 * 2**20 - 5000)


def test_enumerated_members_have_root_number_one(curve):
    for cls in admissible_classes(curve):
        for d in enumerate_class(cls, 3000).to_array().tolist():
            assert d % 4 == 1 and is_squarefree(abs(d)) and twist_root_number(curve, d) == 1


def test_twist_root_number_examples(curve):
    assert twist_root_number(curve, 17) == 1
    assert twist_root_number(curve, 5) == -1
    assert twist_root_number(curve, 1) == curve.root_number
    with pytest.raises(ValueError):
        twist_root_number(curve, 3)


def test_density_trend(curve):
    dens = class_density(curve)
    errs = []
    for X in (10**4, 10**5, 10**6):
        total = sum(enumerate_class(c, X).to_array().size for c in admissible_classes(curve)[:1])
        errs.append(abs(total / X - dens))
    assert errs[-1] < 0.02 * dens
    assert errs[-1] <= errs[0]


@settings(max_examples=100)
@given(st.integers(-10**5, 10**5).filter(lambda d: d % 4 == 1 and is_squarefree(abs(d)) and d != 1),
       st.integers(1, 999).filter(lambda n: n % 2 == 1))
def test_chi_vectorised_matches_kronecker(d, n):
    assert chi_over_d(np.array([d]), n)[0] == kronecker(d, n)
    tab = character_table(d)
    assert tab[n % abs(d)] == kronecker(d, n)


def test_class_character_constant_on_N0_primes(curve):
    for cls in admissible_classes(curve):
        for d in enumerate_class(cls, 2000).to_array().tolist():
            assert kronecker(d, 2) == cls.chi_at(2)

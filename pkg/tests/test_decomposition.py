import random
from fractions import Fraction
from math import comb

import pytest

from posigraph import decomposition as dec
from posigraph.checks import random_bip, random_sym
from posigraph.decomposition import (Inconclusive, SamplerExhausted, decompose,
                                     decomposition_from_obj, decomposition_to_obj,
                                     induced_sym, reconstruct, rescale_odd, transfer_witness)
from posigraph.density import SymStepFunction, density_bip, density_sym
from posigraph.structures import cycle, fano, grid, levi, single_edge


@pytest.mark.parametrize("r,n", [(2, 2), (2, 4), (3, 2), (3, 3), (4, 2), (5, 2)])
def test_dense_round_trip(r, n, rng):
    for _ in range(5):
        a = random_sym(rng, r, n)
        d = decompose(a, seed=rng.randrange(10 ** 6), method="dense")
        assert d.N == comb(n + r - 1, r)
        assert reconstruct(d) == a


@pytest.mark.parametrize("r,n", [(3, 2), (3, 5), (5, 3)])
def test_sparse_round_trip(r, n, rng):
    for _ in range(5):
        a = random_sym(rng, r, n)
        assert reconstruct(decompose(a, seed=rng.randrange(10 ** 6), method="sparse")) == a


def test_sparse_handles_large_sparse_tensor():
    a = SymStepFunction(3, 400, {(0, 5, 399): 1, (7, 7, 9): Fraction(-2, 3), (3, 3, 3): 5})
    d = decompose(a, seed=4)
    assert reconstruct(d) == a


def test_zero_tensor():
    a = SymStepFunction(3, 2, {})
    assert reconstruct(decompose(a, method="sparse")) == a
    assert reconstruct(decompose(a, method="dense")) == a


def test_seeded_and_deterministic(rng):
    a = random_sym(rng, 3, 3)
    d1, d2 = decompose(a, seed=9), decompose(a, seed=9)
    assert d1.lambdas == d2.lambdas and d1.columns == d2.columns
    assert decompose(a, seed=10).columns != d1.columns


def test_non_uniform_measures_rejected():
    a = SymStepFunction(2, 2, {(0, 0): 1}, [Fraction(1, 3), Fraction(2, 3)])
    with pytest.raises(ValueError):
        decompose(a)
    with pytest.raises(ValueError):
        decompose(SymStepFunction(2, 2, {(0, 0): 1}), method="svd")


def test_sampler_gives_up():
    class Stuck:
        def randint(self, lo, hi):
            return 1

    with pytest.raises(SamplerExhausted):
        dec._sample_spanning(2, 3, Stuck())


@pytest.mark.parametrize("r,n", [(3, 2), (3, 3), (5, 2)])
def test_rescaled_reconstruction_close(r, n, rng):
    a = random_sym(rng, r, n)
    rd = rescale_odd(decompose(a, seed=1), precision=128)
    approx = induced_sym(rd.as_bip(), r)
    worst = max(abs(approx.entry(k) - a.entry(k)) for k in approx.entries.keys() | a.entries.keys())
    assert worst <= rd.tensor_error < Fraction(1, 10 ** 30)
    assert rd.entry_error < Fraction(1, 10 ** 30)


def test_rescale_needs_odd_order(rng):
    with pytest.raises(ValueError):
        rescale_odd(decompose(random_sym(rng, 2, 2)))


def test_induced_sym_definition(rng):
    f = random_bip(rng, 2, 3)
    a = induced_sym(f, 3)
    rows = f.rows()
    for i in range(2):
        for j in range(2):
            for k in range(2):
                assert a.entry((i, j, k)) == sum(rows[i][c] * rows[j][c] * rows[k][c]
                                                 for c in range(3)) / 3


def test_levi_identity(rng):
    for h in [single_edge(3), grid(3), fano()]:
        f = random_bip(rng, 2, 2)
        assert density_bip(levi(h), f) == density_sym(h, induced_sym(f, 3))


def test_transfer_single_edge():
    a = SymStepFunction.constant(3, 1, -1)
    w = transfer_witness(single_edge(3), a, direct=True)
    assert w.certified_negative
    assert w.lower <= w.direct_density <= w.upper
    assert abs(w.direct_density + 1) < Fraction(1, 10 ** 30)


def test_transfer_random_negative(rng):
    h = single_edge(3)
    found = 0
    while found < 3:
        a = random_sym(rng, 3, 2)
        if density_sym(h, a) >= 0:
            continue
        found += 1
        w = transfer_witness(h, a, direct=True, seed=found)
        assert w.lower <= w.direct_density <= w.upper < 0


def test_transfer_preconditions(rng):
    with pytest.raises(ValueError):
        transfer_witness(cycle(4), SymStepFunction.constant(2, 1, -1))
    with pytest.raises(ValueError):
        transfer_witness(single_edge(3), SymStepFunction.constant(3, 1, 1))


def test_transfer_inconclusive_and_precision_doubling():
    vals = {(0, 0, 0): Fraction(-1, 1000), (0, 0, 1): Fraction(1, 3), (0, 1, 1): Fraction(-1, 3)}
    a = SymStepFunction(3, 2, vals)
    with pytest.raises(Inconclusive):
        transfer_witness(single_edge(3), a, precision=8, max_precision=8)
    w = transfer_witness(single_edge(3), a, precision=8, max_precision=4096)
    assert w.precision > 8 and w.certified_negative


def test_decomposition_json(rng):
    d = decompose(random_sym(rng, 3, 2), seed=2)
    back = decomposition_from_obj(decomposition_to_obj(d))
    assert back.lambdas == d.lambdas and back.columns == d.columns

import itertools

import pytest

from freecorr import nc_lattice as ncl
from freecorr.errors import DomainError, ResourceError
from freecorr.nc_lattice import NCPartition, enumerate_nc, kreweras, leq, moebius_to_top


def set_partitions(elements):
    """All set partitions of a list (brute force)."""
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


@pytest.mark.parametrize("r", range(1, 11))
def test_counts_are_catalan(r):
    assert len(enumerate_nc(r)) == ncl.catalan(r)


def test_small_examples():
    assert len(enumerate_nc(1)) == 1
    assert len(enumerate_nc(3)) == 5
    four = enumerate_nc(4)
    assert len(four) == 14
    assert ((1, 3), (2, 4)) not in [p.blocks for p in four]


@pytest.mark.parametrize("r", range(1, 8))
def test_enumeration_matches_filtered_set_partitions(r):
    brute = {
        tuple(sorted(tuple(sorted(b)) for b in p))
        for p in set_partitions(list(range(1, r + 1)))
        if ncl.is_noncrossing(p)
    }
    assert brute == {p.blocks for p in enumerate_nc(r)}


def test_enumeration_is_sorted_and_deterministic():
    a = enumerate_nc(6)
    assert a == sorted(a)
    assert a == enumerate_nc(6)


def test_is_noncrossing_examples():
    assert ncl.is_noncrossing([[1, 2], [3, 4]])
    assert not ncl.is_noncrossing([[1, 3], [2, 4]])
    assert ncl.is_noncrossing([[1, 4], [2, 3]])
    with pytest.raises(DomainError):
        ncl.is_noncrossing([[1, 2], [2, 3]])
    with pytest.raises(DomainError):
        ncl.is_noncrossing([[1, 3]])


def test_constructor_rejects_crossing():
    with pytest.raises(DomainError):
        NCPartition([[1, 3], [2, 4]])


def test_canonical_form_unique():
    assert NCPartition([[3, 2], [1, 4]]) == NCPartition([(1, 4), (2, 3)])
    assert hash(NCPartition([[3, 2], [1, 4]])) == hash(NCPartition([(1, 4), (2, 3)]))


def test_errors_for_bad_r():
    with pytest.raises(DomainError):
        enumerate_nc(0)
    with pytest.raises(ResourceError) as exc:
        enumerate_nc(ncl.R_MAX + 1)
    assert exc.value.cap == ncl.R_MAX
    with pytest.raises(ResourceError):
        enumerate_nc(5, r_max=4)


def test_set_r_max_roundtrip():
    old = ncl.set_r_max(4)
    try:
        with pytest.raises(ResourceError):
            enumerate_nc(5)
    finally:
        ncl.set_r_max(old)
    assert ncl.R_MAX == old


def test_leq_examples():
    for r in range(1, 6):
        zero = NCPartition.singletons(r)
        for p in enumerate_nc(r):
            assert leq(zero, p)
            assert leq(p, p)
            assert leq(p, NCPartition.one(r))
    assert not leq(NCPartition([[1, 2], [3]]), NCPartition([[1, 3], [2]]))
    with pytest.raises(DomainError):
        leq(NCPartition.one(2), NCPartition.one(3))


def test_kreweras_extremes():
    for r in range(1, 8):
        assert kreweras(NCPartition.singletons(r)) == NCPartition.one(r)
        assert kreweras(NCPartition.one(r)) == NCPartition.singletons(r)


def _interleaved_noncrossing(pi, sigma):
    # pi on odd positions 2i-1, sigma on even positions 2i
    blocks = [[2 * i - 1 for i in b] for b in pi.blocks] + [[2 * i for i in b] for b in sigma.blocks]
    return ncl.is_noncrossing(blocks)


@pytest.mark.parametrize("r", range(1, 7))
def test_kreweras_is_maximal_compatible_partition(r):
    """K(pi) is the largest sigma with pi and sigma jointly non-crossing."""
    parts = enumerate_nc(r)
    for pi in parts:
        k = kreweras(pi)
        compatible = [s for s in parts if _interleaved_noncrossing(pi, s)]
        assert k in compatible
        assert all(leq(s, k) for s in compatible)


@pytest.mark.parametrize("r", range(1, 7))
def test_kreweras_injective_and_order_reversing(r):
    parts = enumerate_nc(r)
    images = [kreweras(p) for p in parts]
    assert len(set(images)) == len(parts)
    for s, p in itertools.product(parts, repeat=2):
        if leq(s, p):
            assert leq(kreweras(p), kreweras(s))


@pytest.mark.parametrize("r", range(1, 7))
def test_double_kreweras_is_rotation(r):
    for p in enumerate_nc(r):
        kk = kreweras(kreweras(p))
        rotated = NCPartition([[(i % r) + 1 for i in b] for b in p.blocks], r)
        rotated_back = NCPartition([[((i - 2) % r) + 1 for i in b] for b in p.blocks], r)
        assert kk in (rotated, rotated_back)


def test_moebius_examples():
    assert moebius_to_top(NCPartition.one(5)) == 1
    assert moebius_to_top(NCPartition.singletons(3)) == 2
    assert moebius_to_top(NCPartition.singletons(4)) == -5
    for r in range(1, 9):
        assert moebius_to_top(NCPartition.singletons(r)) == (-1) ** (r - 1) * ncl.catalan(r - 1)


@pytest.mark.parametrize("r", range(1, 9))
def test_moebius_row_sums(r):
    total = sum(moebius_to_top(p) for p in enumerate_nc(r))
    assert total == (1 if r == 1 else 0)
    assert sum(w for _, w, _ in ncl.moebius_profile(r)) == total
    assert sum(c for _, _, c in ncl.moebius_profile(r)) == ncl.catalan(r)


@pytest.mark.parametrize("r", range(1, 7))
def test_moebius_matches_recursive_definition(r):
    parts = enumerate_nc(r)
    top = NCPartition.one(r)
    # mu(pi, 1) = -sum_{pi < s <= 1} mu(s, 1), computed from the top down
    mu = {top: 1}
    for p in sorted(parts, key=len):
        if p == top:
            continue
        mu[p] = -sum(mu[s] for s in parts if s != p and leq(p, s) and s in mu)
    for p in parts:
        assert moebius_to_top(p) == mu[p]

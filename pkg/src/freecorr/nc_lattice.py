"""Non-crossing partitions of {1..r}: enumeration, refinement order,
Kreweras complement and the Moebius function to the top element."""

from functools import lru_cache
from math import comb

from .errors import DomainError, ResourceError

R_MAX = 16


def set_r_max(value):
    """Change the global cap on partition/word sizes; returns the old cap."""
    global R_MAX
    if value < 1:
        raise DomainError("R_max must be positive")
    old, R_MAX = R_MAX, int(value)
    return old


def catalan(k):
    return comb(2 * k, k) // (k + 1)


class NCPartition:
    """A non-crossing partition in canonical form.

    Blocks are sorted tuples, ordered by their minimum. Construction
    validates coverage and the non-crossing condition.
    """

    __slots__ = ("r", "blocks")

    def __init__(self, blocks, r=None):
        blocks = tuple(sorted(tuple(sorted(b)) for b in blocks))
        if r is None:
            r = sum(len(b) for b in blocks)
        _check_partition(blocks, r)
        if not _noncrossing(blocks):
            raise DomainError(f"blocks {blocks} are crossing")
        self.r = r
        self.blocks = blocks

    @classmethod
    def _trusted(cls, blocks, r):
        obj = cls.__new__(cls)
        obj.r = r
        obj.blocks = blocks
        return obj

    def __eq__(self, other):
        if not isinstance(other, NCPartition):
            return NotImplemented
        return self.r == other.r and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.r, self.blocks))

    def __lt__(self, other):
        return (self.r, self.blocks) < (other.r, other.blocks)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return f"NCPartition({inner})"

    def __len__(self):
        return len(self.blocks)

    def block_sizes(self):
        return tuple(len(b) for b in self.blocks)

    def block_of(self):
        """Map element -> index of its block."""
        out = {}
        for k, b in enumerate(self.blocks):
            for i in b:
                out[i] = k
        return out

    def as_permutation(self):
        """Each block read as an increasing cycle; returns a dict i -> next."""
        perm = {}
        for b in self.blocks:
            for a, c in zip(b, b[1:] + b[:1]):
                perm[a] = c
        return perm

    @classmethod
    def singletons(cls, r):
        return cls._trusted(tuple((i,) for i in range(1, r + 1)), r)

    @classmethod
    def one(cls, r):
        return cls._trusted((tuple(range(1, r + 1)),), r)


def _check_partition(blocks, r):
    seen = [x for b in blocks for x in b]
    if any(len(b) == 0 for b in blocks):
        raise DomainError("empty block")
    if sorted(seen) != list(range(1, r + 1)):
        raise DomainError(f"blocks {blocks} do not partition 1..{r}")


def _noncrossing(blocks):
    owner = {}
    for k, b in enumerate(blocks):
        for i in b:
            owner[i] = k
    # a<b<c<d with a,c in one block and b,d in another: check pairs of
    # consecutive elements of each block against the others
    for k, blk in enumerate(blocks):
        for lo, hi in zip(blk, blk[1:]):
            inside = {owner[j] for j in range(lo + 1, hi)}
            for other in inside:
                if other == k:
                    continue
                if any(j < lo or j > hi for j in blocks[other]):
                    return False
    return True


def is_noncrossing(blocks):
    """True iff the set partition ``blocks`` of {1..r} has no crossing."""
    blocks = tuple(sorted(tuple(sorted(b)) for b in blocks))
    _check_partition(blocks, sum(len(b) for b in blocks))
    return _noncrossing(blocks)


def _gen(points):
    """All non-crossing partitions of a sorted tuple of points, as lists of blocks."""
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    n = len(rest)
    # choose the other members of the block of ``first`` as a subset of rest;
    # the gaps between chosen members are filled independently
    def choose(start, chosen):
        yield chosen
        for j in range(start, n):
            yield from choose(j + 1, chosen + (j,))

    for chosen in choose(0, ()):
        block = (first,) + tuple(rest[j] for j in chosen)
        cuts = (-1,) + chosen + (n,)
        gaps = [rest[a + 1:b] for a, b in zip(cuts, cuts[1:])]
        yield from _product_fill(block, gaps)


def _product_fill(block, gaps):
    if not gaps:
        yield [block]
        return
    head, tail = gaps[0], gaps[1:]
    for p in _gen(head):
        for q in _product_fill(block, tail):
            yield p + q


@lru_cache(maxsize=None)
def _nc_table(r):
    out = [tuple(sorted(p)) for p in _gen(tuple(range(1, r + 1)))]
    out.sort()
    return tuple(NCPartition._trusted(b, r) for b in out)


def enumerate_nc(r, r_max=None):
    """All of NC(r) in lexicographic order of canonical block form."""
    cap = R_MAX if r_max is None else r_max
    if not isinstance(r, int) or r < 1:
        raise DomainError(f"r must be a positive integer, got {r!r}")
    if r > cap:
        raise ResourceError(f"NC({r}) exceeds R_max={cap}", size=r, cap=cap)
    return list(_nc_table(r))


def leq(sigma, pi):
    """Refinement order: every block of sigma lies inside a block of pi."""
    if sigma.r != pi.r:
        raise DomainError(f"partitions of different sets ({sigma.r} vs {pi.r})")
    owner = pi.block_of()
    return all(len({owner[i] for i in b}) == 1 for b in sigma.blocks)


def kreweras(pi):
    """Kreweras complement K(pi), computed as the permutation pi^{-1} o gamma
    with gamma the cycle (1 2 ... r)."""
    r = pi.r
    perm = pi.as_permutation()
    inv = {v: k for k, v in perm.items()}
    k_map = {i: inv[i % r + 1] for i in range(1, r + 1)}
    seen = set()
    blocks = []
    for i in range(1, r + 1):
        if i in seen:
            continue
        cyc = []
        j = i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = k_map[j]
        blocks.append(tuple(sorted(cyc)))
    blocks.sort()
    return NCPartition._trusted(tuple(blocks), r)


def moebius_to_top(pi):
    """mu(pi, 1_r): product over blocks V of K(pi) of (-1)^(|V|-1) C_{|V|-1}."""
    out = 1
    for b in kreweras(pi).blocks:
        s = len(b)
        out *= (-1) ** (s - 1) * catalan(s - 1)
    return out


@lru_cache(maxsize=None)
def moebius_profile(r):
    """Aggregate sum of mu(pi, 1_r) over NC(r) grouped by block-size multiset.

    Returns a tuple of (sorted sizes, weight, count) with weight the summed
    Moebius value and count the number of partitions of that type.
    """
    acc = {}
    for pi in _nc_table(r):
        key = tuple(sorted(pi.block_sizes()))
        w, c = acc.get(key, (0, 0))
        acc[key] = (w + moebius_to_top(pi), c + 1)
    return tuple((k, w, c) for k, (w, c) in sorted(acc.items()))

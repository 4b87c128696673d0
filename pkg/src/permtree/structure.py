"""Block structure of tree permutations.

The left-to-right maxima of a tree permutation and the remaining letters
form the two sides of a bipartition of its inversion graph.  Splitting the
positions into maximal runs on one side ("blocks") determines everything
about the tree locally: every neighbor set, every degree, and the spine of
the caterpillar can be read off the block sizes and the first/last letters
of each block.  This module implements those combinatorial shortcuts; the
inversion-graph layer in :mod:`permtree.perm` is the oracle they are
tested against.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import TooSmallError
from .perm import Permutation

W1 = "W1"  # left-to-right maxima side
W0 = "W0"  # the rest


@dataclass(frozen=True)
class Bipartition:
    """Per-position flags: True where the letter is a left-to-right maximum."""

    flags: tuple[bool, ...]

    def interior_bits(self) -> tuple[int, ...]:
        """Flags at positions 2..n-1 as 0/1 bits.

        For a tree permutation this equals the insertion code: letter k was
        inserted with the first-kind move exactly when position k-1 holds a
        left-to-right maximum.
        """
        return tuple(int(f) for f in self.flags[1:-1])


@dataclass(frozen=True)
class Block:
    """Maximal run of same-side positions (1-based inclusive interval)."""

    start_pos: int
    end_pos: int
    side: str
    first_letter: int
    last_letter: int

    @property
    def size(self) -> int:
        return self.end_pos - self.start_pos + 1


@dataclass(frozen=True)
class BlockDecomposition:
    blocks: tuple[Block, ...]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class CentralPath:
    """Spine of a caterpillar, ordered from the low end to the high end."""

    vertices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)


def bipartition(perm: Permutation) -> Bipartition:
    """Flag the left-to-right maxima.

    >>> bipartition(Permutation([2, 4, 1, 3])).flags
    (True, True, False, False)
    """
    flags = []
    running_max = 0
    for v in perm.values:
        flags.append(v > running_max)
        running_max = max(running_max, v)
    return Bipartition(tuple(flags))


def blocks(perm: Permutation) -> BlockDecomposition:
    """Maximal alternating runs of the bipartition flags.

    For a tree permutation the runs alternate W1, W0, W1, ..., W0 (the
    first letter is always a maximum, the last never is), and within a
    block the letters increase, so the first/last letters are the
    smallest/largest of the block.

    >>> blocks(Permutation([4, 1, 2, 3])).sizes
    (1, 3)
    """
    flags = bipartition(perm).flags
    w = perm.values
    out = []
    start = 0
    for pos in range(1, len(w) + 1):
        if pos == len(w) or flags[pos] != flags[start]:
            out.append(
                Block(
                    start_pos=start + 1,
                    end_pos=pos,
                    side=W1 if flags[start] else W0,
                    first_letter=w[start],
                    last_letter=w[pos - 1],
                )
            )
            start = pos
    return BlockDecomposition(tuple(out))


def _letters(perm: Permutation, blk: Block) -> list[int]:
    return list(perm.values[blk.start_pos - 1 : blk.end_pos])


def neighbors_via_blocks(perm: Permutation, pos: int) -> set[int]:
    """Neighbor set of the letter at ``pos`` computed from blocks alone.

    The six cases: a letter that is not the hub of its block pair is a
    leaf hanging off the adjacent hub; the last letter of a W1 block is
    adjacent to all of the following W0 block plus the first letter of the
    W0 block after that (if any); symmetrically for the first letter of a
    W0 block.  Must equal the inversion-graph adjacency on every tree
    permutation.

    >>> w = Permutation([2, 5, 1, 3, 6, 7, 11, 4, 8, 9, 10])
    >>> sorted(neighbors_via_blocks(w, 2))
    [1, 3, 4]
    >>> sorted(neighbors_via_blocks(w, 8))
    [5, 6, 7, 11]
    """
    dec = blocks(perm)
    blks = dec.blocks
    t = next(i for i, b in enumerate(blks) if b.start_pos <= pos <= b.end_pos)
    blk = blks[t]
    v = perm.letter(pos)

    if blk.side == W1:
        if v != blk.last_letter:
            return {blks[t + 1].first_letter}
        nbrs = set(_letters(perm, blks[t + 1]))
        if t + 1 < len(blks) - 1:
            nbrs.add(blks[t + 3].first_letter)
        return nbrs
    if v != blk.first_letter:
        return {blks[t - 1].last_letter}
    nbrs = set(_letters(perm, blks[t - 1]))
    if t - 1 > 0:
        nbrs.add(blks[t - 3].last_letter)
    return nbrs


def adjacency_via_blocks(perm: Permutation) -> list[list[int]]:
    """Full adjacency (indexed by letter, entry 0 unused) in O(n).

    Emits each edge from its W1-side case, which covers the edge set
    exactly once: leaves of a W1 block attach to the first letter of the
    next block, and the last letter of a W1 block takes the whole next
    block plus one letter two blocks further on.
    """
    n = perm.n
    adj: list[list[int]] = [[] for _ in range(n + 1)]
    if n == 1:
        return adj
    blks = blocks(perm).blocks
    w = perm.values
    for t in range(0, len(blks), 2):
        b1, b0 = blks[t], blks[t + 1]
        hub = b0.first_letter
        for p in range(b1.start_pos, b1.end_pos):
            adj[w[p - 1]].append(hub)
            adj[hub].append(w[p - 1])
        tail = b1.last_letter
        for p in range(b0.start_pos, b0.end_pos + 1):
            adj[tail].append(w[p - 1])
            adj[w[p - 1]].append(tail)
        if t + 3 < len(blks):
            far = blks[t + 3].first_letter
            adj[tail].append(far)
            adj[far].append(tail)
    for lst in adj:
        lst.sort()
    return adj


def degree_sequence(perm: Permutation) -> tuple[int, ...]:
    """Degree of the letter at each position, from block sizes only.

    With 2k blocks of sizes b_1, ..., b_2k: inside the i-th pair, all W1
    letters but the last have degree 1, the last W1 letter has degree
    b_2i + 1 (one less for the final pair), the first W0 letter has degree
    b_{2i-1} + 1 (one less for the first pair), and the remaining W0
    letters have degree 1.

    >>> degree_sequence(Permutation([2, 3, 4, 1]))
    (1, 1, 1, 3)
    """
    dec = blocks(perm)
    blks = dec.blocks
    if perm.n == 1:
        return (0,)
    k = len(blks) // 2
    deg = []
    for i in range(1, k + 1):
        b_w1 = blks[2 * i - 2]
        b_w0 = blks[2 * i - 1]
        deg.extend([1] * (b_w1.size - 1))
        deg.append(b_w0.size + 1 - (1 if i == k else 0))
        deg.append(b_w1.size + 1 - (1 if i == 1 else 0))
        deg.extend([1] * (b_w0.size - 1))
    return tuple(deg)


def ordered_spine(adjacency: list[list[int]], n: int, first_letter: int) -> tuple[int, ...]:
    """Walk the nonleaf vertices as a path, starting at the low end.

    ``adjacency`` is indexed by letter with entry 0 unused.  The start is
    the endpoint lying in {1, first_letter}; raises if the nonleaves do
    not form a path (i.e. the graph is not a caterpillar).
    """
    spine = [v for v in range(1, n + 1) if len(adjacency[v]) >= 2]
    if len(spine) == 1:
        return (spine[0],)
    spine_set = set(spine)
    spine_nbrs = {v: [u for u in adjacency[v] if u in spine_set] for v in spine}
    ends = [v for v in spine if len(spine_nbrs[v]) <= 1]
    start = next((v for v in ends if v in (1, first_letter)), None)
    if start is None:
        raise RuntimeError("no spine endpoint in {1, w_1}; not a tree permutation?")
    path = [start]
    prev = None
    while True:
        nxt = [u for u in spine_nbrs[path[-1]] if u != prev]
        if not nxt:
            break
        prev = path[-1]
        path.append(nxt[0])
    if len(path) != len(spine):
        raise RuntimeError("nonleaf vertices do not form a path; not a tree permutation?")
    return tuple(path)


def central_path(perm: Permutation) -> CentralPath:
    """Spine of the caterpillar: the vertices of degree >= 2, path-ordered.

    When the largest letter leads the permutation (or the letter 1 ends
    it) the tree is a star and the spine is the single hub, regardless of
    its degree.  Otherwise the spine has at least two vertices and is
    returned starting from the endpoint lying in {1, first letter}; the
    other endpoint then lies in {n, last letter}.  Reversal is considered
    an equal path by callers that compare spines.

    Rejects n < 3, where the spine is not defined.

    >>> central_path(Permutation([2, 3, 4, 1])).vertices
    (1,)
    >>> central_path(Permutation([2, 4, 1, 3])).vertices
    (1, 4)
    """
    n = perm.n
    if n < 3:
        raise TooSmallError("central path needs n >= 3")
    adj = adjacency_via_blocks(perm)
    return CentralPath(ordered_spine(adj, n, perm.values[0]))

"""Statistics of random permutation trees and of coin-flip sequences.

A uniform tree permutation of length n corresponds to a uniform bit code
of length n-2, and that code is exactly the 0-1 sequence whose blocks
(maximal constant runs) carry the tree's degrees: each block of size k
yields one vertex of degree k+1 and everything else is a leaf.  Feeding
the code through the classic coin-flip coupling (first symbol free, then
one coin per step: tails extends the current block, heads opens a new one)
turns every tree statistic into a run statistic of n-3 fair coin flips:

* leaf count      = n - #blocks          = n - 1 - #heads
* diameter        = n - leaves + 1       = #heads + 2
* maximum degree  = 1 + largest block    = 2 + longest tail run
* degree counts   D_{k+1} = #blocks of size k

The closed forms implemented here (binomial law for leaves and diameter,
the doubly-exponential approximation for the maximum degree, means and
variances of bounded-window counts, the limit covariance of the degree
vector, and the run statistics of geometric samples) are exercised against
exhaustive enumeration and seeded simulation by the test suite.

Scalar functions operate on single sequences; the ``batch_*`` kernels take
a boolean matrix of tosses (True = heads, one row per sample) and are the
vectorized workhorses of the Monte Carlo harness.  The two routes are
independent implementations and are tested against each other.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .codec import TreeCode, decode
from .perm import Permutation, build_graph

HEADS = "H"
TAILS = "T"


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


@dataclass(frozen=True)
class DegreeCensus:
    """How many vertices have each degree; counts[k] = number of degree-k vertices."""

    n: int
    counts: dict[int, int]

    def __post_init__(self):
        assert sum(self.counts.values()) == self.n
        assert sum(k * c for k, c in self.counts.items()) == 2 * (self.n - 1)

    def get(self, k: int) -> int:
        return self.counts.get(k, 0)

    @property
    def max_degree(self) -> int:
        return max(k for k, c in self.counts.items() if c > 0)


@dataclass(frozen=True)
class TreeStats:
    leaves: int
    diameter: int
    max_degree: int
    degree_census: DegreeCensus


def _bfs_farthest(adj: Mapping[int, Iterable[int]], src: int) -> tuple[int, int]:
    dist = {src: 0}
    frontier = [src]
    far, fdist = src, 0
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    if dist[u] > fdist:
                        far, fdist = u, dist[u]
                    nxt.append(u)
        frontier = nxt
    return far, fdist


def tree_stats(perm: Permutation) -> TreeStats:
    """Leaves, diameter, maximum degree and the full degree census.

    The diameter is computed twice, by the identity diameter = n - leaves + 1
    and by a double breadth-first sweep; a mismatch means a bug and raises.

    >>> tree_stats(Permutation([2, 3, 4, 1])).diameter
    2
    """
    n = perm.n
    if n < 2:
        raise ValueError("tree_stats needs n >= 2")
    g = build_graph(perm)
    counts = Counter(g.degree(v) for v in range(1, n + 1))
    census = DegreeCensus(n, dict(counts))
    leaves = census.get(1)
    diameter = n - leaves + 1
    far, _ = _bfs_farthest(g.adjacency, 1)
    _, bfs_diameter = _bfs_farthest(g.adjacency, far)
    if bfs_diameter != diameter:
        raise RuntimeError(
            f"diameter identity violated on {perm}: formula {diameter}, walk {bfs_diameter}"
        )
    return TreeStats(leaves, diameter, census.max_degree, census)


# ---------------------------------------------------------------------------
# Coin sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoinSequence:
    """Outcome of coin flips plus the free opening symbol of the 0-1 coupling.

    ``tosses`` uses 'H'/'T'.  The coupled 0-1 sequence has one more entry
    than there are tosses: tails repeats the previous symbol (extending the
    current block), heads flips it (opening a new block).
    """

    tosses: tuple[str, ...]
    first_symbol: int = 0

    def __post_init__(self):
        if any(t not in (HEADS, TAILS) for t in self.tosses):
            raise ValueError("tosses must be 'H' or 'T'")
        if self.first_symbol not in (0, 1):
            raise ValueError("first_symbol must be 0 or 1")

    @classmethod
    def from_string(cls, text: str, first_symbol: int = 0) -> "CoinSequence":
        return cls(tuple(text), first_symbol)

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "CoinSequence":
        """Recover the coin sequence whose coupled 0-1 sequence is ``bits``."""
        b = [int(x) for x in bits]
        if not b:
            raise ValueError("need at least one bit")
        tosses = tuple(HEADS if x != y else TAILS for x, y in zip(b, b[1:]))
        return cls(tosses, b[0])

    def coupled(self) -> tuple[int, ...]:
        out = [self.first_symbol]
        for t in self.tosses:
            out.append(out[-1] ^ 1 if t == HEADS else out[-1])
        return tuple(out)

    def __len__(self) -> int:
        return len(self.tosses)


@dataclass(frozen=True)
class CoinStats:
    """Run statistics of one coin sequence.

    block_counts[k]   -- blocks of size k in the coupled 0-1 sequence
    window_counts[k]  -- occurrences of H T^(k-1) H in the tosses
    gap_counts[k]     -- occurrences of T H^(k+1) T in the tosses
    longest_tail_run  -- length of the longest run of tails
    """

    block_counts: dict[int, int]
    window_counts: dict[int, int]
    gap_counts: dict[int, int]
    longest_tail_run: int


def run_lengths(symbols: Iterable) -> list[int]:
    """Lengths of the maximal constant runs, in order."""
    out: list[int] = []
    prev = object()
    for s in symbols:
        if s == prev:
            out[-1] += 1
        else:
            out.append(1)
            prev = s
    return out


def coin_stats(seq: CoinSequence) -> CoinStats:
    """Direct scan of one sequence; the oracle for the batch kernels.

    >>> cs = coin_stats(CoinSequence.from_string("THHTTHT", 0))
    >>> cs.block_counts
    {2: 2, 1: 1, 3: 1}
    >>> cs.longest_tail_run
    2
    """
    blocks = Counter(run_lengths(seq.coupled()))

    tosses = seq.tosses
    heads_at = [i for i, t in enumerate(tosses) if t == HEADS]
    windows: Counter = Counter()
    for a, b in zip(heads_at, heads_at[1:]):
        windows[b - a] += 1

    tails_at = [i for i, t in enumerate(tosses) if t == TAILS]
    gaps: Counter = Counter()
    for a, b in zip(tails_at, tails_at[1:]):
        if b - a >= 2:
            gaps[b - a - 2] += 1

    longest = 0
    current = 0
    for t in tosses:
        current = current + 1 if t == TAILS else 0
        longest = max(longest, current)

    return CoinStats(dict(blocks), dict(windows), dict(gaps), longest)


def coupled_tree_stats_equivalence(code: TreeCode) -> bool:
    """Check the degree/block coupling on one code.

    For the tree decoded from ``code`` and the 0-1 sequence equal to the
    code bits: the leaf count is n minus the number of blocks, and for
    every k >= 1 the number of degree-(k+1) vertices equals the number of
    blocks of size k.
    """
    if code.n < 3:
        raise ValueError("coupling needs n >= 3")
    p = decode(code)
    g = build_graph(p)
    census = Counter(g.degree(v) for v in range(1, code.n + 1))
    sizes = run_lengths(code.bits)
    if census.get(1, 0) != code.n - len(sizes):
        return False
    size_counts = Counter(sizes)
    kmax = max(max(size_counts), max(census) - 1)
    return all(census.get(k + 1, 0) == size_counts.get(k, 0) for k in range(1, kmax + 1))


# ---------------------------------------------------------------------------
# Closed-form laws
# ---------------------------------------------------------------------------


def leaves_pmf(n: int, leaves: int) -> Fraction:
    """Exact law of the leaf count: 2 + Binomial(n-3, 1/2).

    >>> leaves_pmf(5, 3)
    Fraction(1, 2)
    >>> leaves_pmf(5, 5)
    Fraction(0, 1)
    """
    if n < 3:
        raise ValueError("leaf law needs n >= 3")
    if not 2 <= leaves <= n - 1:
        return Fraction(0)
    return Fraction(math.comb(n - 3, leaves - 2), 1 << (n - 3))


def diameter_pmf(n: int, diameter: int) -> Fraction:
    """Exact law of the diameter, the reflection d = n - leaves + 1."""
    return leaves_pmf(n, n - diameter + 1)


def maxdeg_cdf_approx(n: int, k: int) -> float:
    """Asymptotic P(max degree - floor(log2(n-3)) < k).

    Doubly exponential limit exp(-2^(-k+1+frac)) with
    frac = log2(n-3) - floor(log2(n-3)); carries an o(1) error in n, so
    comparisons against simulation use an absolute tolerance.

    >>> round(maxdeg_cdf_approx(2051, 0), 4)
    0.1353
    """
    if n < 4:
        raise ValueError("max-degree law needs n >= 4")
    x = math.log2(n - 3)
    frac = x - math.floor(x)
    return math.exp(-(2.0 ** (-k + 1 + frac)))


def y_star_moments(n: int, k: int) -> Moments:
    """Mean and leading-order variance of the H T^(k-1) H window count.

    Over n-3 fair tosses the mean is exact: (n-k-3) / 2^(k+1).  The
    variance returned is the linear leading term

        (2^(k+1) + 3 - 2k) n / 2^(2k+2)  =  sigma_entry(k, k) * n;

    the bounded remainder (exactly -22/16 for k=1, O(k 2^-k) in general) is
    not modeled, so tests compare at a stated tolerance.  The per-toss
    coefficient is the diagonal of the limit covariance; direct enumeration
    over all toss sequences confirms it (see the test suite).

    A restated mean (n-k-1)/2^(k+1) circulates; it would correspond to n-1
    tosses rather than the n-3 this count is defined over.  Exhaustive
    enumeration pins the version used here.

    >>> y_star_moments(10, 2).mean
    0.625
    """
    if k < 1:
        raise ValueError("window parameter k must be >= 1")
    if n < k + 4:
        raise ValueError(f"need n >= k+4, got n={n}, k={k}")
    mean = Fraction(n - k - 3, 1 << (k + 1))
    var = Fraction(((1 << (k + 1)) + 3 - 2 * k) * n, 1 << (2 * k + 2))
    return Moments(float(mean), float(var))


def expected_block_count(n: int, k: int) -> float:
    """Exact mean number of size-k blocks in a uniform 0-1 sequence of length n-2.

    Interior starts contribute 2^-(k+1) each, the two boundary starts
    2^-k each; the whole-sequence block is its own case.
    """
    if n < 3:
        raise ValueError("block law needs n >= 3")
    length = n - 2
    if k < 1 or k > length:
        return 0.0
    if k == length:
        return float(Fraction(1, 1 << (length - 1)))
    return float(Fraction(1, 1 << (k - 1)) + Fraction(length - k - 1, 1 << (k + 1)))


def expected_degree_count(n: int, k: int) -> float:
    """Exact mean number of degree-k vertices in a uniform tree of size n."""
    if n < 3:
        raise ValueError("degree law needs n >= 3")
    if k == 1:
        return (n + 1) / 2
    return expected_block_count(n, k - 1)


def sigma_entry(i: int, j: int) -> float:
    """Limit covariance (per toss) of the window counts for sizes i and j.

    Diagonal: 2^-(i+1) (1 - (2i-3) 2^-(i+1)); off-diagonal: -(i+j-3) 2^-(i+j+2).

    >>> sigma_entry(1, 1) == 5 / 16
    True
    >>> sigma_entry(1, 2)
    0.0
    """
    if i < 1 or j < 1:
        raise ValueError("indices must be >= 1")
    if i == j:
        return (1.0 - (2 * i - 3) / 2.0 ** (i + 1)) / 2.0 ** (i + 1)
    return -(i + j - 3) / 2.0 ** (i + j + 2)


def degree_cov(m: int, tail: int = 64) -> np.ndarray:
    """m x m limit covariance of (D_1, ..., D_m)/sqrt(n).

    The degree vector is the window-count vector pushed through the linear
    map whose first row is all -1 (leaves are n minus everything else) and
    whose remaining rows shift indices by one.  The two infinite sums in
    the first row/column are truncated ``tail`` terms past m; entries decay
    geometrically, so the truncation error is far below any tolerance used
    in tests (< 1e-15).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    cap = m + tail
    sig = np.empty((cap, cap))
    for i in range(1, cap + 1):
        for j in range(1, cap + 1):
            sig[i - 1, j - 1] = sigma_entry(i, j)
    out = np.empty((m, m))
    out[0, 0] = sig.sum()
    for c in range(1, m):
        s = -sig[:, c - 1].sum()
        out[0, c] = s
        out[c, 0] = s
    for r in range(1, m):
        for c in range(1, m):
            out[r, c] = sig[r - 1, c - 1]
    return out


def geometric_runs(n: int, q: float) -> Moments:
    """Exact mean and variance of the number of runs in n iid geometric draws.

    Draws take value j with probability q^(j-1) (1-q).  The run count is
    1 plus the number of adjacent unequal pairs; those indicators are
    1-dependent, giving

        mean = 2q/(1+q) n + (1-q)/(1+q)                     (n >= 1)
        var  = (n-1) v + 2 (n-2) c                          (n >= 2)

    with v the indicator variance 2q(1-q)/(1+q)^2 and c the adjacent
    covariance q(1-q)^3 / ((1+q)^2 (1-q^3)).  The variance grows at rate
    2q(1-q)^2(2+q^2) / ((1+q)^2(1-q^3)) per draw; a single draw always
    forms one run, so the variance at n=1 is zero.

    >>> geometric_runs(1, 0.3).mean
    1.0
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    mean = 2 * q / (1 + q) * n + (1 - q) / (1 + q)
    if n == 1:
        return Moments(mean, 0.0)
    v = 2 * q * (1 - q) / (1 + q) ** 2
    c = q * (1 - q) ** 3 / ((1 + q) ** 2 * (1 - q**3))
    return Moments(mean, (n - 1) * v + 2 * (n - 2) * c)


def geometric_runs_variance_rate(q: float) -> float:
    """Per-draw growth rate of the run-count variance."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    return 2 * q * (1 - q) ** 2 * (2 + q**2) / ((1 + q) ** 2 * (1 - q**3))


# ---------------------------------------------------------------------------
# Batch kernels over toss matrices (rows = samples, True = heads)
# ---------------------------------------------------------------------------


def tosses_from_codes(bits: np.ndarray) -> np.ndarray:
    """Heads matrix of the coin sequences coupled to rows of code bits."""
    if bits.ndim != 2 or bits.shape[1] < 2:
        raise ValueError("need a matrix of at least two code bits per row")
    return bits[:, 1:] != bits[:, :-1]


def batch_head_count(heads: np.ndarray) -> np.ndarray:
    return heads.sum(axis=1, dtype=np.int64)


def _tail_run_lengths_at(heads: np.ndarray) -> np.ndarray:
    """At each tail position, the length of the tail run ending there (else 0)."""
    rows, length = heads.shape
    idx = np.arange(length, dtype=np.int32)
    last_head = np.maximum.accumulate(np.where(heads, idx, np.int32(-1)), axis=1)
    return np.where(heads, np.int32(0), idx - last_head)


def batch_longest_tail_run(heads: np.ndarray) -> np.ndarray:
    """Per-row longest run of tails (0 for all-heads rows)."""
    return _tail_run_lengths_at(heads).max(axis=1)


def batch_tail_run_starts(heads: np.ndarray) -> np.ndarray:
    """Per-row number of maximal tail runs."""
    starts = ~heads
    starts[:, 1:] &= heads[:, :-1]
    return starts.sum(axis=1, dtype=np.int64)


def batch_tail_runs_equal(heads: np.ndarray, r: int) -> np.ndarray:
    """Per-row number of maximal tail runs of length exactly r >= 1."""
    if r < 1:
        raise ValueError("run length must be >= 1")
    lengths = _tail_run_lengths_at(heads)
    ends = ~heads
    ends[:, :-1] &= heads[:, 1:]
    return (ends & (lengths == r)).sum(axis=1, dtype=np.int64)


def batch_window_counts(heads: np.ndarray, k: int) -> np.ndarray:
    """Per-row occurrences of H T^(k-1) H."""
    if k < 1:
        raise ValueError("window parameter k must be >= 1")
    rows, length = heads.shape
    if length < k + 1:
        return np.zeros(rows, dtype=np.int64)
    ok = heads[:, : length - k] & heads[:, k:]
    for t in range(1, k):
        ok = ok & ~heads[:, t : t + length - k]
    return ok.sum(axis=1, dtype=np.int64)


def batch_degree_counts(heads: np.ndarray, n: int, kmax: int) -> np.ndarray:
    """Per-row degree census columns D_1 .. D_kmax for trees of size n."""
    rows, length = heads.shape
    if length != n - 3:
        raise ValueError(f"expected n-3 = {n - 3} tosses per row, got {length}")
    out = np.zeros((rows, kmax), dtype=np.int64)
    nblocks = 1 + batch_head_count(heads)
    out[:, 0] = n - nblocks
    if kmax >= 2:
        out[:, 1] = nblocks - batch_tail_run_starts(heads)
    for k in range(3, kmax + 1):
        out[:, k - 1] = batch_tail_runs_equal(heads, k - 2)
    return out

"""Shared brute-force oracles for the test suite.

Everything here is deliberately naive: direct subsequence searches, graph
walks over explicit edge lists, exhaustive sweeps.  The library under test
must agree with these on every small instance.
"""
from __future__ import annotations

from itertools import combinations, permutations

import pytest

from permtree.perm import Permutation


def naive_inversions(values):
    n = len(values)
    return [
        (values[a], values[b])
        for a in range(n)
        for b in range(a + 1, n)
        if values[a] > values[b]
    ]


def naive_edges(values):
    return {tuple(sorted(p)) for p in naive_inversions(values)}


def graph_components(n, edges):
    """Vertex sets of the connected components, by breadth-first search."""
    adj = {v: set() for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen = set()
    comps = []
    for s in range(1, n + 1):
        if s in seen:
            continue
        comp = {s}
        frontier = [s]
        while frontier:
            v = frontier.pop()
            for u in adj[v]:
                if u not in comp:
                    comp.add(u)
                    frontier.append(u)
        seen |= comp
        comps.append(comp)
    return comps


def graph_is_connected(n, edges):
    return len(graph_components(n, edges)) == 1


def graph_is_acyclic(n, edges):
    comps = graph_components(n, edges)
    return len(edges) == n - len(comps)


def graph_is_tree(n, edges):
    return graph_is_connected(n, edges) and len(edges) == n - 1


def naive_is_tree(values):
    return graph_is_tree(len(values), naive_edges(values))


def naive_pattern_321(values):
    return any(a > b > c for a, b, c in combinations(values, 3))


def naive_pattern_3412(values):
    return any(
        w[2] < w[3] < w[0] < w[1] for w in combinations(values, 4)
    )


def all_perms(n):
    for vals in permutations(range(1, n + 1)):
        yield vals


def brute_force_trees(n):
    """All tree permutations of length n, by scanning S_n."""
    return {vals for vals in all_perms(n) if naive_is_tree(vals)}


def bfs_distances(adj, src):
    dist = {src: 0}
    frontier = [src]
    while frontier:
        nxt = []
        for v in frontier:
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    nxt.append(u)
        frontier = nxt
    return dist


def tree_diameter_bfs(n, edges):
    """Longest path length (in edges) of a tree, by double sweep."""
    adj = {v: [] for v in range(1, n + 1)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    d0 = bfs_distances(adj, 1)
    far = max(d0, key=d0.get)
    d1 = bfs_distances(adj, far)
    return max(d1.values())


def min_cover_brute(n, edges):
    """Smallest vertex set meeting every edge, by subset enumeration."""
    verts = list(range(1, n + 1))
    for size in range(n + 1):
        for chosen in combinations(verts, size):
            cs = set(chosen)
            if all(u in cs or v in cs for u, v in edges):
                return size
    raise AssertionError("unreachable")


@pytest.fixture(scope="session")
def trees_up_to_8():
    """n -> set of tree permutations found by brute force, n = 1..8."""
    return {n: brute_force_trees(n) for n in range(1, 9)}


def perm(values) -> Permutation:
    return Permutation(values)

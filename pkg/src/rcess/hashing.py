"""Pairwise inner-product hashes, their threshold sharing, and corruption detection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import networkx as nx
import numpy as np

from .errors import DetectionAbort, HashRecoveryError, ParameterError
from .field import Field


@dataclass(frozen=True)
class HashGraph:
    """Which party pairs carry a hash.  Edges are ``(i, j)`` with ``i < j``, 1-indexed."""

    n: int
    edges: tuple[tuple[int, int], ...]
    mode: str = "complete"
    seed: int | None = None
    attempts: int = 1

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def _within(self) -> dict:
        return {}

    def edges_within(self, parties: Sequence[int]) -> list[int]:
        """Indices of edges with both endpoints in ``parties`` (graph order)."""
        key = frozenset(int(p) for p in parties)
        hit = self._within.get(key)
        if hit is None:
            hit = [i for i, (a, b) in enumerate(self.edges) if a in key and b in key]
            self._within[key] = hit
        return list(hit)

    def pair_positions(self, parties: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """Row positions (within ``parties``) of both endpoints of each inner edge."""
        ids = tuple(int(p) for p in parties)
        key = ("pos", ids)
        hit = self._within.get(key)
        if hit is None:
            pos = {p: i for i, p in enumerate(ids)}
            sub = self.edges_within(ids)
            hit = (np.array([pos[self.edges[e][0]] for e in sub], dtype=np.intp),
                   np.array([pos[self.edges[e][1]] for e in sub], dtype=np.intp))
            self._within[key] = hit
        return hit

    @cached_property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Zero-based endpoint arrays of every edge."""
        return (np.array([a - 1 for a, _ in self.edges], dtype=np.intp),
                np.array([b - 1 for _, b in self.edges], dtype=np.intp))

    def is_connected(self) -> bool:
        g = nx.Graph()
        g.add_nodes_from(range(1, self.n + 1))
        g.add_edges_from(self.edges)
        return nx.is_connected(g)


def complete_graph(n: int) -> HashGraph:
    return HashGraph(n, tuple(itertools.combinations(range(1, n + 1), 2)), "complete")


def sparse_edge_probability(n: int) -> float:
    return (math.log(n) + math.log(math.log(n))) / n


def _sample_sparse(n: int, p: float, seed: int) -> tuple[tuple[int, int], ...]:
    # every vertex picks each other vertex independently; a pair is hashed if
    # either endpoint picked it
    rng = np.random.default_rng(seed)
    picks = rng.random((n, n)) < p
    np.fill_diagonal(picks, False)
    sym = picks | picks.T
    return tuple((i + 1, j + 1) for i, j in zip(*np.nonzero(np.triu(sym, 1))))


def build_sparse_graph(n: int, seed: int) -> HashGraph:
    """Random connected hash graph with expected out-degree ln n + ln ln n.

    Falls back to the complete graph when the pick probability reaches 1.
    Resamples with ``seed + 1, seed + 2, ...`` until connected; ``attempts``
    records how many samples were drawn.
    """
    if n < 3:
        raise ParameterError("sparse hash graphs need n >= 3")
    p = sparse_edge_probability(n)
    if p >= 1:
        g = complete_graph(n)
        return HashGraph(n, g.edges, "sparse", seed, 1)
    attempt = 0
    while True:
        edges = _sample_sparse(n, p, seed + attempt)
        attempt += 1
        g = HashGraph(n, edges, "sparse", seed, attempt)
        if g.is_connected():
            return g


def compute_hashes(field: Field, shares: np.ndarray, graph: HashGraph) -> np.ndarray:
    """One inner product per column and edge; shape ``(alpha, |edges|)``."""
    W = np.asarray(shares, dtype=np.int64)
    if not graph.edges:
        return np.zeros((W.shape[1], 0), dtype=np.int64)
    I, J = graph.endpoints
    prod = W[I] * W[J]
    if W.shape[2] * (field.q - 1) ** 2 >= 2**63:
        prod %= field.q
    return (prod.sum(axis=2) % field.q).T.copy()


def shamir_share(field: Field, values: np.ndarray, points: Sequence[int], masks: np.ndarray) -> np.ndarray:
    """Evaluate ``values + sum_t masks[t-1] x^t`` at every point.

    ``masks`` has shape ``(z, *values.shape)``; the result has shape
    ``(len(points), *values.shape)``.
    """
    values = np.asarray(values, dtype=np.int64)
    masks = np.asarray(masks, dtype=np.int64)
    z = masks.shape[0]
    if z == 0:
        return np.broadcast_to(values, (len(points),) + values.shape).copy()
    P = _mask_powers(field, tuple(int(x) for x in points), z)
    masked = field.matmul(P, masks.reshape(z, -1)).reshape((len(points),) + values.shape)
    return (masked + values) % field.q


@lru_cache(maxsize=1024)
def _mask_powers(field: Field, points: tuple[int, ...], z: int) -> np.ndarray:
    P = np.array([field.powers(x, z + 1)[1:] for x in points], dtype=np.int64)
    P.setflags(write=False)
    return P


def share_hashes(field: Field, hashes: np.ndarray, n: int, z_r: int, rng: np.random.Generator) -> np.ndarray:
    """Shamir-share every hash element (threshold ``z_r + 1``) to parties 1..n."""
    if n >= field.q:
        raise ParameterError(f"F_{field.q} has too few nonzero points for n={n}")
    masks = field.random(rng, (z_r,) + np.shape(hashes))
    return shamir_share(field, hashes, range(1, n + 1), masks)


@lru_cache(maxsize=4096)
def _recovery_plan(field: Field, ids: tuple[int, ...], k_h: int):
    subsets = list(itertools.combinations(range(len(ids)), k_h))
    idx = np.array(subsets, dtype=np.int64)
    full = np.stack([field.lagrange_matrix([ids[i] for i in s], ids) for s in subsets])
    at0 = np.stack([field.lagrange_matrix([ids[i] for i in s], [0])[0] for s in subsets])
    return idx, full, at0


def recover_hashes(field: Field, shares, z_r: int, z_w: int) -> np.ndarray:
    """Recover hash elements from possibly corrupted shares.

    ``shares`` maps party id to an array of hash shares (any shape, equal
    across parties).  For each element, every ``z_r + 1``-subset is
    interpolated; a candidate is accepted when it agrees with at least
    ``d - z_w`` shares.  No accepted candidate, or two distinct ones, raises
    HashRecoveryError.
    """
    pairs = list(shares.items()) if isinstance(shares, dict) else list(shares)
    ids = tuple(int(p) for p, _ in pairs)
    d = len(ids)
    if d < z_r + z_w + 1:
        raise ParameterError(f"hash recovery needs d >= z_r + z_w + 1 = {z_r + z_w + 1}, got {d}")
    Y = np.stack([np.asarray(s, dtype=np.int64) for _, s in pairs])
    shape = Y.shape[1:]
    Y = Y.reshape(d, -1) % field.q
    m = Y.shape[1]
    if m == 0:
        return np.zeros(shape, dtype=np.int64)
    idx, full, at0 = _recovery_plan(field, ids, z_r + 1)
    # any candidate reaching d - z_w >= z_r + 1 agreements is unique, so a
    # first subset consistent with every share settles all elements
    head = Y[idx[0]]
    if np.array_equal(field.matmul(full[0], head), Y):
        return field.matmul(at0[0][None, :], head)[0].reshape(shape)
    ys = Y[idx]                                          # (S, k_h, m)
    pred = field.matmul(full, ys)                        # (S, d, m)
    ok = (pred == Y[None]).sum(axis=1) >= d - z_w        # (S, m)
    accepted = ok.any(axis=0)
    if not accepted.all():
        raise HashRecoveryError("hash recovery failure: no candidate reached the agreement threshold")
    first = ok.argmax(axis=0)
    cols = np.arange(m)
    best = pred[first, :, cols]                          # (m, d)
    differs = np.any(pred != best.T[None], axis=1)       # (S, m)
    if np.any(ok & differs):
        raise HashRecoveryError("hash recovery failure: competing candidates")
    value = (at0[first] * ys[first, :, cols]).sum(axis=1) % field.q
    return value.reshape(shape)


@dataclass(frozen=True)
class MatchTable:
    """Pairwise comparison outcome among contacted parties.

    ``match[a, b]`` is meaningful only where ``tested[a, b]``; the diagonal is
    matched by convention.
    """

    parties: tuple[int, ...]
    match: np.ndarray
    tested: np.ndarray

    def mismatches(self) -> np.ndarray:
        return self.tested & ~self.match

    def mismatch_counts(self) -> dict[int, int]:
        c = self.mismatches().sum(axis=1)
        return {p: int(x) for p, x in zip(self.parties, c)}

    def status(self, i: int, j: int) -> bool | None:
        a, b = self.parties.index(i), self.parties.index(j)
        return bool(self.match[a, b]) if self.tested[a, b] else None


def build_match_table(field: Field, payloads, verified: np.ndarray, graph: HashGraph,
                      n_cols: int) -> MatchTable:
    """Compare recomputed inner products with the verified hashes.

    ``payloads`` maps party id to its downloaded ``(n_cols, v)`` packets;
    ``verified`` has shape ``(n_cols, m)`` for the ``m`` edges among the
    contacted parties, in graph order.
    """
    pairs = list(payloads.items()) if isinstance(payloads, dict) else list(payloads)
    ids = tuple(int(p) for p, _ in pairs)
    Y = np.stack([np.asarray(x)[:n_cols] for _, x in pairs]).astype(np.int64, copy=False)
    I, J = graph.pair_positions(ids)
    verified = np.asarray(verified, dtype=np.int64).reshape(n_cols, len(I))
    d = len(ids)
    match = np.eye(d, dtype=bool)
    tested = match.copy()
    if len(I):
        prod = Y[I] * Y[J]
        if Y.shape[2] * (field.q - 1) ** 2 >= 2**63:
            prod %= field.q
        ok = np.all(prod.sum(axis=2) % field.q == verified.T, axis=1)  # per edge
        match[I, J] = match[J, I] = ok
        tested[I, J] = tested[J, I] = True
    return MatchTable(ids, match, tested)


def _clears(bad_edges, good_nbrs, keep: int) -> bool:
    """``keep`` is a party bitmask; survivors need no mismatch and one matching component."""
    for a, b in bad_edges:
        if keep >> a & 1 and keep >> b & 1:
            return False
    seen = keep & -keep
    frontier = seen
    while frontier:
        reach = 0
        f = frontier
        while f:
            low = f & -f
            reach |= good_nbrs[low.bit_length() - 1]
            f ^= low
        frontier = reach & keep & ~seen
        seen |= frontier
    return seen == keep


def detect_corrupt(table: MatchTable, z_w: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Find the parties to discard.

    Looks for the smallest removal set (at most ``z_w`` parties) after which
    the survivors have no mismatching tested pair and their matching pairs
    form one connected component.  The set must be unique at that size;
    otherwise the evidence cannot tell honest from corrupt parties and
    DetectionAbort is raised.  Returns ``(honest, removed)``.
    """
    ids = table.parties
    d = len(ids)
    mm = table.mismatches().tolist()
    bad = [(a, b) for a in range(d) for b in range(a + 1, d) if mm[a][b]]
    good_nbrs = [sum(1 << j for j, g in enumerate(row) if g)
                 for row in (table.tested & table.match).tolist()]
    full = (1 << d) - 1
    if _clears(bad, good_nbrs, full):
        return ids, ()
    for size in range(1, z_w + 1):
        hits = []
        for removed in itertools.combinations(range(d), size):
            mask = sum(1 << i for i in removed)
            if _clears(bad, good_nbrs, full & ~mask):
                hits.append(removed)
                if len(hits) > 1:
                    raise DetectionAbort(
                        f"detection abort: ambiguous removal sets of size {size}")
        if hits:
            rem = set(hits[0])
            return (tuple(p for i, p in enumerate(ids) if i not in rem),
                    tuple(ids[i] for i in hits[0]))
    raise DetectionAbort(f"detection abort: no removal of at most {z_w} parties clears the table")


def hash_overhead(graph: HashGraph, v: int, alpha: int = 1) -> Fraction:
    """Hash elements stored per party divided by payload elements per party."""
    return Fraction(alpha * len(graph.edges), alpha * v)

"""Flow-graph model of dealer, parties and users, with max-flow and cut accounting.

Vertices are ``"D"``, ``"P{i}in"``, ``"P{i}out"`` and ``"U{j}"``.  Infinite
capacities are encoded as ``n * alpha * v + 1``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParameterError

Number = int | Fraction


@dataclass(frozen=True)
class FlowGraph:
    n: int
    storage: int                 # alpha * v per party
    users: tuple[tuple[int, ...], ...]
    vertices: tuple[str, ...]
    edges: dict
    infinity: int

    @property
    def source(self) -> str:
        return "D"

    def user(self, j: int) -> str:
        return f"U{j}"

    def cut_value(self, sink_side: Iterable[str]) -> Number:
        """Total capacity of edges leaving the complement of ``sink_side``."""
        v2 = set(sink_side)
        if self.source in v2:
            raise ParameterError("the source must lie on the source side of a cut")
        return sum((c for (a, b), c in self.edges.items() if a not in v2 and b in v2), 0)


def build_graph(n: int, storage: int, users: Sequence[Iterable[int]], beta: Number | None = None) -> FlowGraph:
    """Dealer D, party pairs P_in -> P_out of capacity ``storage``, users U_1.. as sinks.

    ``users[j-1]`` lists the parties user ``j`` contacts.  With ``beta`` the
    party-to-user edges carry ``beta`` instead of infinity.
    """
    if n < 1 or storage < 1:
        raise ParameterError("need n >= 1 and positive storage")
    groups = []
    for u in users:
        g = tuple(sorted({int(i) for i in u}))
        if not g:
            raise ParameterError("a user must contact at least one party")
        if g[0] < 1 or g[-1] > n:
            raise ParameterError(f"contacted parties must lie in 1..{n}")
        groups.append(g)
    if not groups:
        raise ParameterError("at least one user is required")
    inf = n * storage + 1
    vertices = ["D"]
    for i in range(1, n + 1):
        vertices += [f"P{i}in", f"P{i}out"]
    vertices += [f"U{j}" for j in range(1, len(groups) + 1)]
    edges: dict = {}
    for i in range(1, n + 1):
        edges[("D", f"P{i}in")] = inf
    for i in range(1, n + 1):
        edges[(f"P{i}in", f"P{i}out")] = storage
    for j, g in enumerate(groups, start=1):
        for i in g:
            edges[(f"P{i}out", f"U{j}")] = inf if beta is None else beta
    return FlowGraph(n, storage, tuple(groups), tuple(vertices), edges, inf)


def max_flow(graph: FlowGraph, source: str, sink: str) -> tuple[Number, set]:
    """Edmonds-Karp.  Returns the flow value and the source side of a min cut."""
    if source == sink:
        raise ParameterError("source and sink must differ")
    residual: dict = {v: {} for v in graph.vertices}
    for (a, b), c in graph.edges.items():
        residual[a][b] = residual[a].get(b, 0) + c
        residual[b].setdefault(a, 0)
    total: Number = 0
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            a = queue.popleft()
            for b, c in residual[a].items():
                if c > 0 and b not in parent:
                    parent[b] = a
                    queue.append(b)
        if sink not in parent:
            return total, set(parent)
        path = []
        b = sink
        while parent[b] is not None:
            path.append((parent[b], b))
            b = parent[b]
        push = min(residual[a][b] for a, b in path)
        for a, b in path:
            residual[a][b] -= push
            residual[b][a] += push
        total += push


def min_cut(graph: FlowGraph, source: str = "D", sink: str = "U1") -> Number:
    return max_flow(graph, source, sink)[0]


def two_user_network(storage: int) -> FlowGraph:
    """Four parties, user 1 contacts {1, 2} and user 2 contacts three parties."""
    return build_graph(4, storage, [(1, 2), (2, 3, 4)])


def single_user_network(n: int, k: int, storage: int, beta: Number | None = None) -> FlowGraph:
    """A single user contacting parties 1..k."""
    if not 1 <= k <= n:
        raise ParameterError("need 1 <= k <= n")
    return build_graph(n, storage, [range(1, k + 1)], beta)


@dataclass(frozen=True)
class CutAccounting:
    """Split of the user's incoming edges by what the adversary controls.

    ``e1``, ``e2`` and ``e3`` are the P_in -> P_out edges of the read-only,
    written and honest contacted parties.  In the omniscient model ``e3`` is
    split again: ``shadow`` holds as many honest parties as there are writers.
    """

    read: tuple[int, ...]
    write: tuple[int, ...]
    honest: tuple[int, ...]
    shadow: tuple[int, ...] = ()

    @staticmethod
    def edges_of(parties: Iterable[int]) -> list[tuple[str, str]]:
        return [(f"P{i}in", f"P{i}out") for i in parties]

    @property
    def e1(self):
        return self.edges_of(self.read)

    @property
    def e2(self):
        return self.edges_of(self.write)

    @property
    def e3(self):
        return self.edges_of(self.shadow + self.honest)


def _split(k: int, z_ro: int, z_wo: int, z_rw: int, mode: str) -> CutAccounting:
    z_w = z_wo + z_rw
    parties = list(range(1, k + 1))
    read = tuple(parties[:z_ro])
    write = tuple(parties[z_ro:z_ro + z_w])
    rest = parties[z_ro + z_w:]
    if mode == "omniscient":
        return CutAccounting(read, write, tuple(rest[z_w:]), tuple(rest[:z_w]))
    return CutAccounting(read, write, tuple(rest))


def _condition(k, z_ro, z_wo, z_rw, mode) -> bool:
    if mode == "lk":
        return k > 2 * z_rw + 2 * z_wo + z_ro
    if mode == "omniscient":
        return k > 3 * z_rw + 2 * z_wo + z_ro
    raise ParameterError(f"unknown mode {mode!r}")


def converse_bound(n: int, k: int, z: Sequence[int], storage: int, mode: str = "lk") -> Number:
    """Secret-size upper bound read off the single-user cut.

    Starts from the min cut ``k * storage`` of a user contacting k parties,
    discards the written edges (and, omnisciently, as many honest ones the
    user cannot tell apart from them), then removes ``z_r * storage`` for
    privacy.  Zero when the mode condition fails.
    """
    z_ro, z_wo, z_rw = (int(x) for x in z)
    if not 1 <= k <= n:
        raise ParameterError("need 1 <= k <= n")
    if not _condition(k, z_ro, z_wo, z_rw, mode):
        return 0
    g = single_user_network(n, k, storage)
    cut = min_cut(g, "D", "U1")
    acc = _split(k, z_ro, z_wo, z_rw, mode)
    discarded = len(acc.e2) + len(acc.shadow)
    usable = cut - discarded * storage
    return max(usable - (z_ro + z_rw) * storage, 0)


def download_bound(n: int, k: int, z: Sequence[int], storage: int, d: int, mode: str = "lk") -> Fraction:
    """Smallest total download d * beta for a user contacting d parties.

    With party-to-user edges of capacity beta the trivial cut is d * beta.
    Discarding adversarial and privacy edges leaves ``(d - loss) * beta``
    useful units, which must cover the secret size.
    """
    if not k <= d <= n:
        raise ParameterError(f"d={d} outside [k, n]")
    secret = converse_bound(n, k, z, storage, mode)
    if secret == 0:
        return Fraction(0)
    z_ro, z_wo, z_rw = (int(x) for x in z)
    loss = z_ro + 2 * z_rw + z_wo if mode == "lk" else z_ro + 3 * z_rw + 2 * z_wo
    beta = Fraction(secret, d - loss)
    g = single_user_network(n, d, storage, beta)
    return Fraction(g.cut_value({"U1"}))

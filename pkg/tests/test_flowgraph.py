import itertools
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from rcess import flowgraph as fg
from rcess import scheme as sm
from rcess.errors import ParameterError
from rcess.field import next_prime


def nx_flow(graph, source, sink):
    g = nx.DiGraph()
    g.add_nodes_from(graph.vertices)
    for (a, b), c in graph.edges.items():
        g.add_edge(a, b, capacity=c)
    return nx.maximum_flow_value(g, source, sink)


def test_two_user_network_shape():
    g = fg.two_user_network(2)
    assert len(g.vertices) == 11 and len(g.edges) == 13
    only_u1 = fg.build_graph(4, 2, [(1, 2)])
    assert len(only_u1.vertices) == 10 and len(only_u1.edges) == 10
    assert g.infinity == 4 * 2 + 1


@pytest.mark.parametrize("storage", [1, 2, 3, 8])
def test_two_user_cut(storage):
    g = fg.two_user_network(storage)
    assert fg.min_cut(g, "D", "U1") == 2 * storage
    assert fg.min_cut(g, "D", "U2") == 3 * storage
    # the named cut: storage edges of the two contacted parties
    assert g.cut_value({"P1out", "P2out", "U1"}) == 2 * storage


@pytest.mark.parametrize("n,k", [(4, 3), (5, 2), (7, 7), (10, 4)])
def test_single_user_cut(n, k):
    g = fg.single_user_network(n, k, 3)
    assert fg.min_cut(g) == k * 3
    named = {f"P{i}out" for i in range(1, k + 1)} | {"U1"}
    assert g.cut_value(named) == k * 3


def test_single_party_path():
    g = fg.build_graph(1, 5, [(1,)])
    assert set(g.edges) == {("D", "P1in"), ("P1in", "P1out"), ("P1out", "U1")}
    assert fg.min_cut(g) == 5


def test_beta_edges():
    g = fg.single_user_network(5, 3, 4, beta=Fraction(3, 2))
    assert all(c == Fraction(3, 2) for (a, b), c in g.edges.items() if b == "U1")
    assert fg.min_cut(g) == Fraction(9, 2)


def test_disconnected_sink():
    g = fg.build_graph(3, 2, [(1,)])
    g.edges.pop(("P1out", "U1"))
    assert fg.min_cut(g) == 0


def test_build_rejects():
    for users in ([()], [(0,)], [(5,)], []):
        with pytest.raises(ParameterError):
            fg.build_graph(4, 2, users)
    with pytest.raises(ParameterError):
        fg.build_graph(4, 0, [(1,)])
    with pytest.raises(ParameterError):
        fg.max_flow(fg.two_user_network(1), "D", "D")
    with pytest.raises(ParameterError):
        fg.two_user_network(1).cut_value({"D"})


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(1, 6), st.data())
def test_matches_networkx(n, storage, data):
    users = data.draw(st.lists(st.sets(st.integers(1, n), min_size=1), min_size=1, max_size=3))
    g = fg.build_graph(n, storage, users)
    for j in range(1, len(users) + 1):
        assert fg.min_cut(g, "D", f"U{j}") == nx_flow(g, "D", f"U{j}")
        assert fg.min_cut(g, "D", f"U{j}") == len(users[j - 1]) * storage


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 5), st.data())
def test_relabel_invariance(n, storage, data):
    users = data.draw(st.lists(st.sets(st.integers(1, n), min_size=1), min_size=1, max_size=2))
    perm = data.draw(st.permutations(range(1, n + 1)))
    relabel = dict(zip(range(1, n + 1), perm))
    g = fg.build_graph(n, storage, users)
    h = fg.build_graph(n, storage, [{relabel[i] for i in u} for u in users])
    for j in range(1, len(users) + 1):
        assert fg.min_cut(g, "D", f"U{j}") == fg.min_cut(h, "D", f"U{j}")


def test_random_capacities_against_networkx():
    import random
    rnd = random.Random(3)
    for _ in range(40):
        g = fg.build_graph(5, 4, [(1, 2, 3), (3, 4, 5)])
        for e in g.edges:
            g.edges[e] = rnd.randint(0, 9)
        for sink in ("U1", "U2"):
            assert fg.min_cut(g, "D", sink) == nx_flow(g, "D", sink)


def test_source_side_is_a_min_cut():
    g = fg.two_user_network(3)
    value, side = fg.max_flow(g, "D", "U1")
    sink_side = set(g.vertices) - side
    assert g.cut_value(sink_side) == value


def test_cut_accounting_split():
    acc = fg._split(5, 1, 1, 1, "lk")
    assert (acc.read, acc.write, acc.honest) == ((1,), (2, 3), (4, 5))
    assert acc.e1 == [("P1in", "P1out")]
    acc = fg._split(6, 0, 0, 1, "omniscient")
    assert (acc.write, acc.shadow, acc.honest) == ((1,), (2,), (3, 4, 5, 6))
    assert len(acc.e3) == 5


def test_converse_examples():
    assert fg.converse_bound(4, 3, (0, 0, 1), 2) == 2
    assert fg.converse_bound(4, 3, (0, 0, 1), 2, "omniscient") == 0
    assert fg.converse_bound(5, 3, (0, 0, 0), 7) == 21
    with pytest.raises(ParameterError):
        fg.converse_bound(4, 3, (0, 0, 1), 2, "other")


def grid(max_n):
    for n in range(1, max_n + 1):
        q = next_prime(n + 1)
        for k in range(1, n + 1):
            for z in itertools.product(range(k), repeat=3):
                if z[0] + z[2] >= k:
                    continue
                for mode in ("lk", "omniscient"):
                    yield sm.SchemeParams(n, k, *z, q=q, mode=mode)


def test_converse_matches_capacity_small_grid():
    for p in grid(7):
        storage = p.staircase.alpha * p.v if p.feasible else 1
        got = fg.converse_bound(p.n, p.k, (p.z_ro, p.z_wo, p.z_rw), storage, p.mode)
        assert got == sm.capacity(p)
        if p.feasible:
            for d in range(p.k, p.n + 1):
                assert fg.download_bound(p.n, p.k, (p.z_ro, p.z_wo, p.z_rw), storage, d, p.mode) \
                    == sm.comm_cost(p, d)


def test_download_bound_worked_example():
    assert fg.download_bound(4, 3, (0, 0, 1), 2, 4) == 4
    assert fg.download_bound(4, 3, (0, 0, 1), 2, 3) == 6
    with pytest.raises(ParameterError):
        fg.download_bound(4, 3, (0, 0, 1), 2, 2)

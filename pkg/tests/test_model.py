import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from suffstat.graphs import Graph, GraphError, format_graph, parse_graph, random_regular_graph
from suffstat.model import (
    ModelError,
    all_states,
    build_antiferro_ising,
    build_dense_model,
    eval_log_weight,
    log_weight_table,
)


def test_uniform_dense_model():
    m = build_dense_model(1, [0, 0])
    assert eval_log_weight(m, [0]) == 0 and eval_log_weight(m, [1]) == 0


def test_dense_table_matches_single_edge(edge):
    dense = build_dense_model(2, [0, 1, 1, 0])
    for x in all_states(2):
        assert eval_log_weight(dense, x) == eval_log_weight(edge, x)


@pytest.mark.parametrize("table", [[0, np.inf], [0, np.nan], [0, 0, 0]])
def test_dense_rejects_bad_tables(table):
    with pytest.raises(ModelError):
        build_dense_model(1, table)


def test_dense_rejects_p_over_cap():
    with pytest.raises(ModelError):
        build_dense_model(3, np.zeros(8), cap=2)


def test_bit_order_lsb_first():
    m = build_dense_model(2, [10.0, 11.0, 12.0, 13.0])
    assert eval_log_weight(m, [1, 0]) == 11.0
    assert eval_log_weight(m, [0, 1]) == 12.0
    np.testing.assert_array_equal(all_states(2), [[0, 0], [1, 0], [0, 1], [1, 1]])


def test_antiferro_values(edge, cycle4):
    assert eval_log_weight(edge, [0, 1]) == pytest.approx(1.0)
    assert eval_log_weight(edge, [1, 0]) == pytest.approx(1.0)
    assert eval_log_weight(edge, [0, 0]) == 0.0
    assert eval_log_weight(cycle4, [0, 1, 0, 1]) == pytest.approx(2.4)
    assert eval_log_weight(cycle4, [0, 0, 1, 1]) == pytest.approx(1.2)


def test_antiferro_rejects_negative_beta():
    with pytest.raises(ModelError):
        build_antiferro_ising(Graph.cycle(4), -0.1)


def test_length_mismatch(edge):
    with pytest.raises(ModelError):
        eval_log_weight(edge, [0, 1, 0])


def test_table_agrees_with_edge_enumeration():
    g = random_regular_graph(8, 3, seed=4)
    m = build_antiferro_ising(g, 0.7)
    table = log_weight_table(m)
    for r, x in enumerate(all_states(8)):
        count = sum(x[i] != x[j] for i, j in g.edges)
        assert table[r] == pytest.approx(2 * 0.7 * count)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5).flatmap(lambda k: st.tuples(st.just(k), st.integers(k + 1, 10))), st.floats(0, 2),
       st.integers(0, 2**16))
def test_ising_flip_invariance_and_span(kp, beta, seed):
    k, p = kp
    if (p * k) % 2:
        p += 1
    g = random_regular_graph(p, k, seed=seed)
    m = build_antiferro_ising(g, beta)
    table = log_weight_table(m)
    flipped = table[::-1]  # index of the complement is 2**p - 1 - r
    np.testing.assert_allclose(table, flipped)
    assert table.min() >= 0
    assert table.max() <= 2 * beta * len(g.edges) + 1e-12
    assert np.ptp(table) <= beta * k * p + 1e-12


# ------------------------------------------------------------------ graphs


def test_k4_is_unique_3_regular_on_4():
    g = random_regular_graph(4, 3, seed=7)
    assert sorted(g.edges) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_2_regular_on_6_is_union_of_cycles():
    g = random_regular_graph(6, 2, seed=3)
    assert g.degrees == (2,) * 6 and g.regular
    assert len(g.edges) == len(set(g.edges)) == 6


@pytest.mark.parametrize("p,k", [(5, 3), (4, 4), (3, 5)])
def test_regular_graph_errors(p, k):
    with pytest.raises(GraphError):
        random_regular_graph(p, k, seed=0)


def test_regular_graph_deterministic():
    assert random_regular_graph(10, 3, seed=11).edges == random_regular_graph(10, 3, seed=11).edges


def test_regular_graph_invariants_over_100_triples():
    rng = np.random.default_rng(2024)
    done = 0
    while done < 100:
        p = int(rng.integers(2, 31))
        k = int(rng.integers(0, min(p, 6)))
        if (p * k) % 2:
            continue
        g = random_regular_graph(p, k, seed=int(rng.integers(2**31)))
        assert set(g.degrees) == {k}
        assert all(i not in nb for i, nb in enumerate(g.adjacency))
        assert len(set(g.edges)) == p * k // 2
        done += 1


def test_graph_file_round_trip():
    g = random_regular_graph(12, 3, seed=5)
    text = format_graph(g)
    assert text.splitlines()[0] == "12 3"
    assert parse_graph(text).adjacency == g.adjacency


@pytest.mark.parametrize(
    "text",
    ["3 2\n1 2\n2 3\n1 2\n", "3 2\n1 1\n", "3 2\n2 1\n1 3\n2 3\n", "4 2\n1 2\n3 4\n", "x\n"],
    ids=["duplicate", "self-loop", "unordered", "not-regular", "bad-header"],
)
def test_graph_file_rejects(text):
    with pytest.raises(GraphError):
        parse_graph(text)


def test_graph_rejects_asymmetric_adjacency():
    with pytest.raises(GraphError):
        Graph(2, ((1,), ()))

import threading
from fractions import Fraction

import pytest

import mcprioq


def build(graph, src, edges):
    for dst, count in edges:
        for _ in range(count):
            graph.record(src, dst)


def test_record_and_query():
    g = mcprioq.Graph()
    assert g.record("A", "B") is True
    assert g.record("A", "B") is False
    build(g, "A", [("C", 3)])
    rec = g.top_n("A", 2)
    assert rec.found
    assert rec.items == [("C", 0.6), ("B", 0.4)]
    assert g.cumulative("A", 0.5).items == [("C", 0.6)]
    assert not g.top_n("Z", 3).found
    s = g.stats()
    assert (s.sources, s.edges, s.transitions) == (1, 2, 5)


def test_threshold_example():
    g = mcprioq.Graph()
    build(g, "A", [("B", 5), ("C", 3), ("D", 2)])
    rec = g.cumulative("A", 0.7)
    assert [dst for dst, _ in rec.items] == ["B", "C"]
    assert rec.cumulative == pytest.approx(0.8)


def test_decay_and_snapshot_round_trip():
    g = mcprioq.Graph()
    build(g, "A", [("B", 5), ("C", 3), ("D", 1)])
    assert g.decay("1/2") == (1, 0)
    assert g.snapshot() == "MCPRIOQ 1\nS A 3 2\nE B 2\nE C 1\n"
    assert g.decay(Fraction(1, 1)) == (0, 0)
    back = mcprioq.Graph.from_snapshot(g.snapshot())
    assert back.image() == {"A": (3, [("B", 2), ("C", 1)])}
    assert back.check_invariants() == []


def test_errors_map_to_exceptions():
    g = mcprioq.Graph()
    with pytest.raises(mcprioq.InputError):
        g.record("a b", "c")
    with pytest.raises(ValueError):
        g.cumulative("A", 2.0)
    with pytest.raises(mcprioq.FormatError):
        mcprioq.Graph.from_snapshot("MCPRIOQ 1\nS A 8 2\nE C 3\nE B 5\n")
    with pytest.raises(mcprioq.InputError):
        g.decay("0")


def test_parse_transitions():
    assert mcprioq.parse_transitions("# c\n\na,b\n") == [("a", "b")]
    with pytest.raises(mcprioq.FormatError):
        mcprioq.parse_transitions("a,b,c\n")
    assert mcprioq.parse_transitions("a,b\nbad\n", lenient=True) == [("a", "b")]


def test_python_threads_share_a_graph():
    g = mcprioq.Graph()

    def work(k):
        for i in range(2000):
            g.record("s%d" % (i % 3), "d%d" % ((i * k) % 17))

    threads = [threading.Thread(target=work, args=(k,)) for k in range(1, 5)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    g.stabilize()
    assert g.stats().transitions == 8000
    assert g.check_invariants() == []


def test_bench_conserves_counts():
    cfg = mcprioq.WorkloadConfig()
    cfg.nodes = 200
    cfg.writers = 2
    cfg.readers = 2
    cfg.duration_secs = 0.3
    report = mcprioq.run_bench(cfg)
    assert report.passed
    assert report.anomalies_detected == 0
    assert report.edge_count_sum == report.update_ops
    assert set(report.items_for_threshold) == {0.5, 0.9, 0.99}

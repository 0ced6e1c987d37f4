from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from amnorm.amtree import Entry, IGNORED
from amnorm.errors import TokenMismatch
from amnorm.graph import SdpGraph, Token
from amnorm.io import parse_graph
from amnorm.metrics import (
    Counts,
    compare_sets,
    corpus_graph_f,
    corpus_micro_f,
    corpus_tree_f,
    graph_f,
    lexicon_change_rate,
    prf,
    stagewise,
    tree_f,
)

import corpus
from strategies import sdp_graphs

ALL = corpus.triples("figures") + corpus.triples("coord") + corpus.triples("extra")
NORMALIZED = [corpus.triples(n, True) for n in corpus.SETS]
ALL_NORM = [t for ts in NORMALIZED for t in ts]


def oracle_f(pred, gold):
    """Independent F: 2|P & G| / (|P| + |G|) in floating point."""
    pred, gold = set(pred), set(gold)
    if not pred and not gold:
        return 0.0
    return 2 * len(pred & gold) / (len(pred) + len(gold))


def test_identical_trees():
    t = ALL[0].dm
    assert all(s.f == 1 for s in tree_f(t, t))


def test_set_example():
    c = compare_sets({(2, 1), (2, 3), (4, 2)}, {(2, 1), (3, 2), (4, 2)})
    s = prf(c)
    assert (s.p, s.r, s.f) == (Fraction(2, 3), Fraction(2, 3), Fraction(2, 3))


def test_root_edge_is_counted():
    toks = [Token(i, f"w{i}", f"w{i}", "NN") for i in (1, 2, 3)]
    leaf = parse_graph("(r / --LEX-- <root>)")
    from amnorm.amtree import AmTree, EdgeOp, app

    a = AmTree(toks, [Entry(leaf, "a", 2, app("s")), Entry(leaf, "b", 0, EdgeOp("ROOT")), Entry(leaf, "c", 2, app("o"))])
    b = AmTree(toks, [Entry(leaf, "a", 2, app("s")), Entry(leaf, "b", 3, app("s")), Entry(leaf, "c", 0, EdgeOp("ROOT"))])
    # a: 0->2, 2->1, 2->3   b: 0->3, 3->2, 2->1
    assert tree_f(a, b).uf.f == Fraction(1, 3)


def test_figure_sentence_trees_agree_after_normalization():
    a = corpus.by_sid("figures", "cat-not-lazy", normalized=True)
    for x, y in combinations(a, 2):
        assert tree_f(x, y).uf.f == 1


def test_graph_direction_example():
    toks = [Token(i, w, w, "NN") for i, w in enumerate("abc", 1)]
    g = SdpGraph.from_edges(toks, {(1, 2, "X"), (2, 3, "X")}, set())
    h = SdpGraph.from_edges(toks, {(2, 1, "X"), (2, 3, "X")}, set())
    assert graph_f(g, h).f == Fraction(1, 2)
    assert graph_f(g, h, directed=False).f == 1
    assert graph_f(g, g).f == 1


def test_micro_average_example():
    s = corpus_micro_f([Counts(1, 2, 2), Counts(3, 3, 4)])
    assert (s.p, s.r, s.f) == (Fraction(4, 5), Fraction(4, 6), Fraction(8, 11))
    one = Counts(3, 3, 4)
    assert corpus_micro_f([one]) == prf(one)


def test_empty_counts_are_flagged():
    s = corpus_micro_f([Counts(0, 0, 0), Counts(0, 0, 0)])
    assert s.f == 0 and s.degenerate
    assert not prf(Counts(0, 1, 0)).degenerate


def test_punctuation_can_be_dropped():
    d = corpus.gold("extra", "cats-give-up")
    assert graph_f(d["dm"], d["pas"]).f < 1
    assert graph_f(d["dm"], d["pas"], include_punct=False).f == Fraction(2, 3)  # 'up' (RP) is not punctuation


def test_lexicon_change_rate():
    assert lexicon_change_rate([t.dm for t in ALL], [t.dm for t in ALL]) == 0
    a = corpus.by_sid("figures", "cat-not-lazy")
    # four supertagged DM tokens before, one of them (lazy) replaced
    changed = a.dm.with_entries({5: Entry(parse_graph("(x / --LEX-- <root> :ARG2 (s <s>))"), "lazy", 4, a.dm.entry(5).op)})
    assert lexicon_change_rate([a.dm], [changed]) == 25
    # node ids alone do not count as a change
    renamed = a.dm.with_entries({5: Entry(parse_graph("(q / --LEX-- <root> :ARG1 (z <s>))"), "lazy", 4, a.dm.entry(5).op)})
    assert lexicon_change_rate([a.dm], [renamed]) == 0
    # a gained supertag counts as a change over the union of supertagged tokens
    assert lexicon_change_rate([a.psd], [corpus.by_sid("figures", "cat-not-lazy", True).psd]) == 40


def test_misaligned_inputs():
    a, b = corpus.triples("figures")
    with pytest.raises(TokenMismatch):
        tree_f(a.dm, b.dm)
    with pytest.raises(TokenMismatch):
        corpus_tree_f([a.dm], [a.dm, b.dm])


PAIRS = [(getattr(t, x), getattr(t, y)) for t in ALL + ALL_NORM for x, y in (("dm", "pas"), ("dm", "psd"), ("pas", "psd"))]


@pytest.mark.parametrize("k", range(len(PAIRS)))
def test_tree_scores_against_oracle(k):
    a, b = PAIRS[k]
    s = tree_f(a, b)
    ea, eb = a.edges(), b.edges()
    assert float(s.uf.f) == pytest.approx(oracle_f({e[:2] for e in ea}, {e[:2] for e in eb}))
    assert float(s.lf.f) == pytest.approx(oracle_f(ea, eb))
    assert s.lf.f <= s.amf.f <= s.uf.f
    back = tree_f(b, a)
    assert (back.uf.p, back.uf.r, back.uf.f) == (s.uf.r, s.uf.p, s.uf.f)


@given(sdp_graphs(n_tokens=5), sdp_graphs(n_tokens=5), st.booleans())
def test_graph_scores_properties(a, b, punct):
    b = SdpGraph(a.tokens, b.nodes, b.edges, b.tops)
    d = graph_f(a, b, include_punct=punct)
    u = graph_f(a, b, directed=False, include_punct=punct)
    assert d.f <= u.f
    assert graph_f(b, a, include_punct=punct).f == d.f
    assert float(d.f) == pytest.approx(oracle_f({e[:2] for e in a.edges}, {e[:2] for e in b.edges})) or not punct


def test_corpus_graph_f_sums_counts():
    gs = {b: corpus.graphs("figures", b) for b in corpus.BANKS}
    total = corpus_graph_f(gs["dm"], gs["pas"])
    pred = sum(len(g.edges) for g in gs["dm"])
    gold = sum(len(g.edges) for g in gs["pas"])
    matched = sum(len({e[:2] for e in x.edges} & {e[:2] for e in y.edges}) for x, y in zip(gs["dm"], gs["pas"]))
    assert total.f == Fraction(2 * matched, pred + gold)


def test_stagewise_report():
    report = stagewise(corpus.triples("figures"))
    assert report.stages == ["baseline", *["DET", "AUX", "PREP", "COORD", "COPULA", "NEG", "PUNCT"]]
    for pair in (("dm", "pas"), ("dm", "psd"), ("pas", "psd")):
        assert report.value("PUNCT", pair, "uf") == 1
        assert report.value("baseline", pair, "uf") < 1
    table = report.to_table()
    assert "All changes" in table and "UF DM-PAS" in table and "+COPULA" in table

import random

import pytest

from amnorm.algebra import AM, AM_PLUS
from amnorm.amtree import AmTree, EdgeOp, Entry, IGNORED, app, evaluate, evaluate_subtree, well_typed
from amnorm.errors import CycleDetected, NotWellTyped, TreeError, UnanchoredNode, UnknownEdgeLabel
from amnorm.graph import SdpGraph, Token, graph_equals
from amnorm.io import parse_graph

import corpus

CASES = [(name, bank, norm) for name in corpus.SETS for bank in corpus.BANKS for norm in (False, True)]


@pytest.mark.parametrize("name,bank,norm", CASES)
def test_trees_evaluate_to_gold_graphs(name, bank, norm):
    gold = corpus.graphs(name, bank)
    for tree, g in zip(corpus.trees(name, bank, norm), gold):
        assert graph_equals(evaluate(tree), g), tree.sid


def test_pas_tree_of_copula_sentence():
    tree = corpus.by_sid("figures", "cat-not-lazy").pas
    g = evaluate(tree)
    assert {(3, 2, "verb_ARG1"), (3, 5, "verb_ARG2"), (5, 2, "adj_ARG1"), (1, 2, "det_ARG1")} <= g.edges
    assert g.tops == {3}


def test_single_token_tree():
    t = AmTree([Token(1, "cat", "cat", "NN")], [Entry(parse_graph("(n / --LEX-- <root>)"), "cat", 0, EdgeOp("ROOT"))])
    g = evaluate(t)
    assert g.nodes == {1} and g.tops == {1} and not g.edges
    assert evaluate_subtree(t, 1).nodes["1.n"].label == "cat"


def test_lex_slot_needs_label():
    t = AmTree([Token(1, "cat", "cat", "NN")], [Entry(parse_graph("(n / --LEX-- <root>)"), None, 0, EdgeOp("ROOT"))])
    with pytest.raises(TreeError):
        evaluate(t)


def test_missing_request_source_is_diagnosed_at_copula():
    tree = corpus.by_sid("figures", "cat-not-lazy").pas
    broken = tree.with_entries({5: Entry(parse_graph("(r / --LEX-- <root> :adj_ARG1 (s))"), "lazy", 3, app("o"))})
    result = well_typed(broken)
    assert not result
    assert result.head == 3
    assert "TypeMismatch" in result.diagnostics[0] and "is" in result.diagnostics[0]


@pytest.mark.parametrize("bank", corpus.BANKS)
def test_shared_subject_coordination_is_well_typed(bank):
    for t in corpus.triples("coord") + corpus.triples("coord", normalized=True):
        assert well_typed(getattr(t, bank))


def test_open_sources_at_root():
    t = AmTree([Token(1, "sleep", "sleep", "VB")], [Entry(parse_graph("(r / --LEX-- <root> :ARG1 (s <s>))"), "sleep", 0, EdgeOp("ROOT"))])
    with pytest.raises(NotWellTyped):
        evaluate(t)
    assert not well_typed(t)
    # tolerated at the root, but the open node belongs to no token
    with pytest.raises(UnanchoredNode):
        evaluate(t, allow_open=["s"])
    t = AmTree([Token(1, "sleep", "sleep", "VB")], [Entry(parse_graph("(r / --LEX-- <root> <s>)"), "sleep", 0, EdgeOp("ROOT"))])
    assert not well_typed(t, AM_PLUS) and well_typed(t, AM_PLUS, allow_open=["s"])


def test_am_mode_rejects_normalized_trees():
    tree = corpus.by_sid("figures", "cat-not-lazy", normalized=True).psd
    result = well_typed(tree, AM)
    assert not result and "ModeViolation" in result.diagnostics[0]
    assert well_typed(tree, AM_PLUS)


def test_edge_labels():
    assert EdgeOp.parse("APP_s") == app("s")
    assert EdgeOp.parse("MOD_op1").label == "MOD_op1"
    for bad in ("APX_s", "APP_", "APP", "MOD", "root"):
        with pytest.raises(UnknownEdgeLabel):
            EdgeOp.parse(bad)


def _tokens(n):
    return [Token(i, f"w{i}", f"w{i}", "NN") for i in range(1, n + 1)]


LEAF = parse_graph("(r / --LEX-- <root>)")


def test_cycles_are_rejected():
    with pytest.raises(CycleDetected):
        AmTree(_tokens(3), [Entry(LEAF, "a", 0, EdgeOp("ROOT")), Entry(LEAF, "b", 3, app("s")), Entry(LEAF, "c", 2, app("s"))])


@pytest.mark.parametrize(
    "entries",
    [
        [Entry(LEAF, "a", 0, EdgeOp("ROOT")), Entry(LEAF, "b", 0, EdgeOp("ROOT"))],
        [Entry(LEAF, "a", 0, EdgeOp("ROOT")), Entry(LEAF, "b", 0, EdgeOp("IGNORE"))],
        [Entry(LEAF, "a", 0, EdgeOp("ROOT")), Entry(LEAF, "b", 5, app("s"))],
        [Entry(LEAF, "a", 0, EdgeOp("ROOT")), Entry(None, None, 1, app("s"))],
        [Entry(LEAF, "a", 3, app("s")), Entry(LEAF, "b", 0, EdgeOp("ROOT")), IGNORED],
        [Entry(parse_graph("(r / --LEX-- <root> <@2>)"), "a", 0, EdgeOp("ROOT")), IGNORED],
    ],
)
def test_structural_validation(entries):
    with pytest.raises(TreeError):
        AmTree(_tokens(len(entries)), entries)


WELL_TYPED = [t for name in corpus.SETS for norm in (False, True) for tr in corpus.triples(name, norm) for t in tr]


@pytest.mark.parametrize("k", range(len(WELL_TYPED)))
def test_random_schedules_agree(k):
    tree = WELL_TYPED[k]
    g = evaluate(tree)
    rng = random.Random(k)
    for _ in range(100):
        assert graph_equals(evaluate(tree, rng=rng), g)


def _drop_token(tree: AmTree, j: int) -> AmTree:
    shift = lambda i: i - 1 if i > j else i  # noqa: E731
    tokens = [Token(shift(t.index), t.form, t.lemma, t.pos) for t in tree.tokens if t.index != j]
    entries = []
    for i in tree.indices():
        if i == j:
            continue
        e = tree.entry(i)
        entries.append(Entry(e.supertag, e.lex_label, shift(e.head), e.op))
    return AmTree(tokens, entries, tree.sid)


@pytest.mark.parametrize("k", range(len(WELL_TYPED)))
def test_ignored_tokens_do_not_matter(k):
    tree = WELL_TYPED[k]
    g = evaluate(tree)
    for j in tree.indices():
        if not tree.entry(j).ignored:
            continue
        h = evaluate(_drop_token(tree, j))
        back = lambda i: i + 1 if i >= j else i  # noqa: E731
        assert {(back(a), back(b), l) for a, b, l in h.edges} == set(g.edges)
        assert {back(t) for t in h.tops} == set(g.tops)


@pytest.mark.parametrize("k", range(len(WELL_TYPED)))
def test_result_nodes_come_from_labeled_supertags(k):
    tree = WELL_TYPED[k]
    labeled = {i for i in tree.indices() if not tree.entry(i).ignored and tree.entry(i).supertag.lexical_node() is not None}
    assert evaluate(tree).nodes <= labeled

import pytest
from hypothesis import given, strategies as st

from amnorm.errors import AnchorClash, BadGraphLiteral, InvalidGraph, LabelClash, SourceClash, TokenMismatch
from amnorm.graph import EMPTY, AmType, AsGraph, Node, SdpGraph, Token, graph_equals, is_punct_pos, merge_nodes
from amnorm.io import parse_graph

import corpus
from strategies import as_graphs, sdp_graphs


def test_merge_unlabeled_root_into_labeled_node():
    g = AsGraph({"a": Node(), "b": Node("cat")}, set(), "a")
    m = merge_nodes(g, "b", "a")
    assert m.nodes == {"b": Node("cat")}
    assert m.root == "b"


def test_merge_label_clash():
    g = AsGraph({"a": Node("lazy"), "b": Node("cat")}, set(), "a")
    with pytest.raises(LabelClash):
        merge_nodes(g, "a", "b")


def test_merge_anchor_clash():
    g = AsGraph({"a": Node(anchor=1), "b": Node(anchor=2)}, set(), "a")
    with pytest.raises(AnchorClash):
        merge_nodes(g, "a", "b")


def test_merge_two_placeholders_keeps_both_edges():
    g = parse_graph("(r / be <root> :ARG1 (x) :ARG2 (y))")
    m = merge_nodes(g, "x", "y")
    expected = {(s, "x" if t == "y" else t, l) for s, t, l in g.edges}
    assert m.edges == expected
    assert len(m.edges) == len(g.edges) == 2
    assert len(m.incident("x")) == 2


def test_merge_moves_source_marks():
    g = parse_graph("(r <root> :ARG1 (x <s>) :ARG2 (y))")
    m = merge_nodes(g, "y", "x")
    assert m.sources == {"s": ("y", EMPTY)}


def test_merge_root_source_limit_reported_by_caller():
    g = parse_graph("(r <root> :ARG1 (x <s>))")
    with pytest.raises(SourceClash):
        merge_nodes(g, "r", "x", root_sources=0)
    assert merge_nodes(g, "r", "x", root_sources=1).sources == {"s": ("r", EMPTY)}


def test_merge_two_sources_on_one_node():
    g = parse_graph("(r <root> :ARG1 (x <s>) :ARG2 (y <o>))")
    with pytest.raises(SourceClash):
        merge_nodes(g, "x", "y")


@given(as_graphs(), st.data())
def test_merge_substitutes_endpoints(g, data):
    keep = data.draw(st.sampled_from(sorted(g.nodes)))
    absorb = data.draw(st.sampled_from(sorted(g.nodes)))
    a, b = g.nodes[keep], g.nodes[absorb]
    if keep == absorb or (a.labeled and b.labeled):
        return
    try:
        m = merge_nodes(g, keep, absorb)
    except SourceClash:
        assert len({n for n, _ in g.sources.values()} & {keep, absorb}) == 2 or absorb == g.root or keep == g.root
        return
    sub = lambda n: keep if n == absorb else n  # noqa: E731
    assert m.edges == {(sub(s), sub(t), l) for s, t, l in g.edges}
    assert set(m.nodes) == set(g.nodes) - {absorb}


@given(as_graphs())
def test_validate_never_mutates(g):
    before = (dict(g.nodes), set(g.edges), g.root, dict(g.sources))
    g.validate(1)
    assert (dict(g.nodes), set(g.edges), g.root, dict(g.sources)) == before


def test_root_is_not_a_source_name():
    with pytest.raises(InvalidGraph):
        AsGraph({"a": Node()}, set(), "a", {"root": ("a", EMPTY)})


def test_non_root_node_carries_one_source():
    with pytest.raises(SourceClash):
        AsGraph({"a": Node(), "b": Node()}, set(), "a", {"s": ("b", EMPTY), "o": ("b", EMPTY)})


def test_single_lex_slot_and_unique_anchors():
    with pytest.raises(InvalidGraph):
        AsGraph({"a": Node(lex=True), "b": Node(lex=True)}, set(), "a")
    with pytest.raises(AnchorClash):
        AsGraph({"a": Node(anchor=1), "b": Node(anchor=1)}, set(), "a")


def test_root_source_limit():
    g = AsGraph({"a": Node()}, set(), "a", {"s": ("a", EMPTY)})
    g.validate(1)
    with pytest.raises(SourceClash):
        g.validate(0)


def test_type_equality_is_structural():
    a = AmType.from_dict({"s": {}, "o": {"s": {}}})
    b = AmType.parse("[o[s], s]")
    assert a == b and hash(a) == hash(b)
    assert str(a) == "[o[s], s]"
    assert a != AmType.parse("[o, s]")
    with pytest.raises(BadGraphLiteral):
        AmType.parse("[s, s]")


def test_is_punct_pos():
    assert is_punct_pos(".") and is_punct_pos(",") and is_punct_pos("''") and is_punct_pos("-LRB-") is False
    assert not is_punct_pos("NN")


# -- graphEquals -------------------------------------------------------------------


def _sentence_graphs():
    return corpus.gold("figures", "cat-not-lazy")


def test_graph_equals_reflexive_and_extra_edge():
    g = _sentence_graphs()["dm"]
    assert graph_equals(g, g)
    h = SdpGraph.from_edges(g.tokens, set(g.edges) | {(2, 5, "ARG2")}, g.tops)
    assert not graph_equals(g, h)


def test_dm_and_pas_differ():
    gs = _sentence_graphs()
    assert not graph_equals(gs["dm"], gs["pas"])


def test_graph_equals_token_mismatch():
    gs = _sentence_graphs()
    other = corpus.gold("figures", "cats-and-dogs")["dm"]
    with pytest.raises(TokenMismatch):
        graph_equals(gs["dm"], other)


def test_graph_equals_without_punct():
    toks = [Token(1, "Cats", "cat", "NNS"), Token(2, "sleep", "sleep", "VBP"), Token(3, ".", ".", ".")]
    a = SdpGraph.from_edges(toks, {(2, 1, "ARG1")}, {2})
    b = SdpGraph.from_edges(toks, {(2, 1, "ARG1"), (3, 2, "punct_ARG1")}, {2})
    assert not graph_equals(a, b)
    assert graph_equals(a, b, include_punct=False)
    assert not graph_equals(a, b, include_punct=False, punct_pos={","})


@given(sdp_graphs(n_tokens=4), sdp_graphs(n_tokens=4), sdp_graphs(n_tokens=4), st.booleans())
def test_graph_equals_is_an_equivalence(a, b, c, punct):
    eq = lambda x, y: graph_equals(x, y, include_punct=punct)  # noqa: E731
    b, c = SdpGraph(a.tokens, b.nodes, b.edges, b.tops), SdpGraph(a.tokens, c.nodes, c.edges, c.tops)
    assert eq(a, a)
    assert eq(a, b) == eq(b, a)
    if eq(a, b) and eq(b, c):
        assert eq(a, c)


def test_sdp_graph_rejects_dangling_edges():
    toks = [Token(1, "a", "a", "NN")]
    with pytest.raises(InvalidGraph):
        SdpGraph(toks, frozenset({1}), frozenset({(1, 2, "X")}), frozenset())


def test_sdp_graph_one_label_per_pair():
    toks = [Token(1, "a", "a", "NN"), Token(2, "b", "b", "NN")]
    with pytest.raises(InvalidGraph):
        SdpGraph.from_edges(toks, {(1, 2, "X"), (1, 2, "Y")}, set())
    SdpGraph.from_edges(toks, {(1, 2, "X"), (2, 1, "Y")}, set())

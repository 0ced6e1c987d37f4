"""Value types for annotated s-graphs (as-graphs) and bilexical sentence graphs.

An :class:`AsGraph` is a graph fragment with one root marker and a set of
named source markers, each carrying a request annotation (:class:`AmType`).
An :class:`SdpGraph` is the token-anchored graph that evaluation produces and
that the SDP 2015 files store.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple

from amnorm.errors import AnchorClash, InvalidGraph, LabelClash, SourceClash, TokenMismatch

ROOT = "root"
LEX = "--LEX--"

Edge = Tuple[str, str, str]  # (source node, target node, label)


@dataclass(frozen=True)
class AmType:
    """A request annotation: a finite, order-insensitive map from source names to types.

    The type of an as-graph is the set of its open sources together with the
    requests stored at them, so the same class serves both purposes.

    >>> t = AmType.from_dict({"s": {}, "o": {"s": {}}})
    >>> str(t)
    '[o[s], s]'
    >>> t == AmType.parse("[s, o[s]]")
    True
    """

    entries: FrozenSet[Tuple[str, "AmType"]] = frozenset()

    def __post_init__(self):
        names = [name for name, _ in self.entries]
        if len(names) != len(set(names)):
            raise InvalidGraph(f"duplicate source name in type: {sorted(names)}")
        for name in names:
            check_source_name(name)

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "AmType":
        entries = []
        for name, sub in d.items():
            if not isinstance(sub, AmType):
                sub = cls.from_dict(sub or {})
            entries.append((name, sub))
        return cls(frozenset(entries))

    @classmethod
    def parse(cls, text: str) -> "AmType":
        from amnorm.io import parse_type

        return parse_type(text)

    def to_dict(self) -> Dict[str, dict]:
        return {name: sub.to_dict() for name, sub in self.entries}

    def names(self) -> FrozenSet[str]:
        return frozenset(name for name, _ in self.entries)

    def get(self, name: str) -> Optional["AmType"]:
        for n, sub in self.entries:
            if n == name:
                return sub
        return None

    def items(self):
        return sorted(self.entries, key=lambda e: e[0])

    def without(self, name: str) -> "AmType":
        return AmType(frozenset(e for e in self.entries if e[0] != name))

    def __bool__(self):
        return bool(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.names()))

    def __str__(self):
        return "[" + ", ".join(f"{n}{s}" if s else n for n, s in self.items()) + "]"

    def __repr__(self):
        return f"AmType({self})"


EMPTY = AmType()


def check_source_name(name: str) -> None:
    if not name or name == ROOT:
        raise InvalidGraph(f"illegal source name {name!r}")
    if any(c.isspace() or c in "()<>[],:/" for c in name):
        raise InvalidGraph(f"illegal character in source name {name!r}")


@dataclass(frozen=True)
class Node:
    label: Optional[str] = None
    lex: bool = False
    anchor: Optional[int] = None

    @property
    def labeled(self) -> bool:
        return self.lex or self.label is not None


@dataclass(frozen=True, eq=True)
class AsGraph:
    """An annotated s-graph.

    ``nodes`` maps opaque node ids to :class:`Node` records, ``edges`` is a
    set of ``(src, tgt, label)`` triples, ``sources`` maps each source name to
    ``(node id, request)``.  Instances are never mutated after construction.
    """

    nodes: Mapping[str, Node]
    edges: FrozenSet[Edge]
    root: str
    sources: Mapping[str, Tuple[str, AmType]] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        object.__setattr__(self, "sources", dict(self.sources))
        self.validate()

    def validate(self, root_sources: Optional[int] = None) -> None:
        """Check the structural invariants; never mutates.

        ``root_sources`` bounds the number of sources the root node may carry
        (0 for the AM algebra, 1 for AM+); ``None`` skips that check.
        """
        if self.root not in self.nodes:
            raise InvalidGraph(f"root {self.root!r} is not a node")
        for src, tgt, label in self.edges:
            if src not in self.nodes or tgt not in self.nodes:
                raise InvalidGraph(f"edge ({src}, {tgt}, {label}) has a dangling endpoint")
            if not label:
                raise InvalidGraph("empty edge label")
        per_node: Dict[str, list] = {}
        for name, (node, req) in self.sources.items():
            check_source_name(name)
            if node not in self.nodes:
                raise InvalidGraph(f"source {name} marks unknown node {node!r}")
            if not isinstance(req, AmType):
                raise InvalidGraph(f"request at {name} is not an AmType")
            per_node.setdefault(node, []).append(name)
        for node, names in per_node.items():
            if node == self.root:
                if root_sources is not None and len(names) > root_sources:
                    raise SourceClash(
                        f"root node carries sources {sorted(names)} (at most {root_sources} allowed)"
                    )
            elif len(names) > 1:
                raise SourceClash(f"node {node!r} carries several sources {sorted(names)}")
        if sum(1 for n in self.nodes.values() if n.lex) > 1:
            raise InvalidGraph("more than one lexical slot")
        anchors = [n.anchor for n in self.nodes.values() if n.anchor is not None]
        if len(anchors) != len(set(anchors)):
            raise AnchorClash(f"several nodes share an anchor: {sorted(anchors)}")
        if any(a < 1 for a in anchors):
            raise InvalidGraph("anchors are 1-based token indices")

    # -- queries -----------------------------------------------------------

    def type(self) -> AmType:
        return AmType(frozenset((name, req) for name, (_, req) in self.sources.items()))

    def sources_at(self, node: str) -> list:
        return sorted(name for name, (n, _) in self.sources.items() if n == node)

    def source_node(self, name: str) -> str:
        return self.sources[name][0]

    def incident(self, node: str) -> list:
        return sorted(e for e in self.edges if node in (e[0], e[1]))

    def lexical_node(self) -> Optional[str]:
        """The node that stands for the token itself, if any."""
        labeled = [n for n, rec in self.nodes.items() if rec.labeled]
        if len(labeled) > 1:
            lex = [n for n in labeled if self.nodes[n].lex]
            return lex[0] if lex else None
        return labeled[0] if labeled else None

    # -- derived graphs ----------------------------------------------------

    def renamed(self, mapping: Mapping[str, str]) -> "AsGraph":
        f = lambda n: mapping.get(n, n)  # noqa: E731
        return AsGraph(
            {f(n): rec for n, rec in self.nodes.items()},
            {(f(s), f(t), l) for s, t, l in self.edges},
            f(self.root),
            {name: (f(n), req) for name, (n, req) in self.sources.items()},
        )

    def prefixed(self, prefix: str) -> "AsGraph":
        return self.renamed({n: f"{prefix}{n}" for n in self.nodes})

    def with_sources(self, sources: Mapping[str, Tuple[str, AmType]]) -> "AsGraph":
        return replace(self, sources=sources)

    def isomorphic(self, other: "AsGraph", *, ignore_anchors: bool = True) -> bool:
        """Structural equality up to node ids (labels, edges, root, sources, requests)."""
        from networkx.algorithms.isomorphism import DiGraphMatcher

        if (len(self.nodes), len(self.edges), self.type()) != (
            len(other.nodes),
            len(other.edges),
            other.type(),
        ):
            return False
        a, b = _to_nx(self, ignore_anchors), _to_nx(other, ignore_anchors)
        matcher = DiGraphMatcher(
            a, b, node_match=lambda x, y: x["key"] == y["key"], edge_match=lambda x, y: x["labels"] == y["labels"]
        )
        return matcher.is_isomorphic()


def _to_nx(g: AsGraph, ignore_anchors: bool):
    import networkx as nx

    d = nx.DiGraph()
    for n, rec in g.nodes.items():
        key = (
            rec.label,
            rec.lex,
            None if ignore_anchors else rec.anchor,
            n == g.root,
            tuple((name, str(g.sources[name][1])) for name in g.sources_at(n)),
        )
        d.add_node(n, key=key)
    for s, t, l in g.edges:
        if d.has_edge(s, t):
            d[s][t]["labels"] = tuple(sorted(d[s][t]["labels"] + (l,)))
        else:
            d.add_edge(s, t, labels=(l,))
    return d


class GraphBuilder:
    """Mutable scratch space for assembling as-graphs; used by the algebra."""

    def __init__(self, g: Optional[AsGraph] = None):
        self.nodes: Dict[str, Node] = dict(g.nodes) if g else {}
        self.edges = set(g.edges) if g else set()
        self.root = g.root if g else None
        self.sources: Dict[str, Tuple[str, AmType]] = dict(g.sources) if g else {}
        self._alias: Dict[str, str] = {}

    def find(self, node: str) -> str:
        while node in self._alias:
            node = self._alias[node]
        return node

    def add(self, g: AsGraph) -> None:
        """Add all nodes and edges of ``g`` (ids must be disjoint); markers are not copied."""
        clash = set(self.nodes) & set(g.nodes)
        if clash:
            raise InvalidGraph(f"node ids collide: {sorted(clash)}")
        self.nodes.update(g.nodes)
        self.edges.update(g.edges)

    def merge(self, keep: str, absorb: str) -> None:
        keep, absorb = self.find(keep), self.find(absorb)
        if keep == absorb:
            return
        a, b = self.nodes[keep], self.nodes[absorb]
        if a.labeled and b.labeled and (a.lex, a.label) != (b.lex, b.label):
            raise LabelClash(
                f"cannot merge {keep!r} ({_show(a)}) with {absorb!r} ({_show(b)})"
            )
        if a.anchor is not None and b.anchor is not None and a.anchor != b.anchor:
            raise AnchorClash(f"cannot merge nodes anchored at {a.anchor} and {b.anchor}")
        merged = Node(
            label=a.label if a.label is not None else b.label,
            lex=a.lex or b.lex,
            anchor=a.anchor if a.anchor is not None else b.anchor,
        )
        if merged.lex and merged.label is not None:
            raise LabelClash(f"cannot merge lexical slot with label {merged.label!r}")
        self.nodes[keep] = merged
        del self.nodes[absorb]
        self._alias[absorb] = keep
        sub = lambda n: keep if n == absorb else n  # noqa: E731
        self.edges = {(sub(s), sub(t), l) for s, t, l in self.edges}
        if self.root == absorb:
            self.root = keep
        self.sources = {name: (sub(n), req) for name, (n, req) in self.sources.items()}

    def build(self) -> AsGraph:
        return AsGraph(self.nodes, self.edges, self.root, self.sources)


def _show(n: Node) -> str:
    return LEX if n.lex else repr(n.label)


def merge_nodes(g: AsGraph, keep: str, absorb: str, root_sources: Optional[int] = None) -> AsGraph:
    """Unify ``absorb`` into ``keep``.

    Incident edges of ``absorb`` are redirected to ``keep``; label, anchor and
    lexical slot are taken from whichever node has them, and source marks move
    along.  ``root_sources`` is the mode limit passed to validation.

    >>> g = AsGraph({"a": Node(), "b": Node("cat")}, set(), "a")
    >>> merge_nodes(g, "b", "a").nodes
    {'b': Node(label='cat', lex=False, anchor=None)}
    """
    for n in (keep, absorb):
        if n not in g.nodes:
            raise InvalidGraph(f"unknown node {n!r}")
    b = GraphBuilder(g)
    b.merge(keep, absorb)
    result = b.build()
    result.validate(root_sources)
    return result


# -- bilexical graphs ---------------------------------------------------------


class Token(NamedTuple):
    index: int
    form: str
    lemma: str
    pos: str


def is_punct_pos(pos: str) -> bool:
    """POS tags made up only of non-alphanumeric characters (``.``, ``,``, ``''`` ...)."""
    return bool(pos) and not any(c.isalnum() for c in pos)


def check_aligned(a: Iterable[Token], b: Iterable[Token], what: str = "token sequences") -> None:
    fa = [(t.index, t.form) for t in a]
    fb = [(t.index, t.form) for t in b]
    if fa != fb:
        raise TokenMismatch(f"{what} differ: {' '.join(f for _, f in fa)!r} vs {' '.join(f for _, f in fb)!r}")


SdpEdge = Tuple[int, int, str]


@dataclass(frozen=True)
class SdpGraph:
    tokens: Tuple[Token, ...]
    nodes: FrozenSet[int]
    edges: FrozenSet[SdpEdge]
    tops: FrozenSet[int]
    sid: Optional[str] = None
    frames: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(Token(*t) for t in self.tokens))
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        object.__setattr__(self, "tops", frozenset(self.tops))
        indices = [t.index for t in self.tokens]
        if indices != list(range(1, len(indices) + 1)):
            raise InvalidGraph(f"token indices must be 1..n, got {indices}")
        valid = set(indices)
        if not self.nodes <= valid:
            raise InvalidGraph(f"nodes {sorted(self.nodes - valid)} are not token indices")
        pairs = set()
        for h, d, _ in self.edges:
            if h not in self.nodes or d not in self.nodes:
                raise InvalidGraph(f"edge {h}->{d} leaves the node set")
            if (h, d) in pairs:
                raise InvalidGraph(f"two labels on edge {h}->{d}; one label per token pair")
            pairs.add((h, d))
        if not self.tops <= self.nodes:
            raise InvalidGraph("tops must be nodes")
        if self.frames is not None and len(self.frames) != len(self.tokens):
            raise InvalidGraph("one frame value per token expected")

    @classmethod
    def from_edges(cls, tokens, edges, tops, sid=None, frames=None) -> "SdpGraph":
        """Node set = tokens with an incident edge or a top marker (the SDP file convention)."""
        edges = frozenset(edges)
        nodes = {h for h, _, _ in edges} | {d for _, d, _ in edges} | set(tops)
        return cls(tuple(tokens), frozenset(nodes), edges, frozenset(tops), sid, frames)

    def __len__(self):
        return len(self.tokens)

    def without_tokens(self, drop: Iterable[int]) -> "SdpGraph":
        drop = set(drop)
        return replace(
            self,
            nodes=self.nodes - drop,
            edges=frozenset(e for e in self.edges if e[0] not in drop and e[1] not in drop),
            tops=self.tops - drop,
        )

    def punct_tokens(self, punct_pos=None) -> set:
        test = (lambda p: p in punct_pos) if punct_pos is not None else is_punct_pos
        return {t.index for t in self.tokens if test(t.pos)}


def graph_equals(a: SdpGraph, b: SdpGraph, include_punct: bool = True, punct_pos=None) -> bool:
    """Exact comparison of node, edge (with labels) and top sets.

    With ``include_punct=False`` punctuation tokens and their incident edges
    are dropped from both graphs first.
    """
    check_aligned(a.tokens, b.tokens)
    if not include_punct:
        drop = a.punct_tokens(punct_pos)
        a, b = a.without_tokens(drop), b.without_tokens(drop)
    return (a.nodes, a.edges, a.tops) == (b.nodes, b.edges, b.tops)

"""AM dependency trees and their evaluation to bilexical graphs."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from amnorm.algebra import AM_PLUS, AlgebraMode, apply, apply_problem, check_mode, modify, modify_problem
from amnorm.errors import (
    AlgebraError,
    AmError,
    CycleDetected,
    NotWellTyped,
    TreeError,
    UnanchoredNode,
    UnknownEdgeLabel,
)
from amnorm.graph import AsGraph, Node, SdpGraph, Token

APP, MOD, IGNORE, ROOT = "APP", "MOD", "IGNORE", "ROOT"


@dataclass(frozen=True)
class EdgeOp:
    kind: str
    source: Optional[str] = None

    def __post_init__(self):
        if self.kind in (APP, MOD):
            if not self.source:
                raise UnknownEdgeLabel(f"{self.kind} edge without a source name")
        elif self.kind in (IGNORE, ROOT):
            if self.source is not None:
                raise UnknownEdgeLabel(f"{self.kind} edge cannot carry a source")
        else:
            raise UnknownEdgeLabel(f"unknown edge kind {self.kind!r}")

    @classmethod
    def parse(cls, label: str) -> "EdgeOp":
        if label in (IGNORE, ROOT):
            return cls(label)
        kind, sep, source = label.partition("_")
        if not sep or kind not in (APP, MOD) or not source:
            raise UnknownEdgeLabel(f"unknown edge label {label!r}")
        return cls(kind, source)

    @property
    def label(self) -> str:
        return f"{self.kind}_{self.source}" if self.source else self.kind

    def __str__(self):
        return self.label


def app(source: str) -> EdgeOp:
    return EdgeOp(APP, source)


def mod(source: str) -> EdgeOp:
    return EdgeOp(MOD, source)


IGNORE_OP = EdgeOp(IGNORE)
ROOT_OP = EdgeOp(ROOT)


@dataclass(frozen=True)
class Entry:
    supertag: Optional[AsGraph]
    lex_label: Optional[str]
    head: int
    op: EdgeOp

    @property
    def ignored(self) -> bool:
        return self.op.kind == IGNORE


IGNORED = Entry(None, None, 0, IGNORE_OP)


@dataclass(frozen=True)
class AmTree:
    """Tokens plus one :class:`Entry` per token (``entries[i - 1]`` for token ``i``)."""

    tokens: Tuple[Token, ...]
    entries: Tuple[Entry, ...]
    sid: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(Token(*t) for t in self.tokens))
        object.__setattr__(self, "entries", tuple(self.entries))
        self.validate()

    def validate(self) -> None:
        n = len(self.tokens)
        if [t.index for t in self.tokens] != list(range(1, n + 1)):
            raise TreeError("token indices must run 1..n")
        if len(self.entries) != n:
            raise TreeError(f"{n} tokens but {len(self.entries)} entries")
        roots = [i for i in self.indices() if self.entry(i).op.kind == ROOT]
        if n and len(roots) != 1:
            raise TreeError(f"expected exactly one ROOT, found {len(roots)}")
        for i in self.indices():
            e = self.entry(i)
            if e.ignored:
                if e.supertag is not None or e.head != 0:
                    raise TreeError(f"token {i}: IGNORE tokens have no supertag and head 0")
                continue
            if e.supertag is None:
                raise TreeError(f"token {i}: missing supertag")
            if e.op.kind == ROOT:
                if e.head != 0:
                    raise TreeError(f"token {i}: ROOT must attach to 0")
            elif not 1 <= e.head <= n or e.head == i:
                raise TreeError(f"token {i}: bad head {e.head}")
            elif self.entry(e.head).ignored:
                raise TreeError(f"token {i}: head {e.head} is an ignored token")
            for node in e.supertag.nodes.values():
                if node.anchor is not None and node.anchor != i:
                    raise TreeError(f"token {i}: supertag node anchored at {node.anchor}")
        for i in self.indices():
            seen = {i}
            j = self.entry(i).head
            while j:
                if j in seen:
                    raise CycleDetected(f"cycle through token {j}")
                seen.add(j)
                j = self.entry(j).head

    # -- access -------------------------------------------------------------

    def __len__(self):
        return len(self.tokens)

    def indices(self) -> range:
        return range(1, len(self.tokens) + 1)

    def entry(self, i: int) -> Entry:
        return self.entries[i - 1]

    def token(self, i: int) -> Token:
        return self.tokens[i - 1]

    def root_index(self) -> int:
        for i in self.indices():
            if self.entry(i).op.kind == ROOT:
                return i
        raise TreeError("tree has no root")

    def children(self, i: int) -> List[Tuple[int, EdgeOp]]:
        return [(c, self.entry(c).op) for c in self.indices() if self.entry(c).head == i and not self.entry(c).ignored]

    def app_children(self, i: int) -> List[Tuple[int, EdgeOp]]:
        return [(c, op) for c, op in self.children(i) if op.kind == APP]

    def edges(self) -> FrozenSet[Tuple[int, int, str]]:
        """(head, dependent, label) for every non-ignored token; ROOT attaches to 0."""
        return frozenset(
            (e.head, i, e.op.label) for i, e in zip(self.indices(), self.entries) if not e.ignored
        )

    def with_entries(self, changes: Dict[int, Entry]) -> "AmTree":
        entries = list(self.entries)
        for i, e in changes.items():
            entries[i - 1] = e
        return replace(self, entries=tuple(entries))

    def subtree(self, i: int) -> List[int]:
        out, stack = [], [i]
        while stack:
            j = stack.pop()
            out.append(j)
            stack.extend(c for c, _ in self.children(j))
        return sorted(out)


# -- evaluation ----------------------------------------------------------------


def instantiate(tree: AmTree, i: int) -> AsGraph:
    """The supertag of token ``i`` with node ids made sentence-unique and the lexical slot filled."""
    e = tree.entry(i)
    g = e.supertag.prefixed(f"{i}.")
    lex = g.lexical_node()
    if lex is None:
        return g
    node = g.nodes[lex]
    if node.lex:
        if e.lex_label is None:
            raise TreeError(f"token {i}: supertag has a lexical slot but no lexical label")
        node = Node(label=e.lex_label, anchor=i)
    else:
        node = Node(label=node.label, anchor=i)
    nodes = dict(g.nodes)
    nodes[lex] = node
    return AsGraph(nodes, g.edges, g.root, g.sources)


def _blocked(g: AsGraph, op: EdgeOp, child: int, pending) -> Optional[object]:
    """Why the operation ``op`` cannot run now at head graph ``g``, or None."""
    cg = pending[child][1]
    if op.kind == MOD:
        return modify_problem(g, op.source, cg)
    problem = apply_problem(g, op.source, cg)
    if problem is not None:
        return problem
    x = op.source
    for name, (_, req) in g.sources.items():
        if name != x and x in req.names():
            return f"{x}-source is still requested by the {name}-source"
    for other, (oop, og) in pending.items():
        if other != child and oop.kind == MOD and x in og.sources and x != oop.source:
            return f"{x}-source is still needed by modifier {other}"
    return None


def _describe(problem) -> str:
    if isinstance(problem, Exception):
        return f"{type(problem).__name__}: {problem}"
    return f"Blocked: {problem}"


def _located(err: AmError, tree: AmTree, i: int) -> AmError:
    tok = tree.token(i)
    msg = f"token {i} ({tok.form}): {err}"
    try:
        new = type(err)(msg)
    except TypeError:
        return err
    return new


def combine_at(
    tree: AmTree,
    i: int,
    mode: AlgebraMode,
    child_graphs: Dict[int, AsGraph],
    rng: Optional[random.Random] = None,
    exclude: Iterable[int] = (),
) -> AsGraph:
    """Combine token ``i``'s constant with its children's evaluated graphs.

    Operations run greedily: at each step any APP or MOD whose preconditions
    hold may fire; the default picks the lowest child index, ``rng`` picks
    uniformly among the admissible ones.
    """
    g = instantiate(tree, i)
    try:
        check_mode(g, mode)
    except AlgebraError as err:
        raise _located(err, tree, i) from err
    exclude = set(exclude)
    pending = {c: (op, child_graphs[c]) for c, op in tree.children(i) if c not in exclude}
    while pending:
        problems = {c: _blocked(g, op, c, pending) for c, (op, _) in pending.items()}
        ready = sorted(c for c, p in problems.items() if p is None)
        if not ready:
            tok = tree.token(i)
            lines = [f"{pending[c][0].label} -> {c} ({tree.token(c).form}): {_describe(p)}" for c, p in sorted(problems.items())]
            raise NotWellTyped(
                f"stuck at token {i} ({tok.form}) with type {g.type()}: " + "; ".join(lines),
                head=i,
                pending=lines,
            )
        c = rng.choice(ready) if rng is not None else ready[0]
        op, cg = pending.pop(c)
        try:
            g = apply(mode, g, op.source, cg) if op.kind == APP else modify(mode, g, op.source, cg)
        except AlgebraError as err:
            raise _located(err, tree, i) from err
    return g


def evaluate_subtree(
    tree: AmTree,
    i: int,
    mode: AlgebraMode = AM_PLUS,
    rng: Optional[random.Random] = None,
    exclude: Iterable[int] = (),
) -> AsGraph:
    """Evaluate the subtree below token ``i`` (without the children in ``exclude``)."""
    exclude = set(exclude)
    order: List[int] = []
    stack = [i]
    while stack:
        j = stack.pop()
        order.append(j)
        stack.extend(c for c, _ in tree.children(j) if not (j == i and c in exclude))
    graphs: Dict[int, AsGraph] = {}
    for j in reversed(order):
        graphs[j] = combine_at(tree, j, mode, graphs, rng, exclude if j == i else ())
    return graphs[i]


def project(g: AsGraph, tree: AmTree) -> SdpGraph:
    """Turn a fully evaluated as-graph into a token-anchored graph."""
    anchor = {n: rec.anchor for n, rec in g.nodes.items()}
    edges = set()
    for s, t, label in g.edges:
        if anchor[s] is None or anchor[t] is None:
            raise UnanchoredNode(f"edge {label} touches a node that belongs to no token")
        edges.add((anchor[s], anchor[t], label))
    tops = {anchor[g.root]} if anchor[g.root] is not None else set()
    return SdpGraph.from_edges(tree.tokens, edges, tops, tree.sid)


def evaluate(
    tree: AmTree,
    mode: AlgebraMode = AM_PLUS,
    allow_open: Iterable[str] = (),
    rng: Optional[random.Random] = None,
) -> SdpGraph:
    """Evaluate ``tree`` bottom-up to its sentence graph."""
    if not len(tree):
        return SdpGraph((), frozenset(), frozenset(), frozenset(), tree.sid)
    root = tree.root_index()
    g = evaluate_subtree(tree, root, mode, rng)
    leftover = g.type().names() - set(allow_open)
    if leftover:
        raise NotWellTyped(f"sentence graph still has open sources {sorted(leftover)}", head=root)
    return project(g, tree)


@dataclass
class TypingResult:
    ok: bool
    diagnostics: List[str] = field(default_factory=list)
    error: Optional[AmError] = None
    head: Optional[int] = None

    def __bool__(self):
        return self.ok


def well_typed(tree: AmTree, mode: AlgebraMode = AM_PLUS, allow_open: Iterable[str] = ()) -> TypingResult:
    try:
        evaluate(tree, mode, allow_open)
    except NotWellTyped as err:
        return TypingResult(False, [str(err), *err.pending], err, err.head)
    except AmError as err:
        return TypingResult(False, [f"{type(err).__name__}: {err}"], err)
    return TypingResult(True)

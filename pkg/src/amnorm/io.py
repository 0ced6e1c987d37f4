"""Readers and writers: as-graph literals, SDP 2015 graph files, .amtree files.

As-graph literal syntax (PENMAN-like)::

    (r / --LEX-- <root> :verb_ARG1 (s <s>) :verb_ARG2 (o <o[s]>))

A node is ``(id [/ label] marker* edge*)``; markers are ``<root>``, a source
``<name>`` or ``<name[request]>``, or an anchor ``<@3>``.  Edges are
``:label child`` where the child is a nested node or the id of a node declared
elsewhere; a label ending in ``-of`` reverses the edge direction.  Printing
starts at the root and sorts markers and edges, so output is canonical.
"""

from __future__ import annotations

import io as _stdio
import os
from contextlib import contextmanager
from typing import Dict, Iterable, Iterator, List, Optional, TextIO, Tuple, Union

from amnorm.amtree import IGNORE, AmTree, EdgeOp, Entry
from amnorm.errors import (
    BadGraphLiteral,
    ColumnCountMismatch,
    DanglingArgColumn,
    FormatError,
    InvalidGraph,
    MalformedRow,
    UnknownEdgeLabel,
)
from amnorm.graph import LEX, ROOT, AmType, AsGraph, Node, SdpGraph, Token

PathOrFile = Union[str, os.PathLike, TextIO]

_SPECIAL = set("()<>[],:/")
INVERSE = "-of"

# -- as-graph literals -------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> BadGraphLiteral:
        return BadGraphLiteral(f"{msg} in {self.text!r}", self.pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def word(self, what: str = "symbol") -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c.isspace() or c in _SPECIAL:
                break
            self.pos += 1
        if self.pos == start:
            raise self.error(f"expected {what}")
        return self.text[start:self.pos]

    def at_end(self) -> bool:
        return self.peek() == ""


def _parse_request(sc: _Scanner) -> AmType:
    sc.expect("[")
    entries = []
    if sc.peek() != "]":
        while True:
            name = sc.word("source name")
            if any(name == n for n, _ in entries):
                raise sc.error(f"source {name!r} requested twice")
            sub = _parse_request(sc) if sc.peek() == "[" else AmType()
            entries.append((name, sub))
            if sc.peek() == ",":
                sc.pos += 1
                continue
            break
    sc.expect("]")
    try:
        return AmType(frozenset(entries))
    except InvalidGraph as err:
        raise sc.error(str(err)) from err


def parse_type(text: str) -> AmType:
    """Parse a request annotation such as ``[s, o[s]]`` (``[]`` is the empty type)."""
    sc = _Scanner(text)
    t = _parse_request(sc)
    if not sc.at_end():
        raise sc.error("trailing input")
    return t


def parse_graph(text: str) -> AsGraph:
    sc = _Scanner(text)
    nodes: Dict[str, Node] = {}
    edges = set()
    sources: Dict[str, Tuple[str, AmType]] = {}
    roots: List[str] = []
    refs: List[Tuple[str, int]] = []

    def node() -> str:
        sc.expect("(")
        nid = sc.word("node id")
        if nid in nodes:
            raise sc.error(f"node {nid!r} declared twice")
        label, lex, anchor = None, False, None
        if sc.peek() == "/":
            sc.pos += 1
            label = sc.word("node label")
            if label == LEX:
                label, lex = None, True
        nodes[nid] = Node()
        while sc.peek() == "<":
            sc.pos += 1
            if sc.peek() == "@":
                sc.pos += 1
                num = sc.word("anchor")
                if not num.isdigit():
                    raise sc.error(f"bad anchor {num!r}")
                anchor = int(num)
            else:
                name = sc.word("marker")
                if name == ROOT:
                    roots.append(nid)
                else:
                    req = _parse_request(sc) if sc.peek() == "[" else AmType()
                    if name in sources:
                        raise sc.error(f"source {name!r} occurs twice")
                    sources[name] = (nid, req)
            sc.expect(">")
        nodes[nid] = Node(label, lex, anchor)
        while sc.peek() == ":":
            sc.pos += 1
            elabel = sc.word("edge label")
            inverse = elabel.endswith(INVERSE) and len(elabel) > len(INVERSE)
            if inverse:
                elabel = elabel[: -len(INVERSE)]
            if sc.peek() == "(":
                other = node()
            else:
                other = sc.word("node id or '('")
                refs.append((other, sc.pos))
            edges.add((other, nid, elabel) if inverse else (nid, other, elabel))
        sc.expect(")")
        return nid

    node()
    if not sc.at_end():
        raise sc.error("trailing input")
    for ref, pos in refs:
        if ref not in nodes:
            raise BadGraphLiteral(f"reference to undeclared node {ref!r}", pos)
    if len(roots) != 1:
        raise BadGraphLiteral(f"expected exactly one <root> marker, found {len(roots)}", 0)
    try:
        return AsGraph(nodes, edges, roots[0], sources)
    except InvalidGraph as err:
        raise BadGraphLiteral(str(err), 0) from err


def format_graph(g: AsGraph) -> str:
    """Canonical literal for ``g``; the graph must be connected."""
    visited = set()
    used = set()

    def show(n: str) -> str:
        visited.add(n)
        rec = g.nodes[n]
        out = [n]
        if rec.lex:
            out.append(f"/ {LEX}")
        elif rec.label is not None:
            out.append(f"/ {rec.label}")
        if n == g.root:
            out.append(f"<{ROOT}>")
        for name in g.sources_at(n):
            req = g.sources[name][1]
            out.append(f"<{name}{req}>" if req else f"<{name}>")
        if rec.anchor is not None:
            out.append(f"<@{rec.anchor}>")
        todo = []
        for e in g.edges:
            if e in used or n not in (e[0], e[1]):
                continue
            if e[0] == n:
                todo.append((e[2], 0, e[1], e))
            else:
                todo.append((e[2] + INVERSE, 1, e[0], e))
        for label, _, other, e in sorted(todo):
            if e in used:
                continue
            used.add(e)
            if other in visited:
                out.append(f":{label} {other}")
            else:
                out.append(f":{label} {show(other)}")
        return "(" + " ".join(out) + ")"

    text = show(g.root)
    if len(visited) != len(g.nodes):
        missing = sorted(set(g.nodes) - visited)
        raise FormatError(f"as-graph is not connected; unreachable nodes {missing}")
    return text


# -- file helpers -----------------------------------------------------------------


@contextmanager
def _reading(src: PathOrFile) -> Iterator[TextIO]:
    if hasattr(src, "read"):
        yield src  # type: ignore[misc]
    else:
        with open(src, encoding="utf-8", newline="") as f:
            yield f


@contextmanager
def _writing(dst: PathOrFile) -> Iterator[TextIO]:
    if hasattr(dst, "write"):
        yield dst  # type: ignore[misc]
    else:
        with open(dst, "w", encoding="utf-8", newline="\n") as f:
            yield f


def _blocks(f: TextIO) -> Iterator[Tuple[List[Tuple[int, str]], List[Tuple[int, List[str]]]]]:
    """Yield (comment lines, data rows) per blank-line separated block, with line numbers."""
    comments: List[Tuple[int, str]] = []
    rows: List[Tuple[int, List[str]]] = []
    for lineno, raw in enumerate(f, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if rows:
                yield comments, rows
            elif comments and any(not c.startswith("#SDP") for _, c in comments):
                raise MalformedRow("comment without a following sentence", lineno)
            comments, rows = [], []
        elif line.startswith("#") and not rows:
            comments.append((lineno, line))
        else:
            rows.append((lineno, line.split("\t")))
    if rows:
        yield comments, rows


def _sid(comments: List[Tuple[int, str]]) -> Optional[str]:
    ids = [c[1:] for _, c in comments if not c.startswith("#SDP")]
    return ids[-1] if ids else None


# -- SDP 2015 ------------------------------------------------------------------------

SDP_HEADER = "#SDP 2015"


def read_sdp(src: PathOrFile, frames: bool = True) -> List[SdpGraph]:
    """Read an SDP 2015 file.

    Columns: id, form, lemma, pos, top (+/-), pred (+/-), a frame column when
    ``frames`` is set, then one argument column per predicate in token order.
    """
    fixed = 7 if frames else 6
    graphs = []
    with _reading(src) as f:
        for comments, rows in _blocks(f):
            width = len(rows[0][1])
            tokens, tops, preds, frame_vals = [], [], [], []
            for k, (lineno, cols) in enumerate(rows, 1):
                if len(cols) < fixed:
                    raise MalformedRow(f"expected at least {fixed} columns, got {len(cols)}", lineno)
                if len(cols) != width:
                    raise ColumnCountMismatch(f"row has {len(cols)} columns, block has {width}", lineno)
                if cols[0] != str(k):
                    raise MalformedRow(f"expected token id {k}, got {cols[0]!r}", lineno)
                if cols[4] not in "+-" or cols[5] not in "+-" or not cols[4] or not cols[5]:
                    raise MalformedRow("top and pred columns must be '+' or '-'", lineno)
                tokens.append(Token(k, cols[1], cols[2], cols[3]))
                if cols[4] == "+":
                    tops.append(k)
                if cols[5] == "+":
                    preds.append(k)
                if frames:
                    frame_vals.append(cols[6])
            if width - fixed != len(preds):
                raise DanglingArgColumn(
                    f"{width - fixed} argument columns for {len(preds)} predicates", rows[0][0]
                )
            edges = set()
            for k, (lineno, cols) in enumerate(rows, 1):
                for j, val in enumerate(cols[fixed:]):
                    if val != "_":
                        if (preds[j], k, val) in edges:
                            raise MalformedRow("duplicate edge", lineno)
                        edges.add((preds[j], k, val))
            try:
                graphs.append(
                    SdpGraph.from_edges(tokens, edges, tops, _sid(comments), tuple(frame_vals) if frames else None)
                )
            except InvalidGraph as err:
                raise MalformedRow(str(err), rows[0][0]) from err
    return graphs


def format_sdp(g: SdpGraph, frames: bool = True) -> str:
    preds = sorted({h for h, _, _ in g.edges})
    col = {p: j for j, p in enumerate(preds)}
    lines = []
    if g.sid is not None:
        lines.append(f"#{g.sid}")
    for t in g.tokens:
        args = ["_"] * len(preds)
        for h, d, label in sorted(g.edges):
            if d == t.index:
                args[col[h]] = label
        row = [str(t.index), t.form, t.lemma, t.pos, "+" if t.index in g.tops else "-", "+" if t.index in col else "-"]
        if frames:
            row.append(g.frames[t.index - 1] if g.frames else "_")
        lines.append("\t".join(row + args))
    return "\n".join(lines) + "\n"


def write_sdp(graphs: Iterable[SdpGraph], dst: PathOrFile, frames: bool = True) -> None:
    with _writing(dst) as f:
        f.write(SDP_HEADER + "\n")
        for g in graphs:
            f.write(format_sdp(g, frames))
            f.write("\n")


# -- AM dependency trees ------------------------------------------------------------

AMTREE_COLUMNS = 8


def read_amtrees(src: PathOrFile) -> List[AmTree]:
    """Read a .amtree file: 8 tab-separated columns per token, blank line between sentences.

    Columns: index, form, lemma, pos, supertag literal or ``_``, lexical label
    or ``_``, head, edge label (``APP_x``, ``MOD_x``, ``IGNORE`` or ``ROOT``).
    """
    trees = []
    with _reading(src) as f:
        for comments, rows in _blocks(f):
            tokens, entries = [], []
            for k, (lineno, cols) in enumerate(rows, 1):
                if len(cols) != AMTREE_COLUMNS:
                    raise ColumnCountMismatch(f"expected {AMTREE_COLUMNS} columns, got {len(cols)}", lineno)
                idx, form, lemma, pos, literal, lex, head, label = cols
                if idx != str(k):
                    raise MalformedRow(f"expected token id {k}, got {idx!r}", lineno)
                if not head.isdigit():
                    raise MalformedRow(f"bad head {head!r}", lineno)
                try:
                    op = EdgeOp.parse(label)
                except UnknownEdgeLabel as err:
                    raise UnknownEdgeLabel(str(err), lineno) from err
                try:
                    supertag = None if literal == "_" else parse_graph(literal)
                except BadGraphLiteral as err:
                    raise BadGraphLiteral(f"line {lineno}: {err}", err.position) from err
                tokens.append(Token(k, form, lemma, pos))
                entries.append(Entry(supertag, None if lex == "_" else lex, int(head), op))
            trees.append(AmTree(tuple(tokens), tuple(entries), _sid(comments)))
    return trees


def format_amtree(t: AmTree) -> str:
    lines = []
    if t.sid is not None:
        lines.append(f"#{t.sid}")
    for tok, e in zip(t.tokens, t.entries):
        lines.append(
            "\t".join(
                [
                    str(tok.index),
                    tok.form,
                    tok.lemma,
                    tok.pos,
                    "_" if e.supertag is None else format_graph(e.supertag),
                    "_" if e.lex_label is None else e.lex_label,
                    str(e.head),
                    e.op.label,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_amtrees(trees: Iterable[AmTree], dst: PathOrFile) -> None:
    with _writing(dst) as f:
        for t in trees:
            f.write(format_amtree(t))
            f.write("\n")


def dumps_amtrees(trees: Iterable[AmTree]) -> str:
    buf = _stdio.StringIO()
    write_amtrees(trees, buf)
    return buf.getvalue()


def dumps_sdp(graphs: Iterable[SdpGraph], frames: bool = True) -> str:
    buf = _stdio.StringIO()
    write_sdp(graphs, buf, frames)
    return buf.getvalue()

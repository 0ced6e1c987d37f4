"""Normalization rules that make DM, PAS and PSD trees more alike without changing their graphs.

Each rule fires on tokens whose pattern signature is in its trigger set and
whose POS tag / lemma pass the rule's restriction.  A rule either rewrites the
tree triple completely or raises :class:`Skip`; it never leaves a partial
rewrite behind.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from amnorm.algebra import AM_PLUS, AlgebraMode
from amnorm.amtree import APP, MOD, AmTree, Entry, app, evaluate, evaluate_subtree, mod
from amnorm.errors import AmError
from amnorm.graph import EMPTY, AsGraph, Node, graph_equals, is_punct_pos
from amnorm.patterns import Signature, check_triple, sig, signature


class Triple(NamedTuple):
    dm: AmTree
    pas: AmTree
    psd: AmTree

    @property
    def sid(self) -> Optional[str]:
        return self.dm.sid or self.pas.sid or self.psd.sid


class Skip(Exception):
    """A matched rule that could not (or must not) be applied."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


def vacuous(source: str) -> AsGraph:
    """One unlabeled node that is both root and ``source``: modifying with it changes nothing."""
    return AsGraph({"r": Node()}, (), "r", {source: ("r", EMPTY)})


def _set(tree: AmTree, changes: Dict[int, Entry]) -> AmTree:
    return tree.with_entries(changes)


def _pos(t: Triple, i: int) -> str:
    return t.dm.token(i).pos


# -- the rules ------------------------------------------------------------------


def _vacuous_like(t: Triple, i: int, template: str, banks: Sequence[str]) -> Triple:
    """Give ``banks`` a vacuous modifier at ``i``, attached like token ``i`` in ``template``."""
    e = getattr(t, template).entry(i)
    if e.op.kind != MOD:
        raise Skip("SkipNoHead", f"token {i} is not a modifier in {template.upper()}")
    out = t._asdict()
    for bank in banks:
        tree = out[bank]
        if tree.entry(e.head).ignored:
            raise Skip("SkipNoHead", f"head {e.head} is absent from the {bank.upper()} tree")
        out[bank] = _set(tree, {i: Entry(vacuous(e.op.source), None, e.head, e.op)})
    return Triple(**out)


def rewrite_det(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    if t.dm.entry(i).ignored:
        raise Skip("SkipNoDmHead", "determiner has no DM attachment")
    try:
        return _vacuous_like(t, i, "dm", ["psd"])
    except Skip as s:
        raise Skip("SkipNoDmHead", s.detail) from s


def rewrite_punct(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    return _vacuous_like(t, i, "pas", ["dm", "psd"])


rewrite_aux = rewrite_punct


def rewrite_copula(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    args = {op.source: c for c, op in t.psd.app_children(i)}
    subj, adj = args["s"], args["o"]
    dm = t.dm
    se, ae = dm.entry(subj), dm.entry(adj)
    if se.ignored or ae.ignored or se.head != adj or se.op.kind != APP or se.op.source != "s":
        raise Skip("SkipNoDmEdge", f"no DM edge APP_s({adj} -> {subj})")
    try:
        request = evaluate_subtree(dm, adj, mode, exclude={subj}).type()
    except AmError as err:
        raise Skip("SkipSubtreeNotTypable", str(err)) from err
    const = AsGraph({"r": Node()}, (), "r", {"o": ("r", request)})
    dm = _set(
        dm,
        {
            i: Entry(const, None, ae.head, ae.op),
            adj: Entry(ae.supertag, ae.lex_label, i, app("o")),
            subj: Entry(se.supertag, se.lex_label, i, se.op),
        },
    )
    return t._replace(dm=dm)


NEG = "neg"


def _shift_root(tree: AmTree, i: int, mode: AlgebraMode) -> AmTree:
    e = tree.entry(i)
    if e.op.kind != MOD:
        raise Skip("SkipNotModifier", f"negation {i} is not a modifier")
    g = e.supertag
    if set(g.sources) != {e.op.source}:
        raise Skip("SkipComplexModifier", f"negation {i} has sources {sorted(g.sources)}")
    if tree.children(i):
        raise Skip("SkipHasDependents", f"negation {i} has dependents of its own")
    v = e.head
    try:
        request = evaluate_subtree(tree, v, mode, exclude={i}).type()
    except AmError as err:
        raise Skip("SkipSubtreeNotTypable", str(err)) from err
    attach = g.sources[e.op.source][0]
    shifted = AsGraph(g.nodes, g.edges, attach, {NEG: (attach, request)})
    ve = tree.entry(v)
    return _set(
        tree,
        {
            i: Entry(shifted, e.lex_label, ve.head, ve.op),
            v: Entry(ve.supertag, ve.lex_label, i, app(NEG)),
        },
    )


def rewrite_neg(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    return t._replace(pas=_shift_root(t.pas, i, mode), psd=_shift_root(t.psd, i, mode))


def _move_prep_edge(tree: AmTree, bank: str, i: int, head: int, arg: int, mod_src: str, arg_src: str, mode) -> AmTree:
    ne = tree.entry(arg)
    if ne.ignored or tree.entry(head).ignored or ne.head != head or ne.op.kind != MOD:
        raise Skip("SkipNoMatchingEdge", f"no {bank.upper()} edge MOD({head} -> {arg})")
    g = ne.supertag
    x = ne.op.source
    xnode = g.sources[x][0]
    incident = g.incident(xnode)
    if (
        set(g.sources) != {x}
        or g.sources[x][1]
        or g.nodes[xnode].labeled
        or len(incident) != 1
        or g.root not in incident[0][:2]
    ):
        raise Skip("SkipNoMatchingEdge", f"{bank.upper()} supertag of {arg} is not a single edge to its {x}-source")
    src, tgt, label = incident[0]
    nodes = {n: rec for n, rec in g.nodes.items() if n != xnode}
    stripped = AsGraph(nodes, g.edges - {incident[0]}, g.root, {})
    try:
        staged = _set(tree, {arg: Entry(stripped, ne.lex_label, ne.head, ne.op)})
        request = evaluate_subtree(staged, arg, mode).type()
    except AmError as err:
        raise Skip("SkipSubtreeNotTypable", str(err)) from err
    edge = ("r", "a", label) if src == xnode else ("a", "r", label)
    const = AsGraph({"r": Node(), "a": Node()}, {edge}, "r", {mod_src: ("r", EMPTY), arg_src: ("a", request)})
    return _set(
        tree,
        {
            i: Entry(const, None, head, mod(mod_src)),
            arg: Entry(stripped, ne.lex_label, i, app(arg_src)),
        },
    )


def rewrite_prep(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    pe = t.pas.entry(i)
    (arg, aop), = t.pas.app_children(i)
    banks = ["psd"] if t.dm.entry(i).op.kind == MOD else ["dm", "psd"]
    out = t._asdict()
    for bank in banks:
        out[bank] = _move_prep_edge(out[bank], bank, i, pe.head, arg, pe.op.source, aop.source, mode)
    return Triple(**out)


OP1, OP2 = "op1", "op2"
MEMBER = ".member"


def rewrite_coord(t: Triple, i: int, mode: AlgebraMode) -> Triple:
    try:
        psd_graph = evaluate(t.psd, mode)
    except AmError as err:
        raise Skip("SkipSubtreeNotTypable", f"PSD tree does not evaluate: {err}") from err
    members = sorted(d for h, d, label in psd_graph.edges if h == i and label.endswith(MEMBER))
    if len(members) != 2:
        raise Skip("SkipNotBinary", f"{len(members)} member edges")
    a, b = members
    dm = t.dm
    if dm.entry(b).head == a and dm.entry(b).op.kind == APP:
        h, other = a, b
    elif dm.entry(a).head == b and dm.entry(a).op.kind == APP:
        h, other = b, a
    else:
        raise Skip("SkipNoConjEdge", f"no DM APP edge between conjuncts {a} and {b}")
    he, oe = dm.entry(h), dm.entry(other)
    g = he.supertag
    x = oe.op.source
    xnode, request2 = g.sources[x]
    lex = g.lexical_node()
    incident = g.incident(xnode)
    if lex != g.root or g.nodes[xnode].labeled or len(incident) != 1 or lex not in incident[0][:2]:
        raise Skip("SkipNoConjEdge", f"DM supertag of {h} has no single conjunction edge at its {x}-source")
    src, tgt, label = incident[0]
    nodes = {n: rec for n, rec in g.nodes.items() if n != xnode}
    sources = {name: v for name, v in g.sources.items() if name != x}
    stripped = AsGraph(nodes, g.edges - {incident[0]}, g.root, sources)
    shared = [c for c, op in dm.app_children(h) if op.source in request2.names()]
    staged = _set(dm, {h: Entry(stripped, he.lex_label, he.head, he.op)})
    try:
        request1 = evaluate_subtree(staged, h, mode, exclude={other, *shared}).type()
    except AmError as err:
        raise Skip("SkipSubtreeNotTypable", str(err)) from err
    edge = ("r", "a", label) if src == lex else ("a", "r", label)
    const = AsGraph({"r": Node(), "a": Node()}, {edge}, "r", {OP1: ("r", request1), OP2: ("a", request2)})
    changes = {
        i: Entry(const, None, he.head, he.op),
        h: Entry(stripped, he.lex_label, i, app(OP1)),
        other: Entry(oe.supertag, oe.lex_label, i, app(OP2)),
    }
    for c in shared:
        ce = dm.entry(c)
        changes[c] = Entry(ce.supertag, ce.lex_label, i, ce.op)
    return t._replace(dm=_set(dm, changes))


# -- rule table -------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    id: str
    triggers: FrozenSet[Signature]
    restriction: Callable[[Triple, int, FrozenSet[str]], Optional[str]]
    rewrite: Callable[[Triple, int, AlgebraMode], Triple]


PUNCT_LIKE = frozenset({"IN", "TO", "RP"})


def _only_pos(*tags):
    def check(t: Triple, i: int, punct_pos) -> Optional[str]:
        pos = _pos(t, i)
        return None if pos in tags else f"POS {pos}"

    return check


def _verb(t, i, punct_pos):
    pos = _pos(t, i)
    return None if pos.startswith("V") else f"POS {pos}"


def _punct(t, i, punct_pos):
    pos = _pos(t, i)
    ok = pos in punct_pos if punct_pos is not None else is_punct_pos(pos)
    return None if ok or pos in PUNCT_LIKE else f"POS {pos}"


def _copula(t, i, punct_pos):
    lemma = t.psd.token(i).lemma
    if lemma != "be":
        return f"lemma {lemma}"
    children = t.psd.app_children(i)
    names = sorted(op.source for _, op in children)
    if names != ["o", "s"]:
        return f"PSD arguments {sorted(op.label for _, op in children)}"
    adj = next(c for c, op in children if op.source == "o")
    pos = t.psd.token(adj).pos
    return None if pos.startswith("JJ") else f"predicate POS {pos}"


NEG_LEMMAS = frozenset({"#Neg", "never"})


def _negation(t, i, punct_pos):
    lemma = t.psd.token(i).lemma
    return None if lemma in NEG_LEMMAS else f"lemma {lemma}"


RULES: Dict[str, Rule] = {
    r.id: r
    for r in [
        Rule("DET", frozenset({sig("MOD,MOD,O")}), _only_pos("DT"), rewrite_det),
        Rule("AUX", frozenset({sig("O,CMOD,O")}), _verb, rewrite_aux),
        Rule("PREP", frozenset({sig("CONN,CONN,O"), sig("O,CONN,O")}), _only_pos("IN", "TO"), rewrite_prep),
        Rule(
            "COORD",
            frozenset({sig("O,APP2,APP2"), sig("O,OTHER,OTHER"), sig("O,APP2,OTHER")}),
            _only_pos("CC"),
            rewrite_coord,
        ),
        Rule("COPULA", frozenset({sig("O,CAPP2,APP2")}), _copula, rewrite_copula),
        Rule("NEG", frozenset({sig("APP1,MOD,MOD")}), _negation, rewrite_neg),
        Rule("PUNCT", frozenset({sig("O,MOD,O")}), _punct, rewrite_punct),
    ]
}

RULE_ORDER: Tuple[str, ...] = ("DET", "AUX", "PREP", "COORD", "COPULA", "NEG", "PUNCT")


def check_order(order: Iterable[str]) -> Tuple[str, ...]:
    order = tuple(r.upper() for r in order)
    unknown = [r for r in order if r not in RULES]
    if unknown:
        raise ValueError(f"unknown rule(s) {unknown}; known: {', '.join(RULE_ORDER)}")
    if len(set(order)) != len(order):
        raise ValueError("a rule may appear only once in the order")
    return order


def apply_rule(rule: Rule, t: Triple, i: int, mode: AlgebraMode = AM_PLUS, punct_pos=None) -> Triple:
    """Apply ``rule`` at token ``i`` if its trigger and restriction hold; raises Skip otherwise."""
    s = signature(*t, i)
    if s not in rule.triggers:
        raise Skip("SkipNoTrigger", str(s))
    why = rule.restriction(t, i, punct_pos)
    if why is not None:
        raise Skip("SkipRestriction", why)
    return rule.rewrite(t, i, mode)


# -- pipeline ---------------------------------------------------------------------


@dataclass
class Decision:
    sentence: int
    sid: Optional[str]
    token: int
    form: str
    rule: str
    status: str  # "applied" or "skipped"
    reason: str
    before: str
    after: str


@dataclass
class SentenceResult:
    triple: Triple
    decisions: List[Decision]
    errors: List[str] = field(default_factory=list)
    broken: List[str] = field(default_factory=list)  # banks whose graph changed


def _evaluations(t: Triple, mode: AlgebraMode):
    out = {}
    for bank in ("dm", "pas", "psd"):
        try:
            out[bank] = evaluate(getattr(t, bank), mode)
        except AmError as err:
            out[bank] = err
    return out


def normalize_sentence(
    t: Triple,
    k: int = 0,
    order: Sequence[str] = RULE_ORDER,
    mode: AlgebraMode = AM_PLUS,
    punct_pos=None,
    check: bool = True,
) -> SentenceResult:
    """Run the rules in ``order`` over one sentence; signatures are recomputed for every token."""
    t = Triple(*t)
    decisions: List[Decision] = []
    errors: List[str] = []
    try:
        check_triple(*t)
    except AmError as err:
        return SentenceResult(t, [], [f"{type(err).__name__}: {err}"])
    original = t
    for rid in order:
        rule = RULES[rid]
        for i in t.dm.indices():
            before = signature(*t, i)
            if before not in rule.triggers:
                continue
            form = t.dm.token(i).form
            why = rule.restriction(t, i, punct_pos)
            try:
                if why is not None:
                    raise Skip("SkipRestriction", why)
                new = rule.rewrite(t, i, mode)
            except Skip as s:
                decisions.append(Decision(k, t.sid, i, form, rid, "skipped", str(s), str(before), str(before)))
                continue
            except AmError as err:
                errors.append(f"{rid} at token {i}: {type(err).__name__}: {err}")
                decisions.append(Decision(k, t.sid, i, form, rid, "skipped", f"Error: {err}", str(before), str(before)))
                continue
            t = new
            decisions.append(Decision(k, t.sid, i, form, rid, "applied", "", str(before), str(signature(*t, i))))
    broken = []
    if check and t != original:
        before_g, after_g = _evaluations(original, mode), _evaluations(t, mode)
        for bank in ("dm", "pas", "psd"):
            a, b = before_g[bank], after_g[bank]
            if isinstance(a, Exception):
                if getattr(original, bank) != getattr(t, bank):
                    errors.append(f"{bank.upper()} original tree does not evaluate; rewrite left unchecked: {a}")
                continue
            if isinstance(b, Exception) or not graph_equals(a, b):
                broken.append(bank)
    return SentenceResult(t, decisions, errors, broken)


@dataclass
class TransformReport:
    decisions: List[Decision] = field(default_factory=list)
    errors: List[Tuple[int, str]] = field(default_factory=list)
    broken: List[Tuple[int, str]] = field(default_factory=list)
    change_rates: Dict[str, float] = field(default_factory=dict)
    order: Tuple[str, ...] = RULE_ORDER

    def tallies(self) -> Dict[str, Dict[str, int]]:
        out = {rid: {"matched": 0, "applied": 0, "skipped": 0} for rid in self.order}
        for d in self.decisions:
            row = out[d.rule]
            row["matched"] += 1
            row[d.status] += 1
        return out

    def skip_reasons(self) -> Dict[str, Dict[str, int]]:
        out: Dict[str, Dict[str, int]] = {}
        for d in self.decisions:
            if d.status == "skipped":
                key = d.reason.split(":")[0]
                out.setdefault(d.rule, {}).setdefault(key, 0)
                out[d.rule][key] += 1
        return out

    @property
    def preserved(self) -> bool:
        return not self.broken

    def to_tsv(self) -> str:
        cols = ["sentence", "sid", "token", "form", "rule", "status", "reason", "before", "after"]
        lines = ["\t".join(cols)]
        for d in self.decisions:
            row = asdict(d)
            lines.append("\t".join("_" if row[c] in (None, "") else str(row[c]) for c in cols))
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(d), ensure_ascii=False, sort_keys=True) + "\n" for d in self.decisions)

    def summary(self) -> str:
        lines = [f"{'rule':<8}{'matched':>9}{'applied':>9}{'skipped':>9}"]
        for rid, row in self.tallies().items():
            lines.append(f"{rid:<8}{row['matched']:>9}{row['applied']:>9}{row['skipped']:>9}")
        for bank, rate in self.change_rates.items():
            lines.append(f"lexical as-graphs changed in {bank.upper()}: {rate:.2f}%")
        lines.append("graph preservation: " + ("ok" if self.preserved else f"FAILED for {len(self.broken)} tree(s)"))
        return "\n".join(lines) + "\n"


def workers_from_env(default: int = 1) -> int:
    try:
        return max(1, int(os.environ.get("AMNORM_WORKERS", default)))
    except ValueError:
        return default


def _run(args, order, mode, punct_pos, check):
    k, t = args
    return normalize_sentence(t, k, order, mode, punct_pos, check)


def normalize_corpus(
    triples: Iterable[Sequence[AmTree]],
    order: Sequence[str] = RULE_ORDER,
    mode: AlgebraMode = AM_PLUS,
    punct_pos=None,
    check: bool = True,
    workers: Optional[int] = None,
) -> Tuple[List[Triple], TransformReport]:
    """Normalize every sentence; failures are recorded per sentence and never abort the run.

    ``workers`` defaults to the AMNORM_WORKERS environment variable; output
    order always follows input order.
    """
    from amnorm.metrics import lexicon_change_rate

    order = check_order(order)
    items = [(k, Triple(*t)) for k, t in enumerate(triples)]
    workers = workers_from_env() if workers is None else workers
    run = partial(_run, order=order, mode=mode, punct_pos=punct_pos, check=check)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(run, items, chunksize=max(1, len(items) // (4 * workers))))
    else:
        results = [run(item) for item in items]
    report = TransformReport(order=order)
    out = []
    for (k, _), r in zip(items, results):
        out.append(r.triple)
        report.decisions.extend(r.decisions)
        report.errors.extend((k, e) for e in r.errors)
        report.broken.extend((k, b) for b in r.broken)
    for n, bank in enumerate(("dm", "pas", "psd")):
        before = [t[n] for _, t in items]
        after = [t[n] for t in out]
        report.change_rates[bank] = float(lexicon_change_rate(before, after)) if before else 0.0
    return out, report

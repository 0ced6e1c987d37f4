"""F-scores between AM dependency trees and between graphs, in exact rational arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from amnorm.algebra import AM_PLUS, AlgebraMode
from amnorm.amtree import AmTree
from amnorm.errors import TokenMismatch
from amnorm.graph import SdpGraph, check_aligned


class Counts(NamedTuple):
    matched: int
    predicted: int
    gold: int

    def __add__(self, other):  # type: ignore[override]
        return Counts(self.matched + other.matched, self.predicted + other.predicted, self.gold + other.gold)


ZERO = Counts(0, 0, 0)


@dataclass(frozen=True)
class PRF:
    p: Fraction
    r: Fraction
    f: Fraction
    degenerate: bool = False  # nothing predicted and nothing in the gold standard

    def pct(self, digits: int = 1) -> str:
        return f"{float(100 * self.f):.{digits}f}"


def prf(c: Counts) -> PRF:
    p = Fraction(c.matched, c.predicted) if c.predicted else Fraction(0)
    r = Fraction(c.matched, c.gold) if c.gold else Fraction(0)
    f = 2 * p * r / (p + r) if p + r else Fraction(0)
    return PRF(p, r, f, c.predicted == 0 and c.gold == 0)


def compare_sets(predicted, gold) -> Counts:
    predicted, gold = set(predicted), set(gold)
    return Counts(len(predicted & gold), len(predicted), len(gold))


def corpus_micro_f(counts: Iterable[Counts]) -> PRF:
    """Sum the per-sentence counts, then compute P/R/F once."""
    total = ZERO
    for c in counts:
        total = total + Counts(*c)
    return prf(total)


# -- trees ---------------------------------------------------------------------------

TREE_METRICS = ("uf", "amf", "lf")


class TreeScores(NamedTuple):
    uf: PRF
    amf: PRF
    lf: PRF


def _tree_edges(t: AmTree):
    labeled = t.edges()
    return {
        "uf": {(h, d) for h, d, _ in labeled},
        "amf": {(h, d, label.split("_", 1)[0]) for h, d, label in labeled},
        "lf": set(labeled),
    }


def tree_counts(a: AmTree, b: AmTree) -> Dict[str, Counts]:
    """Counts for ``a`` (prediction) against ``b`` (gold); ROOT counts as the edge 0 -> root."""
    check_aligned(a.tokens, b.tokens)
    ea, eb = _tree_edges(a), _tree_edges(b)
    return {m: compare_sets(ea[m], eb[m]) for m in TREE_METRICS}


def tree_f(a: AmTree, b: AmTree) -> TreeScores:
    c = tree_counts(a, b)
    return TreeScores(*(prf(c[m]) for m in TREE_METRICS))


def corpus_tree_f(a: Sequence[AmTree], b: Sequence[AmTree]) -> TreeScores:
    if len(a) != len(b):
        raise TokenMismatch(f"{len(a)} vs {len(b)} sentences")
    per = [tree_counts(x, y) for x, y in zip(a, b)]
    return TreeScores(*(corpus_micro_f(c[m] for c in per) for m in TREE_METRICS))


# -- graphs --------------------------------------------------------------------------


def _graph_edges(g: SdpGraph, directed: bool, drop: set):
    pairs = [(h, d) for h, d, _ in g.edges if h not in drop and d not in drop]
    if directed:
        return set(pairs)
    return {frozenset(p) for p in pairs}


def graph_counts(
    a: SdpGraph, b: SdpGraph, directed: bool = True, include_punct: bool = True, punct_pos=None
) -> Counts:
    """Unlabeled edge counts; undirected mode compares unordered endpoint pairs."""
    check_aligned(a.tokens, b.tokens)
    drop = set() if include_punct else a.punct_tokens(punct_pos)
    return compare_sets(_graph_edges(a, directed, drop), _graph_edges(b, directed, drop))


def graph_f(a: SdpGraph, b: SdpGraph, directed: bool = True, include_punct: bool = True, punct_pos=None) -> PRF:
    return prf(graph_counts(a, b, directed, include_punct, punct_pos))


def corpus_graph_f(
    a: Sequence[SdpGraph], b: Sequence[SdpGraph], directed: bool = True, include_punct: bool = True, punct_pos=None
) -> PRF:
    if len(a) != len(b):
        raise TokenMismatch(f"{len(a)} vs {len(b)} sentences")
    return corpus_micro_f(graph_counts(x, y, directed, include_punct, punct_pos) for x, y in zip(a, b))


# -- lexicon change ------------------------------------------------------------------


def lexicon_change_counts(before: AmTree, after: AmTree) -> Tuple[int, int]:
    """(changed, considered) over tokens with a supertag on either side."""
    check_aligned(before.tokens, after.tokens)
    changed = considered = 0
    for i in before.indices():
        x, y = before.entry(i).supertag, after.entry(i).supertag
        if x is None and y is None:
            continue
        considered += 1
        if x is None or y is None or not x.isomorphic(y):
            changed += 1
    return changed, considered


def lexicon_change_rate(before: Sequence[AmTree], after: Sequence[AmTree]) -> Fraction:
    """Percentage of lexical as-graphs that differ (up to node ids) between two aligned corpora.

    Tokens that gain or lose a supertag count as changed; the denominator is
    every token that has a supertag before or after.
    """
    if len(before) != len(after):
        raise TokenMismatch(f"{len(before)} vs {len(after)} sentences")
    changed = considered = 0
    for x, y in zip(before, after):
        c, n = lexicon_change_counts(x, y)
        changed += c
        considered += n
    return Fraction(100 * changed, considered) if considered else Fraction(0)


# -- stagewise report ------------------------------------------------------------------

PAIRS = (("dm", "pas"), ("dm", "psd"), ("pas", "psd"))
BANK_INDEX = {"dm": 0, "pas": 1, "psd": 2}


def pair_scores(triples: Sequence[Sequence[AmTree]]) -> Dict[Tuple[str, str], TreeScores]:
    out = {}
    for x, y in PAIRS:
        a = [t[BANK_INDEX[x]] for t in triples]
        b = [t[BANK_INDEX[y]] for t in triples]
        out[(x, y)] = corpus_tree_f(a, b)
    return out


@dataclass
class StageReport:
    """Tree similarity after each cumulative normalization stage."""

    stages: List[str]
    scores: List[Dict[Tuple[str, str], TreeScores]]

    def value(self, stage: str, pair: Tuple[str, str], metric: str) -> Fraction:
        return getattr(self.scores[self.stages.index(stage)][pair], metric).f

    def to_table(self, metrics: Sequence[str] = TREE_METRICS) -> str:
        """Baseline score, the change each stage adds, and the final score."""
        names = {"uf": "UF", "amf": "A/M F", "lf": "LF"}
        head = ["", "Baseline"] + [f"+{s}" for s in self.stages[1:]] + ["All changes"]
        rows = [head]
        for m in metrics:
            for pair in PAIRS:
                vals = [100 * getattr(s[pair], m).f for s in self.scores]
                row = [f"{names[m]} {pair[0].upper()}-{pair[1].upper()}", f"{float(vals[0]):.1f}"]
                row += [f"{float(v - u):+.1f}" for u, v in zip(vals, vals[1:])]
                row.append(f"{float(vals[-1]):.1f}")
                rows.append(row)
        widths = [max(len(r[k]) for r in rows) for k in range(len(head))]
        lines = ["  ".join(c.rjust(w) if k else c.ljust(w) for k, (c, w) in enumerate(zip(r, widths))) for r in rows]
        lines.append("(tree edges include the ROOT attachment 0 -> root; F micro-averaged over sentences)")
        return "\n".join(lines) + "\n"


def stagewise(
    triples: Sequence[Sequence[AmTree]],
    order: Optional[Sequence[str]] = None,
    mode: AlgebraMode = AM_PLUS,
    punct_pos=None,
    workers: Optional[int] = None,
) -> StageReport:
    """Apply the rules one stage at a time and score the three bank pairs after each."""
    from amnorm.transforms import RULE_ORDER, check_order, normalize_corpus

    order = check_order(order or RULE_ORDER)
    current = [tuple(t) for t in triples]
    stages, scores = ["baseline"], [pair_scores(current)]
    for rid in order:
        current, _ = normalize_corpus(current, (rid,), mode, punct_pos, check=False, workers=workers)
        stages.append(rid)
        scores.append(pair_scores(current))
    return StageReport(stages, scores)

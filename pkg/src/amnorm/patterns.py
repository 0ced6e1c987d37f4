"""Local patterns of tokens in AM dependency trees, cross-bank signatures, and censuses."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from amnorm.amtree import APP, IGNORE, MOD, AmTree
from amnorm.errors import TokenMismatch
from amnorm.graph import check_aligned


class Pattern(str, enum.Enum):
    O = "O"
    MOD = "MOD"
    CMOD = "CMOD"
    APP1 = "APP1"
    APP2 = "APP2"
    CAPP2 = "CAPP2"
    CONN = "CONN"
    BASIC = "BASIC"
    OTHER = "OTHER"

    def __str__(self):
        return self.value


BANKS = ("dm", "pas", "psd")


class Signature(NamedTuple):
    """Local patterns of one token, always in DM, PAS, PSD order."""

    dm: Pattern
    pas: Pattern
    psd: Pattern

    @classmethod
    def parse(cls, text: str) -> "Signature":
        parts = [p.strip() for p in text.strip().strip("<>()").split(",")]
        if len(parts) != 3:
            raise ValueError(f"bad signature {text!r}")
        return cls(*(Pattern(p) for p in parts))

    @property
    def aligned(self) -> bool:
        return self.dm == self.pas == self.psd

    def __str__(self):
        return f"<{self.dm},{self.pas},{self.psd}>"


def sig(text: str) -> Signature:
    return Signature.parse(text)


def classify_detail(tree: AmTree, i: int) -> Tuple[Pattern, Optional[str]]:
    """Pattern of token ``i`` plus, for OTHER, a short reason.

    Only incoming edges, the number of outgoing APP edges and the requests at
    the supertag's sources matter; source names and outgoing MOD edges do not.
    """
    e = tree.entry(i)
    if e.op.kind == IGNORE:
        return Pattern.O, None
    n_app = len(tree.app_children(i))
    sources = e.supertag.sources
    requests = any(req for _, req in sources.values())
    if e.op.kind == MOD:
        if n_app == 0:
            return (Pattern.CMOD if len(sources) > 1 or requests else Pattern.MOD), None
        if n_app == 1 and not requests:
            return Pattern.CONN, None
        if requests:
            return Pattern.OTHER, "modifier with request and arguments"
        return Pattern.OTHER, f"modifier with {n_app} arguments"
    # APP or ROOT
    if n_app == 0:
        return Pattern.BASIC, None
    if n_app == 1:
        return (Pattern.OTHER, "one argument with request") if requests else (Pattern.APP1, None)
    if n_app == 2:
        return (Pattern.CAPP2 if requests else Pattern.APP2), None
    return Pattern.OTHER, f"{n_app} arguments"


def classify(tree: AmTree, i: int) -> Pattern:
    return classify_detail(tree, i)[0]


def check_triple(dm: AmTree, pas: AmTree, psd: AmTree) -> None:
    sid = dm.sid or pas.sid or psd.sid
    what = f"sentence {sid}" if sid else "tree triple"
    check_aligned(dm.tokens, pas.tokens, f"{what}: DM and PAS tokens")
    check_aligned(dm.tokens, psd.tokens, f"{what}: DM and PSD tokens")


def signature(dm: AmTree, pas: AmTree, psd: AmTree, i: int) -> Signature:
    check_triple(dm, pas, psd)
    return Signature(classify(dm, i), classify(pas, i), classify(psd, i))


def signatures(dm: AmTree, pas: AmTree, psd: AmTree) -> List[Signature]:
    check_triple(dm, pas, psd)
    return [Signature(classify(dm, i), classify(pas, i), classify(psd, i)) for i in dm.indices()]


# -- census ------------------------------------------------------------------------


@dataclass
class CensusRow:
    signature: Signature
    count: int
    percent: Fraction
    pos: List[Tuple[str, int]]
    lemmas: List[Tuple[str, int]]


@dataclass
class Tally:
    """Mergeable per-signature counts; the associative part of a census."""

    counts: Counter = field(default_factory=Counter)
    pos: Dict[Signature, Counter] = field(default_factory=dict)
    lemmas: Dict[Signature, Counter] = field(default_factory=dict)

    def add(self, s: Signature, pos: str, lemma: str) -> None:
        self.counts[s] += 1
        self.pos.setdefault(s, Counter())[pos] += 1
        self.lemmas.setdefault(s, Counter())[lemma] += 1

    def merge(self, other: "Tally") -> "Tally":
        out = Tally(self.counts + other.counts)
        for attr in ("pos", "lemmas"):
            mine, theirs = getattr(self, attr), getattr(other, attr)
            getattr(out, attr).update({s: mine.get(s, Counter()) + theirs.get(s, Counter()) for s in mine.keys() | theirs.keys()})
        return out


def _top(c: Counter, k: int) -> List[Tuple[str, int]]:
    return sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


@dataclass
class CensusReport:
    rows: List[CensusRow]
    total: int

    @classmethod
    def from_tally(cls, tally: Tally, top: int = 3) -> "CensusReport":
        total = sum(tally.counts.values())
        rows = [
            CensusRow(s, n, Fraction(100 * n, total), _top(tally.pos[s], top), _top(tally.lemmas[s], top))
            for s, n in tally.counts.items()
        ]
        rows.sort(key=lambda r: (-r.count, str(r.signature)))
        return cls(rows, total)

    def counts(self) -> Dict[Signature, int]:
        return {r.signature: r.count for r in self.rows}

    def to_tsv(self) -> str:
        lines = ["signature\tcount\tpercent\tpos\tlemmas"]
        for r in self.rows:
            lines.append(
                "\t".join(
                    [
                        str(r.signature),
                        str(r.count),
                        f"{float(r.percent):.2f}",
                        " ".join(f"{p}:{n}" for p, n in r.pos),
                        " ".join(f"{l}:{n}" for l, n in r.lemmas),
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        if not self.rows:
            return "no tokens\n"
        w = max(len(str(r.signature)) for r in self.rows)
        lines = [f"{'signature':<{w}}  {'count':>7}  {'%':>6}  top POS / lemmas"]
        for r in self.rows:
            pos = ", ".join(f"{p} {n}" for p, n in r.pos)
            lem = ", ".join(f"{l} {n}" for l, n in r.lemmas)
            lines.append(f"{str(r.signature):<{w}}  {r.count:>7}  {float(r.percent):>6.2f}  {pos} / {lem}")
        lines.append(f"{'total':<{w}}  {self.total:>7}")
        return "\n".join(lines) + "\n"


def sentence_tally(triple: Sequence[AmTree]) -> Tally:
    dm, pas, psd = triple
    t = Tally()
    for i, s in zip(dm.indices(), signatures(dm, pas, psd)):
        tok = dm.token(i)
        t.add(s, tok.pos, tok.lemma)
    return t


def census(triples: Iterable[Sequence[AmTree]], top: int = 3) -> CensusReport:
    """Signature frequencies over aligned (DM, PAS, PSD) tree triples.

    POS tags and lemmas in the breakdown are taken from the DM tokens.
    """
    total = Tally()
    for k, triple in enumerate(triples):
        try:
            total = total.merge(sentence_tally(triple))
        except TokenMismatch as err:
            sid = triple[0].sid or f"#{k + 1}"
            raise TokenMismatch(f"sentence {sid}: {err}") from err
    return CensusReport.from_tally(total, top)

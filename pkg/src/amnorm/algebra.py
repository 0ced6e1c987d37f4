"""Apply and Modify over as-graphs, with the AM / AM+ mode distinction."""

from __future__ import annotations

import enum
from typing import Optional

from amnorm.errors import (
    AlgebraError,
    IncompatibleModifier,
    ModeViolation,
    NoSuchSource,
    TypeMismatch,
)
from amnorm.graph import AmType, AsGraph, GraphBuilder


class AlgebraMode(enum.Enum):
    AM = "AM"
    AM_PLUS = "AM_PLUS"

    @property
    def root_sources(self) -> int:
        """How many ordinary sources the root node may carry besides the root marker."""
        return 0 if self is AlgebraMode.AM else 1

    @classmethod
    def parse(cls, text: str) -> "AlgebraMode":
        key = text.strip().upper().replace("+", "_PLUS").replace("-", "_")
        return cls[key]


AM = AlgebraMode.AM
AM_PLUS = AlgebraMode.AM_PLUS


def check_mode(g: AsGraph, mode: AlgebraMode) -> None:
    at_root = g.sources_at(g.root)
    if len(at_root) > mode.root_sources:
        raise ModeViolation(
            f"root node carries source(s) {at_root}; {mode.value} allows {mode.root_sources}"
        )
    g.validate(mode.root_sources)


def type_of(g: AsGraph) -> AmType:
    """The open sources of ``g`` with their requests."""
    return g.type()


def apply_problem(head: AsGraph, x: str, arg: AsGraph) -> Optional[AlgebraError]:
    if x not in head.sources:
        return NoSuchSource(f"head has no {x}-source (open: {head.type()})")
    expected = head.sources[x][1]
    actual = arg.type()
    if actual != expected:
        return TypeMismatch(
            f"APP_{x} requests type {expected}, argument has type {actual}", expected, actual
        )
    for name, (_, req) in arg.sources.items():
        if name in head.sources and name != x and head.sources[name][1] != req:
            return TypeMismatch(
                f"shared source {name} has request {head.sources[name][1]} in head but {req} in argument",
                head.sources[name][1],
                req,
            )
    return None


def modify_problem(head: AsGraph, x: str, mod: AsGraph) -> Optional[AlgebraError]:
    if x not in mod.sources:
        return NoSuchSource(f"modifier has no {x}-source (open: {mod.type()})")
    req = mod.sources[x][1]
    if req and req != head.type():
        return TypeMismatch(
            f"MOD_{x} requests head type {req}, head has type {head.type()}", req, head.type()
        )
    for name, (_, r) in mod.sources.items():
        if name == x:
            continue
        if name not in head.sources:
            return IncompatibleModifier(f"modifier source {name} is not open in the head")
        if head.sources[name][1] != r:
            return IncompatibleModifier(
                f"modifier source {name}{r} does not match head's {name}{head.sources[name][1]}"
            )
    return None


def _disjoint(head: AsGraph, other: AsGraph) -> AsGraph:
    taken = set(head.nodes)
    if not taken & set(other.nodes):
        return other
    mapping = {}
    for n in other.nodes:
        new = n
        while new in taken or new in mapping.values():
            new += "'"
        mapping[n] = new
    return other.renamed(mapping)


def apply(mode: AlgebraMode, head: AsGraph, x: str, arg: AsGraph) -> AsGraph:
    """APP_x: fill the head's x-source with the argument's root.

    Sources the argument shares with the head are merged (this is where
    reentrancies come from); the argument's other sources stay open in the
    result.  If the x-source sits on the head's root (possible only in AM+),
    the merged node stays the root.
    """
    check_mode(head, mode)
    check_mode(arg, mode)
    problem = apply_problem(head, x, arg)
    if problem is not None:
        raise problem
    xnode = head.sources[x][0]
    arg = _disjoint(head, arg)
    b = GraphBuilder(head)
    del b.sources[x]
    b.add(arg)
    shared = []
    for name, (anode, req) in arg.sources.items():
        if name in b.sources:
            shared.append((b.sources[name][0], anode))
        else:
            b.sources[name] = (anode, req)
    b.merge(xnode, arg.root)
    for hnode, anode in shared:
        b.merge(hnode, anode)
    result = b.build()
    check_mode(result, mode)
    return result


def modify(mode: AlgebraMode, head: AsGraph, x: str, modifier: AsGraph) -> AsGraph:
    """MOD_x: attach the modifier's x-node to the head's root.

    The modifier loses its root marker; its remaining sources must be open in
    the head and are merged with the head's nodes of the same name.
    """
    check_mode(head, mode)
    check_mode(modifier, mode)
    problem = modify_problem(head, x, modifier)
    if problem is not None:
        raise problem
    modifier = _disjoint(head, modifier)
    b = GraphBuilder(head)
    b.add(modifier)
    b.merge(head.root, modifier.sources[x][0])
    for name, (mnode, _) in modifier.sources.items():
        if name != x:
            b.merge(head.sources[name][0], mnode)
    result = b.build()
    check_mode(result, mode)
    return result

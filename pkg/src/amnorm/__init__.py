"""AM+ algebra, AM dependency trees, and cross-graphbank tree normalization."""

from amnorm.algebra import AM, AM_PLUS, AlgebraMode, apply, modify, type_of
from amnorm.amtree import AmTree, EdgeOp, Entry, evaluate, well_typed
from amnorm.graph import AmType, AsGraph, Node, SdpGraph, Token, graph_equals, merge_nodes
from amnorm.io import format_graph, parse_graph, parse_type, read_amtrees, read_sdp, write_amtrees, write_sdp
from amnorm.metrics import graph_f, lexicon_change_rate, tree_f
from amnorm.patterns import Pattern, Signature, census, classify, signature
from amnorm.transforms import RULE_ORDER, RULES, normalize_corpus

__version__ = "0.1.0"

"""Event grammars over call events and their intersection with automata."""

from .cfg import (
    NT,
    EventGrammar,
    Production,
    binarize,
    bounded_language,
    is_empty,
    productive_nonterminals,
    reachable_nonterminals,
    remove_useless,
    simplify_grammar,
)
from .extract import DEFAULT_TERMINATING, ExitPolicy, extract_grammar
from .product import ViolationDFA, WitnessEvent, WitnessTrace, intersect, shortest_witness

__all__ = [
    "DEFAULT_TERMINATING", "EventGrammar", "ExitPolicy", "NT", "Production",
    "ViolationDFA", "WitnessEvent", "WitnessTrace", "binarize", "bounded_language",
    "extract_grammar", "intersect", "is_empty", "productive_nonterminals",
    "reachable_nonterminals", "remove_useless", "shortest_witness", "simplify_grammar",
]

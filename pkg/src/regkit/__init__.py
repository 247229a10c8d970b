"""regkit: referring expression generation in context.

Corpus construction, rule-based and feature-based generators, and the
automatic metric suite.
"""
from .corpus import Corpus, CorpusError, Document, EntityMeta, Instance, Registry, SlotAnnotation, extract_instances, parse_corpus, relexicalize
from .pronouns import PronounTable, build_pronoun_table
from .realization import RealizedRE, realize, realize_pronoun, realize_proper_name
from .rules import FormDecision, rreg_l, rreg_s

__all__ = [
    "Corpus", "CorpusError", "Document", "EntityMeta", "Instance", "Registry", "SlotAnnotation",
    "extract_instances", "parse_corpus", "relexicalize", "PronounTable", "build_pronoun_table",
    "RealizedRE", "realize", "realize_pronoun", "realize_proper_name", "FormDecision", "rreg_l", "rreg_s",
]
__version__ = "0.1.0"

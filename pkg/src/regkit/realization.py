"""Turn a referential form into surface tokens."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .corpus import Instance
from .pronouns import PronounTable
from .rules import NON_PRONOMINAL, PRONOMINAL, FormDecision

_ROLE_CASE = {"subject": "nominative", "object": "accusative"}


@dataclass(frozen=True)
class RealizedRE:
    tokens: tuple[str, ...]
    form_used: str

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("realized RE must have at least one token")

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def realize_proper_name(entity_tag: str) -> RealizedRE:
    tokens = tuple(t for t in entity_tag.split("_") if t)
    if not tokens:
        raise ValueError(f"entity tag {entity_tag!r} has no name tokens")
    return RealizedRE(tokens, "proper_name")


def realize_pronoun(entity_tag: str, grammatical_role: str | None, table: PronounTable, case: str | None = None) -> RealizedRE:
    """Pick the paradigm form by grammatical role; an explicit ``case`` wins."""
    paradigm = table.paradigm(entity_tag)
    case = case or _ROLE_CASE.get(grammatical_role or "", "nominative")
    form = (paradigm.get(case) or paradigm["nominative"]).lower()
    return RealizedRE((form,), "pronoun")


def capitalize_initial(re: RealizedRE) -> RealizedRE:
    first = re.tokens[0]
    return RealizedRE((first[:1].upper() + first[1:],) + re.tokens[1:], re.form_used)


def realize(
    decision: FormDecision | str,
    instance: Instance,
    table: PronounTable,
    describe: Callable[[Instance], RealizedRE] | None = None,
) -> RealizedRE:
    """Dispatch a rule decision or an ML form label to a realizer.

    ``describe`` handles the description form (content selection); without
    it descriptions fall back to the proper name.
    """
    form = decision.form if isinstance(decision, FormDecision) else decision
    if form in (PRONOMINAL, "pronoun"):
        out = realize_pronoun(instance.entity_tag, instance.grammatical_role, table, instance.slot.case)
        if instance.sentence_initial:
            out = capitalize_initial(out)
        return out
    if form == "description" and describe is not None:
        return describe(instance)
    if form in (NON_PRONOMINAL, "proper_name", "description"):
        return realize_proper_name(instance.entity_tag)
    raise ValueError(f"unknown form {form!r}")

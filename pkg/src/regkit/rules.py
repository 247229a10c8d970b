"""Rule-based pronominalization: the simple two-rule system and the
local-focus / parallelism system.

Both decide only between a pronominal and a non-pronominal RE. Decisions
look at slot tags, grammatical roles and the pronoun table, never at the
gold RE of the slot being decided.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Instance, SlotAnnotation
from .pronouns import PronounTable

PRONOMINAL = "pronominal"
NON_PRONOMINAL = "non_pronominal"

# rationale codes, one per branch
S_DISCOURSE_NEW = "s:discourse_new"
S_COMPETITOR = "s:competitor"
S_PRONOUN = "s:old_no_competitor"
L_NO_ANTECEDENT = "l:no_antecedent_in_u1"
L_PARALLEL = "l:parallel"
L_FOCUS = "l:focus_no_competitor"
L_NOT_FOCUS = "l:antecedent_not_in_focus"
L_FOCUS_COMPETITOR = "l:competitor_in_focus"


@dataclass(frozen=True)
class FormDecision:
    form: str
    rationale: str

    @property
    def pronominal(self) -> bool:
        return self.form == PRONOMINAL


def _earlier_slots(instance: Instance) -> list[SlotAnnotation]:
    """Slots before the target, inside the instance's context window."""
    start = instance.window[0]
    return [s for s in instance.document.slots[: instance.slot_index] if s.sent >= start]


def is_discourse_old(instance: Instance) -> bool:
    tag = instance.entity_tag
    return any(s.entity_tag == tag for s in _earlier_slots(instance))


def sentence_slots(instance: Instance, sent: int) -> list[SlotAnnotation]:
    return [s for s in instance.document.slots if s.sent == sent]


def competitors(instance: Instance, table: PronounTable, sentences_back: int = 1) -> set[str]:
    """Other entities in the current sentence and ``sentences_back`` previous
    ones that share the target's nominative pronoun."""
    cur = instance.current_sentence_index
    lo = max(0, cur - sentences_back)
    target = instance.entity_tag
    pron = table.nominative(target)
    return {
        s.entity_tag
        for s in instance.document.slots
        if lo <= s.sent <= cur and s.entity_tag != target and table.nominative(s.entity_tag) == pron
    }


def rreg_s(instance: Instance, table: PronounTable) -> FormDecision:
    if not is_discourse_old(instance):
        return FormDecision(NON_PRONOMINAL, S_DISCOURSE_NEW)
    if competitors(instance, table, sentences_back=1):
        return FormDecision(NON_PRONOMINAL, S_COMPETITOR)
    return FormDecision(PRONOMINAL, S_PRONOUN)


def local_focus_set(previous: Sequence[SlotAnnotation], mentioned_before: Iterable[str] = ()) -> set[str]:
    """Entities of the previous sentence that are discourse-old or subjects.

    ``mentioned_before`` holds the tags already mentioned before that sentence.
    """
    seen = set(mentioned_before)
    focus = set()
    for s in previous:
        if s.entity_tag in seen or s.grammatical_role == "subject":
            focus.add(s.entity_tag)
        seen.add(s.entity_tag)
    return focus


def antecedent_in_previous(instance: Instance) -> SlotAnnotation | None:
    """Last mention of the target entity in the previous sentence."""
    prev = instance.current_sentence_index - 1
    if prev < 0:
        return None
    found = None
    for s in sentence_slots(instance, prev):
        if s.entity_tag == instance.entity_tag:
            found = s
    return found


def _parallel(a: str | None, b: str | None) -> bool:
    return a is not None and a == b and a in ("subject", "object")


def rreg_l(instance: Instance, table: PronounTable) -> FormDecision:
    ante = antecedent_in_previous(instance)
    if ante is None:
        return FormDecision(NON_PRONOMINAL, L_NO_ANTECEDENT)
    if _parallel(instance.grammatical_role, ante.grammatical_role):
        return FormDecision(PRONOMINAL, L_PARALLEL)
    prev = instance.current_sentence_index - 1
    start = instance.window[0]
    before = [s.entity_tag for s in instance.document.slots if start <= s.sent < prev]
    focus = local_focus_set(sentence_slots(instance, prev), before)
    if instance.entity_tag not in focus:
        return FormDecision(NON_PRONOMINAL, L_NOT_FOCUS)
    pron = table.nominative(instance.entity_tag)
    if any(t != instance.entity_tag and table.nominative(t) == pron for t in focus):
        return FormDecision(NON_PRONOMINAL, L_FOCUS_COMPETITOR)
    return FormDecision(PRONOMINAL, L_FOCUS)


SYSTEMS = {"rreg-s": rreg_s, "rreg-l": rreg_l}

"""Customization engine: pruning, dependency closure, sessions, enumeration.

The batch path (`apply_requirements`) reduces a family model to the
variants a stakeholder can still decide about; the interactive path
(`Session`) applies one decision at a time and propagates its forced
consequences. `enumerate_products` walks the whole configuration space
and is deliberately brute force: family models at desk scale are small
and the exhaustive walk doubles as a verification oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, Mapping

from .errors import (
    AlternativeConflictError,
    IncompleteConfigurationError,
    PinConflictError,
    SpaceTooLargeError,
    UnknownAreaError,
    UnknownIdError,
)
from .model import (
    Diagnostic,
    FamilyModel,
    Relation,
    Variant,
    is_value_id,
    is_variant_id,
    numeric_key,
    owner_id,
    require_valid,
)

DEFAULT_MAX_SPACE = 10_000_000


@dataclass(frozen=True)
class Requirements:
    """Stakeholder inputs: target area, demanded values, unwanted variants."""

    area: str
    pins: frozenset[str] = frozenset()
    excludes: frozenset[str] = frozenset()


class StateKind(Enum):
    UNDECIDED = "UNDECIDED"
    EXCLUDED = "EXCLUDED"
    INCLUDED = "INCLUDED"
    FORCED_INCLUDED = "FORCED_INCLUDED"
    FORCED_EXCLUDED = "FORCED_EXCLUDED"


_INCLUDED_KINDS = (StateKind.INCLUDED, StateKind.FORCED_INCLUDED)
_EXCLUDED_KINDS = (StateKind.EXCLUDED, StateKind.FORCED_EXCLUDED)


@dataclass(frozen=True)
class VariantState:
    kind: StateKind
    selected: tuple[str, ...] = ()
    cause: str | None = None

    def is_included(self) -> bool:
        return self.kind in _INCLUDED_KINDS

    def is_excluded(self) -> bool:
        return self.kind in _EXCLUDED_KINDS


@dataclass(frozen=True)
class Configuration:
    """Per-variant selection state for one product."""

    area: str
    states: Mapping[str, VariantState]


class ConsequenceKind(Enum):
    FORCES_VALUE = "FORCES_VALUE"
    FORCES_VARIANT = "FORCES_VARIANT"
    EXCLUDES_VARIANT = "EXCLUDES_VARIANT"
    CONFLICT = "CONFLICT"


@dataclass(frozen=True)
class Consequence:
    kind: ConsequenceKind
    subject: str
    cause: str

    def render(self) -> str:
        """Line form, e.g. ``FORCES V1=V1.2 because V3.1``."""
        if self.kind is ConsequenceKind.FORCES_VALUE:
            return f"FORCES {owner_id(self.subject)}={self.subject} because {self.cause}"
        if self.kind is ConsequenceKind.FORCES_VARIANT:
            return f"FORCES {self.subject} because {self.cause}"
        if self.kind is ConsequenceKind.EXCLUDES_VARIANT:
            return f"EXCLUDES {self.subject} because {self.cause}"
        return f"CONFLICT {self.subject} because {self.cause}"


@dataclass(frozen=True)
class Decision:
    action: str  # "include" | "exclude"
    ref: str


# ---------------------------------------------------------------------------
# batch customization
# ---------------------------------------------------------------------------

def prune_by_area(model: FamilyModel, area: str) -> FamilyModel:
    """Drop variants outside ``area``, then anything left unsatisfiable.

    Removal iterates to a fixpoint: a variant goes when one of its
    dependency targets vanished, a value goes when one of its own
    targets vanished, and a variant with no remaining values goes too.
    """
    require_valid(model)
    if area not in model.areas:
        raise UnknownAreaError(f"area '{area}' is not declared by the family", subject=area)
    kept = tuple(v for v in model.variants if v.applies_to(area))
    return replace(model, variants=_unsatisfiable_fixpoint(kept))


def _unsatisfiable_fixpoint(variants: tuple[Variant, ...]) -> tuple[Variant, ...]:
    current = list(variants)
    while True:
        ids = {v.id for v in current} | {val.id for v in current for val in v.values}
        changed = False
        survivors: list[Variant] = []
        for v in current:
            if any(t not in ids for t in v.depends_on):
                changed = True
                continue
            values = tuple(val for val in v.values if all(t in ids for t in val.depends_on))
            if not values:
                changed = True
                continue
            if len(values) != len(v.values):
                changed = True
                v = replace(v, values=values)
            survivors.append(v)
        current = survivors
        if not changed:
            return tuple(current)


def dependency_closure(model: FamilyModel, seed) -> set[str]:
    """Least superset of ``seed`` closed under the requires-relation.

    A value pulls in its owning variant and its own targets; a variant
    pulls in its declared targets. Value targets demand that exact
    value, variant targets demand only inclusion.
    """
    out: set[str] = set()
    stack = sorted(seed, key=numeric_key, reverse=True)
    for ref in stack:
        if not model.has_ref(ref):
            raise UnknownIdError(f"no variant or value '{ref}' in model", subject=ref)
    while stack:
        ref = stack.pop()
        if ref in out:
            continue
        out.add(ref)
        if is_value_id(ref):
            stack.append(owner_id(ref))
            stack.extend(model.value(ref).depends_on)
        else:
            stack.extend(model.variant(ref).depends_on)
    return out


def apply_requirements(model: FamilyModel, reqs: Requirements) -> tuple[FamilyModel, Configuration]:
    """Reduce a model per stakeholder requirements.

    Steps: prune by area, drop excluded variants, close the pins under
    the requires-relation, then collapse every pinned variant's value
    list to exactly the demanded values. Returns the reduced model plus
    a partial configuration (pinned and forced states, rest undecided).
    """
    require_valid(model)
    if reqs.area not in model.areas:
        raise UnknownAreaError(f"area '{reqs.area}' is not declared by the family", subject=reqs.area)
    for ref in sorted(reqs.pins | reqs.excludes, key=numeric_key):
        if not model.has_ref(ref):
            raise UnknownIdError(f"no variant or value '{ref}' in model", subject=ref)
    for pin in sorted(reqs.pins, key=numeric_key):
        if not is_value_id(pin):
            raise UnknownIdError(f"pin '{pin}' must reference a value", subject=pin)
    for ref in sorted(reqs.excludes, key=numeric_key):
        if not is_variant_id(ref):
            raise UnknownIdError(f"exclude '{ref}' must reference a variant", subject=ref)

    pruned = prune_by_area(model, reqs.area)
    retained = tuple(v for v in pruned.variants if v.id not in reqs.excludes)
    reduced_variants = _unsatisfiable_fixpoint(retained)

    # close pins on the full model, attributing each demanded id to the
    # first pin (numeric order) that pulls it in
    demanded: dict[str, str] = {}
    for pin in sorted(reqs.pins, key=numeric_key):
        for ref in sorted(dependency_closure(model, {pin}), key=numeric_key):
            demanded.setdefault(ref, pin)

    surviving_ids = {v.id for v in reduced_variants} | {
        val.id for v in reduced_variants for val in v.values
    }
    for ref in sorted(demanded, key=numeric_key):
        if ref not in surviving_ids:
            raise PinConflictError(
                f"pin '{demanded[ref]}' demands '{ref}', which the customization removed",
                subject=ref,
            )
    by_owner: dict[str, list[str]] = {}
    for ref in sorted(demanded, key=numeric_key):
        if is_value_id(ref):
            by_owner.setdefault(owner_id(ref), []).append(ref)
    for vid, vals in by_owner.items():
        if model.variant(vid).relation is Relation.ALTERNATIVE and len(vals) > 1:
            raise AlternativeConflictError(
                f"values {', '.join(vals)} are all demanded on alternative variant '{vid}'",
                subject=vid,
            )

    collapsed: list[Variant] = []
    for v in reduced_variants:
        wanted = by_owner.get(v.id)
        if wanted:
            collapsed.append(replace(v, values=tuple(val for val in v.values if val.id in wanted)))
        else:
            collapsed.append(v)
    final_variants = _unsatisfiable_fixpoint(tuple(collapsed))
    final_ids = {v.id for v in final_variants} | {val.id for v in final_variants for val in v.values}
    for ref in sorted(demanded, key=numeric_key):
        if ref not in final_ids:
            raise PinConflictError(
                f"pin '{demanded[ref]}' demands '{ref}', which the customization removed",
                subject=ref,
            )

    customized = replace(model, variants=final_variants)
    pinned_owners = {owner_id(pin) for pin in reqs.pins}
    states: dict[str, VariantState] = {}
    for v in final_variants:
        selected = tuple(val.id for val in v.values if val.id in demanded)
        if v.id in pinned_owners:
            states[v.id] = VariantState(StateKind.INCLUDED, selected=selected)
        elif v.id in demanded or selected:
            cause = demanded.get(v.id) or demanded[selected[0]]
            states[v.id] = VariantState(StateKind.FORCED_INCLUDED, selected=selected, cause=cause)
        else:
            states[v.id] = VariantState(StateKind.UNDECIDED)
    return customized, Configuration(area=reqs.area, states=states)


# ---------------------------------------------------------------------------
# configuration validation
# ---------------------------------------------------------------------------

def validate_configuration(model: FamilyModel, config: Configuration) -> list[Diagnostic]:
    """Diagnostics for a total configuration; empty means a valid product."""
    require_valid(model)
    if config.area not in model.areas:
        raise UnknownAreaError(f"area '{config.area}' is not declared by the family", subject=config.area)
    for ref in config.states:
        if ref not in {v.id for v in model.variants}:
            raise UnknownIdError(f"no variant '{ref}' in model", subject=ref)
    missing = [v.id for v in model.variants if v.id not in config.states]
    if missing:
        raise IncompleteConfigurationError(
            f"configuration is missing variants: {', '.join(missing)}", subject=missing[0]
        )

    def included(ref: str) -> bool:
        state = config.states.get(owner_id(ref))
        if state is None or not state.is_included():
            return False
        if is_value_id(ref):
            return ref in state.selected
        return True

    out: list[Diagnostic] = []
    for v in model.variants:
        state = config.states[v.id]
        if state.kind is StateKind.UNDECIDED:
            raise IncompleteConfigurationError(f"variant '{v.id}' is undecided", subject=v.id)
        if state.is_included():
            for val in state.selected:
                model.value(val)  # raises UnknownIdError for foreign values
                if owner_id(val) != v.id:
                    raise UnknownIdError(f"value '{val}' does not belong to '{v.id}'", subject=val)
            if not v.applies_to(config.area):
                out.append(
                    Diagnostic("AREA_VIOLATION", v.id, f"variant is not applicable to area '{config.area}'")
                )
            if v.relation is Relation.ALTERNATIVE and len(state.selected) != 1:
                out.append(
                    Diagnostic(
                        "ALTERNATIVE_VIOLATION",
                        v.id,
                        f"alternative variant selects {len(state.selected)} values instead of exactly one",
                    )
                )
            if v.relation is Relation.OR and not state.selected:
                out.append(Diagnostic("OR_VIOLATION", v.id, "or variant selects no value"))
            for target in v.depends_on:
                if not included(target):
                    out.append(
                        Diagnostic("DEPENDENCY_VIOLATION", v.id, f"requires '{target}', which is not selected")
                    )
            for val in v.values:
                if val.id in state.selected:
                    for target in val.depends_on:
                        if not included(target):
                            out.append(
                                Diagnostic(
                                    "DEPENDENCY_VIOLATION",
                                    val.id,
                                    f"requires '{target}', which is not selected",
                                )
                            )
        elif v.mandatory:
            out.append(Diagnostic("MANDATORY_VIOLATION", v.id, "mandatory variant is excluded"))
    return out


# ---------------------------------------------------------------------------
# interactive sessions
# ---------------------------------------------------------------------------

class Session:
    """Live decision state over a (possibly customized) family model.

    The session owns a replayable log: baseline states (from
    apply_requirements) plus the applied decisions fully determine the
    current states, so retracting a decision replays the rest.
    """

    def __init__(
        self,
        model: FamilyModel,
        area: str,
        baseline: Mapping[str, VariantState] | None = None,
    ):
        require_valid(model)
        if area not in model.areas:
            raise UnknownAreaError(f"area '{area}' is not declared by the family", subject=area)
        self.model = prune_by_area(model, area)
        self.area = area
        self.baseline: dict[str, VariantState] = {}
        for ref, state in (baseline or {}).items():
            self.model.variant(ref)
            self.baseline[ref] = state
        self.log: list[Decision] = []
        self.states: dict[str, VariantState] = {}
        self.demanded: set[str] = set()
        self._replay()

    # -- state bookkeeping ------------------------------------------------

    def _replay(self) -> None:
        self.states = {v.id: VariantState(StateKind.UNDECIDED) for v in self.model.variants}
        self.states.update(self.baseline)
        self.demanded = set()
        for state in self.baseline.values():
            for val in state.selected:
                self.demanded |= {r for r in dependency_closure(self.model, {val}) if is_value_id(r)}
        for decision in self.log:
            states, demanded, consequences, conflicts = self._propagate(decision)
            if conflicts:
                raise RuntimeError(f"session log no longer replays cleanly at {decision}")
            self.states, self.demanded = states, demanded

    def _propagate(self, decision: Decision):
        """Compute the decision's effect on copies of the session state."""
        states = dict(self.states)
        demanded = set(self.demanded)
        consequences: list[Consequence] = []
        conflicts: list[Consequence] = []

        def conflict(subject: str, cause: str) -> None:
            conflicts.append(Consequence(ConsequenceKind.CONFLICT, subject, cause))

        def include_value(ref: str, direct: bool, cause: str) -> None:
            if conflicts:
                return
            variant = self.model.owner(ref)
            value = self.model.value(ref)
            state = states[variant.id]
            if state.is_excluded():
                conflict(ref, state.cause or variant.id)
                return
            selected = state.selected
            if ref not in selected:
                if variant.relation is Relation.ALTERNATIVE and selected:
                    other = selected[0]
                    if other in demanded or not direct:
                        conflict(ref, other)
                        return
                    selected = (ref,)  # a free answer may be re-decided
                else:
                    selected = selected + (ref,)
            newly_included = not state.is_included()
            if not direct and ref not in state.selected:
                consequences.append(Consequence(ConsequenceKind.FORCES_VALUE, ref, cause))
            if newly_included:
                consequences.append(Consequence(ConsequenceKind.FORCES_VARIANT, variant.id, cause))
            kind = StateKind.INCLUDED if direct else (
                state.kind if state.kind is StateKind.INCLUDED else StateKind.FORCED_INCLUDED
            )
            states[variant.id] = VariantState(
                kind, selected=selected, cause=None if kind is StateKind.INCLUDED else (state.cause or cause)
            )
            if not direct:
                demanded.add(ref)
            for target in variant.depends_on:
                demand(target, cause)
            for target in value.depends_on:
                demand(target, cause)

        def force_variant(ref: str, cause: str) -> None:
            if conflicts:
                return
            variant = self.model.variant(ref)
            state = states[ref]
            if state.is_excluded():
                conflict(ref, state.cause or ref)
                return
            if state.is_included():
                return
            consequences.append(Consequence(ConsequenceKind.FORCES_VARIANT, ref, cause))
            states[ref] = VariantState(StateKind.FORCED_INCLUDED, cause=cause)
            for target in variant.depends_on:
                demand(target, cause)

        def demand(target: str, cause: str) -> None:
            if conflicts:
                return
            if is_value_id(target):
                if target in demanded:
                    return
                include_value(target, direct=False, cause=cause)
            else:
                force_variant(target, cause)

        def blocked(val) -> bool:
            return any(states[owner_id(t)].is_excluded() for t in val.depends_on)

        def exclude_variant(ref: str, direct: bool, cause: str) -> None:
            if conflicts:
                return
            variant = self.model.variant(ref)
            state = states[ref]
            if state.is_included():
                contradicting = state.selected[0] if state.selected else (state.cause or ref)
                conflict(ref, contradicting)
                return
            if variant.mandatory:
                conflict(ref, ref)
                return
            if state.is_excluded():
                return
            if direct:
                states[ref] = VariantState(StateKind.EXCLUDED)
            else:
                states[ref] = VariantState(StateKind.FORCED_EXCLUDED, cause=cause)
                consequences.append(Consequence(ConsequenceKind.EXCLUDES_VARIANT, ref, cause))
            # mirror the pruning fixpoint over the live states
            changed = True
            while changed and not conflicts:
                changed = False
                for w in self.model.variants:
                    wstate = states[w.id]
                    if wstate.is_excluded():
                        continue
                    broken = any(states[owner_id(t)].is_excluded() for t in w.depends_on)
                    if not broken and wstate.selected:
                        if any(blocked(val) for val in w.values if val.id in wstate.selected):
                            broken = True
                    if broken:
                        if wstate.is_included():
                            conflict(w.id, cause)
                            return
                        states[w.id] = VariantState(StateKind.FORCED_EXCLUDED, cause=cause)
                        consequences.append(Consequence(ConsequenceKind.EXCLUDES_VARIANT, w.id, cause))
                        changed = True
                        continue
                    if all(blocked(val) for val in w.values):
                        if wstate.is_included():
                            conflict(w.id, cause)
                            return
                        states[w.id] = VariantState(StateKind.FORCED_EXCLUDED, cause=cause)
                        consequences.append(Consequence(ConsequenceKind.EXCLUDES_VARIANT, w.id, cause))
                        changed = True

        if decision.action == "include":
            if not self.model.has_ref(decision.ref) or not is_value_id(decision.ref):
                raise UnknownIdError(f"no value '{decision.ref}' in session model", subject=decision.ref)
            include_value(decision.ref, direct=True, cause=decision.ref)
        elif decision.action == "exclude":
            if not is_variant_id(decision.ref):
                raise UnknownIdError(f"exclude targets a variant, got '{decision.ref}'", subject=decision.ref)
            self.model.variant(decision.ref)
            exclude_variant(decision.ref, direct=True, cause=decision.ref)
        else:
            raise ValueError(f"unknown decision action '{decision.action}'")

        if conflicts:
            return self.states, self.demanded, conflicts, conflicts
        return states, demanded, consequences, []

    # -- public operations -------------------------------------------------

    def preview_decision(self, decision: Decision) -> list[Consequence]:
        """Consequences the decision would have, without applying it."""
        _, _, consequences, _ = self._propagate(decision)
        return consequences

    def apply_decision(self, decision: Decision) -> list[Consequence]:
        """Apply a decision; on conflict the session is left unchanged.

        Commits by replaying the updated log: when a direct include
        replaces a free alternative answer, the replaced decision leaves
        the log and the forcings it introduced dissolve with it.
        """
        states, _demanded, consequences, conflicts = self._propagate(decision)
        if conflicts:
            return conflicts
        self.log = [
            d
            for d in self.log
            if d.action != "include" or d.ref in states[owner_id(d.ref)].selected
        ]
        if decision not in self.log:
            self.log.append(decision)
        self._replay()
        return consequences

    def retract_decision(self, decision: Decision) -> None:
        """Drop a logged decision and replay the remainder."""
        if decision not in self.log:
            raise UnknownIdError(f"decision {decision.action} {decision.ref} is not in the log", subject=decision.ref)
        self.log.remove(decision)
        self._replay()

    def open_variants(self) -> list[str]:
        """Variants still awaiting an answer, in model order."""
        out = []
        for v in self.model.variants:
            state = self.states[v.id]
            if state.kind is StateKind.UNDECIDED:
                out.append(v.id)
            elif state.is_included() and not state.selected:
                out.append(v.id)
        return out

    def is_complete(self) -> bool:
        return not self.open_variants() and all(
            not s.is_included() or s.selected for s in self.states.values()
        )

    def configuration(self) -> Configuration:
        """Total configuration projection; fails while decisions remain."""
        open_ids = self.open_variants()
        if open_ids:
            raise IncompleteConfigurationError(
                f"variants still undecided: {', '.join(open_ids)}", subject=open_ids[0]
            )
        states = {}
        for v in self.model.variants:
            s = self.states[v.id]
            if s.is_included():
                states[v.id] = VariantState(StateKind.INCLUDED, selected=s.selected)
            else:
                states[v.id] = VariantState(StateKind.EXCLUDED)
        return Configuration(area=self.area, states=states)


def new_session(
    model: FamilyModel, area: str, baseline: Mapping[str, VariantState] | None = None
) -> Session:
    return Session(model, area, baseline)


# ---------------------------------------------------------------------------
# exhaustive enumeration
# ---------------------------------------------------------------------------

def _admissible_selections(variant: Variant) -> list[tuple[str, ...]]:
    """Relation-admissible value selections in lexicographic order."""
    ids = variant.value_ids()
    if variant.relation is Relation.ALTERNATIVE:
        return [(v,) for v in ids]
    subsets = []
    for size in range(1, len(ids) + 1):
        subsets.extend(itertools.combinations(ids, size))
    subsets.sort(key=lambda sel: tuple(ids.index(v) for v in sel))
    return subsets


def enumerate_products(
    model: FamilyModel, area: str, max_space: int = DEFAULT_MAX_SPACE
) -> Iterator[Configuration]:
    """Yield every valid configuration at ``area``, lexicographically.

    Configurations are total over the area-pruned model. The raw state
    space (per-variant: exclusion plus each admissible selection) is
    capped before walking; raise the cap deliberately for big models.
    """
    pruned = prune_by_area(model, area)
    space = 1
    candidates: list[list[VariantState]] = []
    for v in pruned.variants:
        selections = _admissible_selections(v)
        space *= 1 + len(selections)
        if space > max_space:
            raise SpaceTooLargeError(
                f"state space exceeds cap of {max_space}; raise --max-space to enumerate",
                subject=v.id,
            )
        options = [] if v.mandatory else [VariantState(StateKind.EXCLUDED)]
        options.extend(VariantState(StateKind.INCLUDED, selected=sel) for sel in selections)
        candidates.append(options)

    order = [v.id for v in pruned.variants]
    variants = {v.id: v for v in pruned.variants}

    def satisfiable_so_far(states: dict[str, VariantState]) -> bool:
        # partial check: only dependencies whose target is already assigned
        for vid, state in states.items():
            if not state.is_included():
                continue
            targets = list(variants[vid].depends_on)
            for val in variants[vid].values:
                if val.id in state.selected:
                    targets.extend(val.depends_on)
            for t in targets:
                o = owner_id(t)
                if o not in states:
                    continue
                ostate = states[o]
                if not ostate.is_included() or (is_value_id(t) and t not in ostate.selected):
                    return False
        return True

    def walk(i: int, states: dict[str, VariantState]) -> Iterator[Configuration]:
        if i == len(order):
            config = Configuration(area=area, states=dict(states))
            if not validate_configuration(pruned, config):
                yield config
            return
        for option in candidates[i]:
            states[order[i]] = option
            if satisfiable_so_far(states):
                yield from walk(i + 1, states)
            del states[order[i]]

    yield from walk(0, {})


def count_products(model: FamilyModel, area: str, max_space: int = DEFAULT_MAX_SPACE) -> int:
    """Number of valid configurations at ``area``."""
    return sum(1 for _ in enumerate_products(model, area, max_space))


def total_configuration(full_model: FamilyModel, config: Configuration) -> Configuration:
    """Extend a configuration over ``full_model``, marking absent variants excluded."""
    states = dict(config.states)
    for v in full_model.variants:
        states.setdefault(v.id, VariantState(StateKind.EXCLUDED))
    return Configuration(area=config.area, states=states)

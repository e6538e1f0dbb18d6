"""Variant-model data types and structural validation.

A family model mirrors the tabular variant model of a system family:
each variant row carries its values, an OR/Alternative relation, the
areas it applies to, and requires-dependencies on other variants or on
specific values. Models are immutable; customization builds new ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable

from .errors import UnknownIdError

#: Reserved applicability token meaning "every declared area".
ALL_AREAS = "ALL"

_VARIANT_ID_RE = re.compile(r"V[1-9][0-9]*")
_VALUE_ID_RE = re.compile(r"(V[1-9][0-9]*)\.([1-9][0-9]*)")


def is_variant_id(ref: str) -> bool:
    """True when ``ref`` has the canonical variant form ``V<k>``."""
    return _VARIANT_ID_RE.fullmatch(ref) is not None


def is_value_id(ref: str) -> bool:
    """True when ``ref`` has the canonical value form ``V<k>.<j>``."""
    return _VALUE_ID_RE.fullmatch(ref) is not None


def owner_id(ref: str) -> str:
    """Variant id owning ``ref``; the identity for variant ids."""
    m = _VALUE_ID_RE.fullmatch(ref)
    return m.group(1) if m else ref


def numeric_key(ref: str) -> tuple[int, int]:
    """Sort key ordering ids by variant number, then value number."""
    m = _VALUE_ID_RE.fullmatch(ref)
    if m:
        return (int(m.group(1)[1:]), int(m.group(2)))
    if is_variant_id(ref):
        return (int(ref[1:]), 0)
    return (1 << 30, 0)


class Relation(Enum):
    """How many values may be chosen when a variant is included."""

    ALTERNATIVE = "alternative"  # exactly one value
    OR = "or"  # at least one value


@dataclass(frozen=True)
class Diagnostic:
    """One validation finding: a stable code, the offending id, and prose."""

    code: str
    subject: str
    message: str

    def render(self) -> str:
        return f"{self.code} {self.subject}: {self.message}"


@dataclass(frozen=True)
class VariantValue:
    id: str
    name: str
    depends_on: tuple[str, ...] = ()


@dataclass(frozen=True)
class Variant:
    id: str
    name: str
    relation: Relation
    values: tuple[VariantValue, ...]
    question: str = ""
    mandatory: bool = False
    applicable_areas: frozenset[str] = frozenset((ALL_AREAS,))
    depends_on: tuple[str, ...] = ()

    def value_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.values)

    def applies_to(self, area: str) -> bool:
        return ALL_AREAS in self.applicable_areas or area in self.applicable_areas


@dataclass(frozen=True)
class FamilyModel:
    name: str
    areas: tuple[str, ...]
    variants: tuple[Variant, ...]

    @cached_property
    def _variant_index(self) -> dict[str, Variant]:
        return {v.id: v for v in self.variants}

    @cached_property
    def _value_index(self) -> dict[str, tuple[Variant, VariantValue]]:
        return {val.id: (v, val) for v in self.variants for val in v.values}

    def variant_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.variants)

    def has_ref(self, ref: str) -> bool:
        return ref in self._variant_index or ref in self._value_index

    def variant(self, variant_id: str) -> Variant:
        try:
            return self._variant_index[variant_id]
        except KeyError:
            raise UnknownIdError(f"no variant '{variant_id}' in model", subject=variant_id) from None

    def value(self, value_id: str) -> VariantValue:
        try:
            return self._value_index[value_id][1]
        except KeyError:
            raise UnknownIdError(f"no value '{value_id}' in model", subject=value_id) from None

    def owner(self, ref: str) -> Variant:
        """Owning variant of a variant or value reference."""
        if ref in self._variant_index:
            return self._variant_index[ref]
        if ref in self._value_index:
            return self._value_index[ref][0]
        raise UnknownIdError(f"no variant or value '{ref}' in model", subject=ref)

    def area_sort_key(self, area: str):
        """Canonical area ordering: ALL first, then declaration order."""
        if area == ALL_AREAS:
            return (0, 0, "")
        if area in self.areas:
            return (1, self.areas.index(area), "")
        return (2, 0, area)


def validate_model(model: FamilyModel) -> list[Diagnostic]:
    """Check every structural rule and return one diagnostic per violation.

    The list is deterministic: model order first, then code. An empty
    list means the model is well-formed.
    """
    found: list[tuple[int, Diagnostic]] = []

    def add(pos: int, code: str, subject: str, message: str) -> None:
        found.append((pos, Diagnostic(code, subject, message)))

    seen_areas: set[str] = set()
    for area in model.areas:
        if area == ALL_AREAS:
            add(-1, "UNKNOWN_AREA", area, "reserved token ALL cannot be a declared area")
        elif area in seen_areas:
            add(-1, "DUPLICATE_ID", area, "area declared more than once")
        seen_areas.add(area)
    declared = set(model.areas)

    all_ids: set[str] = set()
    for v in model.variants:
        all_ids.add(v.id)
        all_ids.update(val.id for val in v.values)

    def check_dep(pos: int, variant: Variant, holder: str, target: str) -> None:
        if owner_id(target) == variant.id:
            add(pos, "SELF_DEPENDENCY", holder, f"dependency on own variant via '{target}'")
        if target not in all_ids:
            add(pos, "DANGLING_DEPENDENCY", holder, f"dependency target '{target}' does not exist")

    seen_ids: set[str] = set()
    for pos, v in enumerate(model.variants):
        if v.id in seen_ids:
            add(pos, "DUPLICATE_ID", v.id, "id declared more than once")
        seen_ids.add(v.id)
        if not is_variant_id(v.id):
            add(pos, "BAD_NUMBERING", v.id, "variant ids use the form V<k>")
        if not v.values:
            add(pos, "EMPTY_VALUES", v.id, "variant declares no values")
        if not v.applicable_areas:
            add(pos, "UNKNOWN_AREA", v.id, "variant declares no applicable area")
        else:
            for area in sorted(v.applicable_areas, key=model.area_sort_key):
                if area != ALL_AREAS and area not in declared:
                    add(pos, "UNKNOWN_AREA", v.id, f"area '{area}' is not declared by the family")
        for val in v.values:
            if val.id in seen_ids:
                add(pos, "DUPLICATE_ID", val.id, "id declared more than once")
            seen_ids.add(val.id)
            m = _VALUE_ID_RE.fullmatch(val.id)
            if m is None or m.group(1) != v.id:
                add(pos, "BAD_NUMBERING", val.id, f"value ids of {v.id} use the form {v.id}.<j>")
        for target in v.depends_on:
            check_dep(pos, v, v.id, target)
        for val in v.values:
            for target in val.depends_on:
                check_dep(pos, v, val.id, target)

    for pos, members in _dependency_cycles(model):
        chain = " -> ".join(members + [members[0]])
        add(pos, "DEPENDENCY_CYCLE", members[0], f"depends-on cycle: {chain}")

    found.sort(key=lambda item: (item[0], item[1].code))
    return [diag for _, diag in found]


def _dependency_cycles(model: FamilyModel) -> list[tuple[int, list[str]]]:
    """Strongly connected components (size > 1) of the variant depends-on graph.

    Self-loops are reported separately as SELF_DEPENDENCY and ignored here.
    Returns (position of earliest member, members in model order) per cycle.
    """
    position = {v.id: i for i, v in enumerate(model.variants)}
    edges: dict[str, list[str]] = {v.id: [] for v in model.variants}
    for v in model.variants:
        targets: list[str] = list(v.depends_on)
        for val in v.values:
            targets.extend(val.depends_on)
        for t in targets:
            o = owner_id(t)
            if o != v.id and o in position and o not in edges[v.id]:
                edges[v.id].append(o)

    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[list[str]] = []

    def strongconnect(node: str) -> None:
        index[node] = low[node] = counter[0]
        counter[0] += 1
        stack.append(node)
        on_stack.add(node)
        for succ in edges[node]:
            if succ not in index:
                strongconnect(succ)
                low[node] = min(low[node], low[succ])
            elif succ in on_stack:
                low[node] = min(low[node], index[succ])
        if low[node] == index[node]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == node:
                    break
            if len(comp) > 1:
                sccs.append(comp)

    for v in model.variants:
        if v.id not in index:
            strongconnect(v.id)

    out = []
    for comp in sccs:
        ordered = sorted(comp, key=lambda vid: position[vid])
        out.append((position[ordered[0]], ordered))
    out.sort(key=lambda item: item[0])
    return out


def require_valid(model: FamilyModel) -> None:
    """Raise InvalidModelError when validate_model reports anything."""
    from .errors import InvalidModelError

    diagnostics = validate_model(model)
    if diagnostics:
        raise InvalidModelError(diagnostics)


def resolve_refs(model: FamilyModel, refs: Iterable[str]) -> None:
    """Raise UnknownIdError for any reference absent from the model."""
    for ref in refs:
        if not model.has_ref(ref):
            raise UnknownIdError(f"no variant or value '{ref}' in model", subject=ref)

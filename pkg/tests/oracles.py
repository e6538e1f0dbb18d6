"""Independent brute-force oracles used to cross-check the engine.

Everything here deliberately re-derives semantics from scratch: the
enumeration oracle builds raw per-variant assignments with itertools and
checks validity with its own rule code, and the cycle oracle uses a
transitive-closure matrix. None of it calls famvar.configure logic, so a
bug in the engine cannot hide in its own verifier.
"""

from __future__ import annotations

import itertools

from famvar.model import ALL_AREAS, FamilyModel


def _owner(ref: str) -> str:
    return ref.split(".")[0] if "." in ref else ref


def oracle_assignments(model: FamilyModel, area: str):
    """All raw per-variant assignments at ``area``: None = excluded, else a value tuple.

    A variant outside the area is pinned to None. The raw space is the
    cartesian product of relation-admissible selections; dependencies
    are not consulted here (the checker filters them).
    """
    per_variant = []
    for v in model.variants:
        applicable = ALL_AREAS in v.applicable_areas or area in v.applicable_areas
        if not applicable:
            per_variant.append([None])
            continue
        ids = [val.id for val in v.values]
        if v.relation.value == "alternative":
            selections = [(i,) for i in ids]
        else:
            selections = [
                combo for size in range(1, len(ids) + 1) for combo in itertools.combinations(ids, size)
            ]
        options = selections if v.mandatory else [None] + selections
        per_variant.append(options)
    names = [v.id for v in model.variants]
    for combo in itertools.product(*per_variant):
        yield dict(zip(names, combo))


def oracle_is_valid(model: FamilyModel, area: str, assignment: dict) -> bool:
    """Re-implementation of product validity over a raw assignment."""
    selected: set[str] = set()
    included: set[str] = set()
    for vid, sel in assignment.items():
        if sel is not None:
            included.add(vid)
            selected.update(sel)

    for v in model.variants:
        sel = assignment[v.id]
        if sel is None:
            if v.mandatory:
                return False
            continue
        if not (ALL_AREAS in v.applicable_areas or area in v.applicable_areas):
            return False
        if v.relation.value == "alternative" and len(sel) != 1:
            return False
        if v.relation.value == "or" and len(sel) == 0:
            return False
        targets = list(v.depends_on)
        for val in v.values:
            if val.id in sel:
                targets.extend(val.depends_on)
        for t in targets:
            if "." in t:
                if t not in selected:
                    return False
            elif t not in included:
                return False
    return True


def oracle_valid_assignments(model: FamilyModel, area: str):
    """Valid assignments over the area-applicable variants only."""
    applicable = {
        v.id for v in model.variants if ALL_AREAS in v.applicable_areas or area in v.applicable_areas
    }
    for assignment in oracle_assignments(model, area):
        if oracle_is_valid(model, area, assignment):
            yield {vid: sel for vid, sel in assignment.items() if vid in applicable}


def oracle_count(model: FamilyModel, area: str) -> int:
    return sum(1 for _ in oracle_valid_assignments(model, area))


def cycle_variants_by_closure(model: FamilyModel) -> set[str]:
    """Variants on a depends-on cycle, via a transitive-closure matrix.

    Self-dependencies are ignored, matching validate_model's split
    between SELF_DEPENDENCY and DEPENDENCY_CYCLE.
    """
    ids = [v.id for v in model.variants]
    idx = {vid: i for i, vid in enumerate(ids)}
    n = len(ids)
    reach = [[False] * n for _ in range(n)]
    for v in model.variants:
        targets = list(v.depends_on)
        for val in v.values:
            targets.extend(val.depends_on)
        for t in targets:
            o = _owner(t)
            if o in idx and o != v.id:
                reach[idx[v.id]][idx[o]] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return {ids[i] for i in range(n) if reach[i][i]}


def reachable(edges, start: str) -> set[str]:
    """Nodes reachable from ``start`` following directed edges."""
    adjacency: dict[str, list[str]] = {}
    for src, dst in edges:
        adjacency.setdefault(src, []).append(dst)
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for succ in adjacency.get(node, ()):
            if succ not in seen:
                seen.add(succ)
                frontier.append(succ)
    return seen

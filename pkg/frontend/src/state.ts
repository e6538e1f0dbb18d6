/**
 * Wizard view state: a mirror of the latest service responses.
 *
 * The client performs no constraint computation. Everything shown --
 * open decisions, forced states, consequence toasts -- is copied from
 * the most recent server payload; the only local knowledge is display
 * lookups (id to name) and the refs of decisions the user clicked, kept
 * so the undo button knows what to retract.
 */

import type {
  ConfigurationJson,
  ConsequenceJson,
  DecisionEntryJson,
  ModelViewJson,
} from "./types.js";

export class ViewState {
  modelId: string | null = null;
  modelView: ModelViewJson | null = null;
  sessionId: string | null = null;
  reducedModel: string | null = null;
  openDecisions: DecisionEntryJson[] = [];
  configuration: ConfigurationJson | null = null;
  lastConsequences: ConsequenceJson[] = [];
  decidedRefs: string[] = [];

  /** Display name for a variant or value id; falls back to the raw id. */
  nameOf(ref: string): string {
    const view = this.modelView;
    if (!view) return ref;
    for (const variant of view.variants) {
      if (variant.id === ref) return variant.name;
      for (const value of variant.values) {
        if (value.id === ref) return value.name;
      }
    }
    return ref;
  }

  /** Name of the variant owning a value id. */
  ownerNameOf(ref: string): string {
    const owner = ref.includes(".") ? ref.split(".")[0] : ref;
    return this.nameOf(owner);
  }

  /**
   * Whether a guard reference is currently satisfied, read straight off
   * the server-sent configuration (a lookup, not an inference).
   */
  guardSatisfied(ref: string): boolean {
    const config = this.configuration;
    if (!config) return false;
    const owner = ref.includes(".") ? ref.split(".")[0] : ref;
    const state = config.states[owner];
    if (!state) return false;
    const included = state.kind === "INCLUDED" || state.kind === "FORCED_INCLUDED";
    if (!included) return false;
    return ref.includes(".") ? state.selected.includes(ref) : true;
  }

  /**
   * Whether a guard reference can still hold: its owner is not ruled
   * out, and a forced alternative binding does not point elsewhere.
   * Again pure lookup over the latest server state.
   */
  guardSatisfiable(ref: string): boolean {
    const config = this.configuration;
    if (!config) return true;
    const isValue = ref.includes(".");
    const owner = isValue ? ref.split(".")[0] : ref;
    const state = config.states[owner];
    if (!state) return false;
    if (state.kind === "EXCLUDED" || state.kind === "FORCED_EXCLUDED") return false;
    if (isValue && state.kind === "FORCED_INCLUDED" && state.selected.length > 0) {
      const variant = this.modelView?.variants.find((v) => v.id === owner);
      if (variant?.relation === "alternative" && !state.selected.includes(ref)) return false;
    }
    return true;
  }

  applyServerView(body: {
    openDecisions?: DecisionEntryJson[];
    configuration?: ConfigurationJson;
    consequences?: ConsequenceJson[];
  }): void {
    if (body.openDecisions !== undefined) this.openDecisions = body.openDecisions;
    if (body.configuration !== undefined) this.configuration = body.configuration;
    this.lastConsequences = body.consequences ?? [];
  }
}

/** Human line for one consequence, resolving ids through the model view. */
export function renderConsequence(state: ViewState, consequence: ConsequenceJson): string {
  const subjectName = state.nameOf(consequence.subject);
  const causeName = state.nameOf(consequence.cause);
  switch (consequence.kind) {
    case "FORCES_VALUE":
      return `forces ${state.ownerNameOf(consequence.subject)} = ${subjectName} (because of ${causeName})`;
    case "FORCES_VARIANT":
      return `forces ${subjectName} to be included (because of ${causeName})`;
    case "EXCLUDES_VARIANT":
      return `excludes ${subjectName} (because of ${causeName})`;
    case "CONFLICT":
      return `conflict: ${subjectName} contradicts ${causeName}`;
  }
}

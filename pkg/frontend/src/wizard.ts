/**
 * The configurator wizard: upload a variant model, state requirements,
 * answer the open decisions one by one, then download the product.
 *
 * Rendering is plain DOM against the element passed in, so the same
 * code runs in a browser and under jsdom. Every decision, preview and
 * undo round-trips the service; screens re-render exclusively from the
 * response bodies.
 */

import { ApiFailure, ServiceClient } from "./api.js";
import { renderConsequence, ViewState } from "./state.js";
import type { ConsequenceJson, DecisionEntryJson, DiagnosticJson, FinalizeResponse } from "./types.js";

type Screen = "upload" | "requirements" | "decisions" | "done";

export class Wizard {
  readonly state = new ViewState();
  private screen: Screen = "upload";
  private errorText = "";
  private whatIfLines: string[] = [];
  private finalizeBody: FinalizeResponse | null = null;
  private readonly doc: Document;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ServiceClient,
  ) {
    this.doc = root.ownerDocument;
    this.render();
  }

  // ----- helpers ----------------------------------------------------------

  private el(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
    const node = this.doc.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
      node.setAttribute(key, value);
    }
    if (text !== undefined) node.textContent = text;
    return node;
  }

  private fail(error: unknown): void {
    if (error instanceof ApiFailure) {
      const body = error.body as { diagnostics?: DiagnosticJson[]; error?: string } | null;
      if (body && Array.isArray(body.diagnostics)) {
        this.errorText = body.diagnostics
          .map((d) => `${d.code} ${d.subject}: ${d.message}`)
          .join("\n");
        return;
      }
      if (body && typeof body.error === "string") {
        this.errorText = body.error;
        return;
      }
      this.errorText = `service error (${error.status})`;
      return;
    }
    this.errorText = String(error);
  }

  // ----- actions ----------------------------------------------------------

  async uploadModel(xml: string): Promise<void> {
    this.errorText = "";
    try {
      const uploaded = await this.client.uploadModel(xml);
      this.state.modelId = uploaded.modelId;
      const view = await this.client.getModelView(uploaded.modelId);
      this.state.modelView = view.model;
      this.screen = "requirements";
    } catch (error) {
      this.fail(error);
    }
    this.render();
  }

  async startSession(area: string, pins: string[], excludes: string[]): Promise<void> {
    if (!this.state.modelId) return;
    this.errorText = "";
    try {
      const opened = await this.client.openSession(this.state.modelId, area, pins, excludes);
      this.state.sessionId = opened.sessionId;
      this.state.reducedModel = opened.reducedModel;
      this.state.applyServerView(opened);
      this.state.decidedRefs = [];
      this.screen = "decisions";
    } catch (error) {
      this.fail(error);
    }
    this.render();
  }

  async decide(action: "include" | "exclude", ref: string): Promise<void> {
    if (!this.state.sessionId) return;
    this.errorText = "";
    try {
      const body = await this.client.decide(this.state.sessionId, action, ref);
      this.state.applyServerView(body);
      this.state.decidedRefs.push(ref);
    } catch (error) {
      if (error instanceof ApiFailure && error.status === 409) {
        const body = error.body as { consequences?: ConsequenceJson[] };
        this.state.lastConsequences = body.consequences ?? [];
      } else {
        this.fail(error);
      }
    }
    this.render();
  }

  async previewWhatIf(ref: string): Promise<void> {
    if (!this.state.sessionId) return;
    try {
      const body = await this.client.preview(this.state.sessionId, "include", ref);
      this.whatIfLines = body.consequences.map((c) => renderConsequence(this.state, c));
      if (this.whatIfLines.length === 0) this.whatIfLines = ["no forced consequences"];
    } catch (error) {
      this.fail(error);
    }
    this.render();
  }

  async undoLast(): Promise<void> {
    const sessionId = this.state.sessionId;
    const last = this.state.decidedRefs[this.state.decidedRefs.length - 1];
    if (!sessionId || last === undefined) return;
    this.errorText = "";
    try {
      const body = await this.client.retract(sessionId, last);
      this.state.decidedRefs.pop();
      this.state.applyServerView(body);
    } catch (error) {
      this.fail(error);
    }
    this.render();
  }

  async finalize(): Promise<void> {
    if (!this.state.sessionId) return;
    this.errorText = "";
    try {
      this.finalizeBody = await this.client.finalize(this.state.sessionId);
      this.screen = "done";
    } catch (error) {
      if (error instanceof ApiFailure && error.status === 409) {
        const body = error.body as { openDecisions?: DecisionEntryJson[] };
        this.state.openDecisions = body.openDecisions ?? [];
        this.errorText = "decisions still open; answer them before finalizing";
      } else {
        this.fail(error);
      }
    }
    this.render();
  }

  // ----- rendering --------------------------------------------------------

  render(): void {
    this.root.textContent = "";
    const shell = this.el("div", { class: "wizard" });
    shell.appendChild(this.el("h1", {}, "Family configurator"));
    if (this.errorText) {
      shell.appendChild(this.el("pre", { id: "error", class: "error" }, this.errorText));
    }
    switch (this.screen) {
      case "upload":
        shell.appendChild(this.renderUpload());
        break;
      case "requirements":
        shell.appendChild(this.renderRequirements());
        break;
      case "decisions":
        shell.appendChild(this.renderDecisions());
        break;
      case "done":
        shell.appendChild(this.renderDone());
        break;
    }
    this.root.appendChild(shell);
  }

  private renderUpload(): HTMLElement {
    const pane = this.el("section", { id: "upload-screen" });
    pane.appendChild(this.el("h2", {}, "1. Variant model"));
    pane.appendChild(this.el("p", {}, "Paste the variant-model XML of the system family."));
    pane.appendChild(this.el("textarea", { id: "model-xml", rows: "14" }));
    const button = this.el("button", { id: "upload-btn" }, "Load model");
    button.addEventListener("click", () => {
      const area = this.doc.getElementById("model-xml") as HTMLTextAreaElement;
      void this.uploadModel(area.value);
    });
    pane.appendChild(button);
    return pane;
  }

  private renderRequirements(): HTMLElement {
    const pane = this.el("section", { id: "requirements-screen" });
    const view = this.state.modelView;
    pane.appendChild(this.el("h2", {}, "2. Requirements"));
    const areaSelect = this.el("select", { id: "area-select" });
    for (const area of view?.areas ?? []) {
      areaSelect.appendChild(this.el("option", { value: area }, area));
    }
    const areaLabel = this.el("label", {}, "Application area: ");
    areaLabel.appendChild(areaSelect);
    pane.appendChild(areaLabel);

    const pinList = this.el("div", { id: "pin-list" });
    pinList.appendChild(this.el("h3", {}, "Required values (pins)"));
    for (const variant of view?.variants ?? []) {
      for (const value of variant.values) {
        const row = this.el("label", { class: "pick" });
        row.appendChild(
          this.el("input", { type: "checkbox", id: `pin-${value.id}`, value: value.id }),
        );
        row.appendChild(this.el("span", {}, ` ${variant.name}: ${value.name} (${value.id})`));
        pinList.appendChild(row);
      }
    }
    pane.appendChild(pinList);

    const excludeList = this.el("div", { id: "exclude-list" });
    excludeList.appendChild(this.el("h3", {}, "Not wanted (excludes)"));
    for (const variant of view?.variants ?? []) {
      const row = this.el("label", { class: "pick" });
      row.appendChild(
        this.el("input", { type: "checkbox", id: `exclude-${variant.id}`, value: variant.id }),
      );
      row.appendChild(this.el("span", {}, ` ${variant.name} (${variant.id})`));
      excludeList.appendChild(row);
    }
    pane.appendChild(excludeList);

    const button = this.el("button", { id: "start-btn" }, "Start customization");
    button.addEventListener("click", () => {
      const area = (this.doc.getElementById("area-select") as HTMLSelectElement).value;
      const pins: string[] = [];
      const excludes: string[] = [];
      for (const variant of view?.variants ?? []) {
        const box = this.doc.getElementById(`exclude-${variant.id}`) as HTMLInputElement | null;
        if (box?.checked) excludes.push(variant.id);
        for (const value of variant.values) {
          const pin = this.doc.getElementById(`pin-${value.id}`) as HTMLInputElement | null;
          if (pin?.checked) pins.push(value.id);
        }
      }
      void this.startSession(area, pins, excludes);
    });
    pane.appendChild(button);
    return pane;
  }

  private renderEntry(entry: DecisionEntryJson, depth: number, into: HTMLElement): void {
    const satisfiable = entry.guard.every((ref) => this.state.guardSatisfiable(ref));
    const satisfied = entry.guard.every((ref) => this.state.guardSatisfied(ref));
    const box = this.el("div", {
      class: `entry${satisfied ? "" : " waiting"}`,
      "data-variant": entry.variant,
      "data-depth": String(depth),
      style: `margin-left: ${depth * 24}px`,
    });
    const title = entry.description || this.state.nameOf(entry.variant);
    box.appendChild(this.el("h4", {}, title));
    if (entry.guard.length > 0) {
      const names = entry.guard.map((ref) => this.state.nameOf(ref)).join(", ");
      box.appendChild(this.el("p", { class: "guard" }, `only when: ${names}`));
    }
    const choices = this.el("div", { class: "choices" });
    for (const choice of entry.choices) {
      const button = this.el(
        "button",
        { class: "choice", "data-ref": choice.value },
        choice.name,
      ) as HTMLButtonElement;
      if (!satisfiable) button.disabled = true;
      button.addEventListener("click", () => void this.decide("include", choice.value));
      choices.appendChild(button);
    }
    const skip = this.el(
      "button",
      { class: "skip", "data-ref": entry.variant },
      "Not needed",
    ) as HTMLButtonElement;
    skip.addEventListener("click", () => void this.decide("exclude", entry.variant));
    choices.appendChild(skip);
    box.appendChild(choices);
    into.appendChild(box);
    for (const child of entry.children) {
      this.renderEntry(child, depth + 1, into);
    }
  }

  private renderDecisions(): HTMLElement {
    const pane = this.el("section", { id: "decisions-screen" });
    pane.appendChild(this.el("h2", {}, "3. Open decisions"));

    if (this.state.lastConsequences.length > 0) {
      const toast = this.el("div", { id: "toast", class: "toast" });
      for (const consequence of this.state.lastConsequences) {
        toast.appendChild(
          this.el(
            "p",
            { class: `consequence ${consequence.kind.toLowerCase()}` },
            renderConsequence(this.state, consequence),
          ),
        );
      }
      pane.appendChild(toast);
    }

    const list = this.el("div", { id: "decision-list" });
    if (this.state.openDecisions.length === 0) {
      list.appendChild(this.el("p", { id: "all-done" }, "All decisions made."));
    }
    for (const entry of this.state.openDecisions) {
      this.renderEntry(entry, 0, list);
    }
    pane.appendChild(list);

    const whatIf = this.el("div", { id: "whatif-panel" });
    whatIf.appendChild(this.el("h3", {}, "What if?"));
    const select = this.el("select", { id: "whatif-ref" });
    for (const variant of this.state.modelView?.variants ?? []) {
      for (const value of variant.values) {
        select.appendChild(
          this.el("option", { value: value.id }, `${variant.name}: ${value.name}`),
        );
      }
    }
    whatIf.appendChild(select);
    const tryButton = this.el("button", { id: "whatif-btn" }, "Preview");
    tryButton.addEventListener("click", () => {
      const ref = (this.doc.getElementById("whatif-ref") as HTMLSelectElement).value;
      void this.previewWhatIf(ref);
    });
    whatIf.appendChild(tryButton);
    const result = this.el("div", { id: "whatif-result" });
    for (const line of this.whatIfLines) {
      result.appendChild(this.el("p", { class: "preview-line" }, line));
    }
    whatIf.appendChild(result);
    pane.appendChild(whatIf);

    const controls = this.el("div", { class: "controls" });
    const undo = this.el("button", { id: "undo-btn" }, "Undo last answer") as HTMLButtonElement;
    undo.disabled = this.state.decidedRefs.length === 0;
    undo.addEventListener("click", () => void this.undoLast());
    controls.appendChild(undo);
    const finalize = this.el("button", { id: "finalize-btn" }, "Finalize product");
    finalize.addEventListener("click", () => void this.finalize());
    controls.appendChild(finalize);
    pane.appendChild(controls);
    return pane;
  }

  private renderDone(): HTMLElement {
    const pane = this.el("section", { id: "done-screen" });
    pane.appendChild(this.el("h2", {}, "4. Product ready"));
    const body = this.finalizeBody;
    if (!body) return pane;
    const downloads = this.el("div", { id: "downloads" });
    downloads.appendChild(
      this.link("download-config", "configuration.xml", body.configurationXml),
    );
    if (body.customizedModelXml !== null) {
      downloads.appendChild(
        this.link("download-model", "model.xml", body.customizedModelXml),
      );
    }
    body.customizedDocuments.forEach((docItem, index) => {
      downloads.appendChild(
        this.link(`download-doc-${index}`, `${docItem.name}.xml`, docItem.xml),
      );
    });
    pane.appendChild(downloads);
    return pane;
  }

  private link(id: string, filename: string, content: string): HTMLElement {
    const href = `data:application/xml;charset=utf-8,${encodeURIComponent(content)}`;
    const anchor = this.el("a", { id, href, download: filename }, `Download ${filename}`);
    return anchor;
  }
}

export function createWizard(root: HTMLElement, client: ServiceClient): Wizard {
  return new Wizard(root, client);
}

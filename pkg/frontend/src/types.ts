/** JSON shapes served by the famvar configuration service. */

export interface DiagnosticJson {
  code: string;
  subject: string;
  message: string;
}

export type ConsequenceKind =
  | "FORCES_VALUE"
  | "FORCES_VARIANT"
  | "EXCLUDES_VARIANT"
  | "CONFLICT";

export interface ConsequenceJson {
  kind: ConsequenceKind;
  subject: string;
  cause: string;
}

export interface ChoiceJson {
  value: string;
  name: string;
}

export interface DecisionEntryJson {
  variant: string;
  description: string;
  guard: string[];
  choices: ChoiceJson[];
  trace: string;
  children: DecisionEntryJson[];
}

export interface VariantStateJson {
  kind: "UNDECIDED" | "EXCLUDED" | "INCLUDED" | "FORCED_INCLUDED" | "FORCED_EXCLUDED";
  selected: string[];
  cause: string | null;
}

export interface ConfigurationJson {
  area: string;
  states: Record<string, VariantStateJson>;
}

export interface ValueViewJson {
  id: string;
  name: string;
  dependsOn: string[];
}

export interface VariantViewJson {
  id: string;
  name: string;
  question: string;
  relation: "alternative" | "or";
  mandatory: boolean;
  applicableAreas: string[];
  dependsOn: string[];
  values: ValueViewJson[];
}

export interface ModelViewJson {
  name: string;
  areas: string[];
  variants: VariantViewJson[];
}

export interface ModelUploaded {
  modelId: string;
  diagnostics: DiagnosticJson[];
}

export interface SessionOpened {
  sessionId: string;
  reducedModel: string;
  openDecisions: DecisionEntryJson[];
  configuration: ConfigurationJson;
}

export interface DecisionResponse {
  consequences: ConsequenceJson[];
  openDecisions: DecisionEntryJson[];
  configuration: ConfigurationJson;
}

export interface RetractResponse {
  openDecisions: DecisionEntryJson[];
  configuration: ConfigurationJson;
}

export interface CustomizedDocumentJson {
  name: string;
  xml: string;
}

export interface FinalizeResponse {
  configurationXml: string;
  customizedModelXml: string | null;
  customizedDocuments: CustomizedDocumentJson[];
}

export type DecisionAction = "include" | "exclude";

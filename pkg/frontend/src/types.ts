/**
 * Response shapes of the session service, mirrored field for field.
 * The client never derives probabilities from these; it only displays them.
 */

export interface VariableInfo {
  name: string;
  states: string[];
}

export interface MarginalEntry {
  states: string[];
  probabilities: number[];
}

export interface FindingDoc {
  id: string;
  variable: string;
  likelihood: number[];
}

export interface PartitionConflict {
  part: string[];
  rest: string[];
  conf: number;
}

export interface ConflictDoc {
  conf: number;
  p_e: number;
  finding_probabilities: Record<string, number>;
  partition_conflicts: PartitionConflict[];
}

export interface HypothesisDoc {
  assignments: Record<string, string>;
  p_h: number | null;
  p_h_given_e: number | null;
}

export interface SessionView {
  session_id: string;
  revision: number;
  model: string;
  variables: VariableInfo[];
  p_e: number;
  marginals: Record<string, MarginalEntry>;
  findings: FindingDoc[];
  conflict: ConflictDoc | null;
  hypothesis: HypothesisDoc | null;
  thresholds: number[];
  repropagated?: boolean;
}

export interface SubsetRow {
  findings: string[];
  p: number;
  p_h_given: number;
  sufficiency_ratio: number;
  sufficient: boolean;
  minimal_sufficient: boolean;
  decisive: boolean;
  important: boolean | null;
  complement_ratio: number | null;
}

export interface SensitivityDoc {
  revision: number;
  hypothesis: Record<string, string>;
  p_h: number;
  p_h_given_e: number;
  thresholds: { theta1: number; theta2: number; theta3: number };
  subsets: SubsetRow[];
  crucial_findings: string[];
}

export interface WhatIfDoc {
  revision: number;
  finding_id: string;
  replacement: { variable: string; likelihood: number[] };
  p_e: number;
  p_swapped: number;
  p_h_given_swapped: number | null;
  messages_sent_delta: number;
  propagation_free: boolean;
}

export interface CliqueDoc {
  index: number;
  variables: string[];
  family_of: string[];
}

export interface SeparatorDoc {
  index: number;
  variables: string[];
  between: [number, number];
}

export interface TreeDoc {
  revision?: number;
  root: number;
  cliques: CliqueDoc[];
  separators: SeparatorDoc[];
}

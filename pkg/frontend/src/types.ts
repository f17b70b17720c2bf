// Wire types for the service API. The dashboard treats every numeric field
// as an opaque value to display, never an operand.

export interface ExperimentSummary {
  id: string;
  created_at: string | null;
  n_entries: number;
  n_failures: number;
  fingerprint: string;
}

export interface PlaneEntry {
  strategy_id: string;
  family: string;
  phi_abs: number;
  pi: number | null;
  score: number | null;
  feasible: boolean;
}

export interface ComparisonResponse {
  experiment_id: string;
  selector: {
    phi: string;
    pi: string;
    beta: number;
    Phi: number;
    mode: string;
  };
  entries: PlaneEntry[];
  ranking: string[];
  feasible: string[];
  winner: string | null;
  suggestion: string | null;
}

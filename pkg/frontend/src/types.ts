// Protocol types, mirroring docs/protocol.md verbatim. The UI renders
// these as-is and never derives colors or suggestions locally.

export type Color = 'green' | 'orange' | 'red' | 'white';

export type Classification =
  | 'advance'
  | 'reexec-stay'
  | 'backtrack'
  | 'deviation'
  | 'white';

export interface ViewCell {
  label: string;
  kind: 'code' | 'text';
  source: string;
  color: Color;
  emoji: string;
  is_last_executed: boolean;
}

export interface View {
  session_id: string;
  version: number;
  complete: boolean;
  cells: ViewCell[];
  next_cells: string[];
}

export interface Outcome {
  classification: Classification;
  state: string;
  complete: boolean;
}

export interface ValidationIssue {
  severity: 'error' | 'warning';
  message: string;
  ref: string | null;
}

export interface ErrorBody {
  code: string;
  message: string;
  span?: [number, number];
  issues?: ValidationIssue[];
}

export type Action =
  | { action: 'execute'; cell: string }
  | { action: 'back' }
  | { action: 'reset' }
  | { action: 'insert'; position: number; kind: 'code' | 'text' }
  | { action: 'delete'; position: number };

export interface ActionResult {
  view: View;
  outcome: Outcome | null;
}

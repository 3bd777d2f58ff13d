/** Mirrors of the /api/v1 payloads. The UI never computes scores: every
 * number shown on screen originates from one of these structures and carries
 * the audit sequence it was rendered from. */

export type Band = "low" | "moderate" | "elevated" | "high";
export type Recommendation = "pass" | "conditional_pass" | "fail";
export type Outcome = Recommendation;

export interface Session {
  actor: string;
  roles: string[];
  token: string;
}

export interface SystemRow {
  system_id: string;
  name: string;
  risk_tier: string;
  phase: number;
  pending_gate: number | null;
  origin: string;
  business_unit: string | null;
  trust_index: number | null;
  band: Band | null;
}

export interface SystemList {
  systems: SystemRow[];
  as_of_sequence: number;
}

export interface PillarCheck {
  pillar: string;
  required: number;
  actual: number;
  deficit: number;
  excepted: boolean;
}

export interface TrustIndex {
  static_ti: number;
  weighted_ti: number;
  band: Band;
  injected: boolean;
}

export interface GateEvaluation {
  system_id: string;
  gate: number;
  per_pillar: PillarCheck[];
  trust_index: TrustIndex;
  trust_index_threshold: number | null;
  controls_satisfied: number;
  controls_required: number;
  recommended: Recommendation;
  band_constraint: Band;
  requires_executive_approval: boolean;
  excepted_controls: string[];
  fail_reasons: string[];
  as_of_sequence: number | null;
}

export interface ApprovalInput {
  role: string;
  actor?: string;
}

export interface DecisionRequest {
  outcome: Outcome;
  approvals?: ApprovalInput[];
  remediation_plan_ref?: string;
  re_review_due?: string;
  rationale?: string;
}

export interface GateDecision {
  decision_id: string;
  system_id: string;
  gate: number;
  outcome: Outcome;
  decided_at: string;
  re_review_due: string | null;
  rationale: string;
}

export interface ExceptionRequest {
  kind: "risk_acceptance" | "temporary" | "permanent";
  gap_description: string;
  residual_risk: "low" | "medium" | "high";
  approver_role: string;
  compensating_controls?: string[];
  granted?: string;
  expiry?: string;
  remediation_plan_ref?: string;
  pillar?: string;
  control_id?: string;
  annual_reassessment_due?: string;
}

export interface ExceptionRecord {
  exception_id: string;
  system_id: string;
  kind: string;
  gap_description: string;
  residual_risk: string;
  approver_role: string;
  granted: string;
  expiry: string | null;
  active: boolean;
  overdue: boolean;
  pillar: string | null;
  control_id: string | null;
}

export interface EnterpriseBody {
  systems_total: number;
  systems_assessed: number;
  no_systems: boolean;
  portfolio_trust_index: number | null;
  band_distribution: Partial<Record<Band, number>>;
  open_risks: Record<string, number>;
  compliance: {
    systems_with_threshold: number;
    meeting_threshold: number;
    below_threshold: number;
  };
  industry_benchmark: number | null;
  systems: Array<{
    system_id: string;
    name: string;
    risk_tier: string;
    phase: number;
    pending_gate: number | null;
    trust_index: number | null;
    band: Band | null;
    retired: boolean;
  }>;
}

export interface ScorecardReport<Body> {
  level: string;
  scope: string;
  as_of_sequence: number;
  cadence: string;
  body: Body;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

/** Thin fetch client for /api/v1. Request bodies are serialized with a fixed
 * key order so a given form submission is byte-stable. */

import type {
  ApiErrorBody,
  DecisionRequest,
  EnterpriseBody,
  ExceptionRecord,
  ExceptionRequest,
  GateDecision,
  GateEvaluation,
  ScorecardReport,
  SystemList,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.body = body;
  }
}

/** Serialize with keys in a fixed order, dropping undefined values. */
export function stableBody(payload: Record<string, unknown>, order: string[]): string {
  const ordered: Record<string, unknown> = {};
  for (const key of order) {
    if (payload[key] !== undefined) ordered[key] = payload[key];
  }
  return JSON.stringify(ordered);
}

const DECISION_KEY_ORDER = [
  "outcome",
  "approvals",
  "remediation_plan_ref",
  "re_review_due",
  "rationale",
];

const EXCEPTION_KEY_ORDER = [
  "kind",
  "gap_description",
  "residual_risk",
  "approver_role",
  "compensating_controls",
  "granted",
  "expiry",
  "remediation_plan_ref",
  "pillar",
  "control_id",
  "annual_reassessment_due",
];

export function encodeDecisionRequest(request: DecisionRequest): string {
  return stableBody(request as unknown as Record<string, unknown>, DECISION_KEY_ORDER);
}

export function encodeExceptionRequest(request: ExceptionRequest): string {
  return stableBody(request as unknown as Record<string, unknown>, EXCEPTION_KEY_ORDER);
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly token: string;
  private readonly fetchImpl: FetchLike;

  constructor(base: string, token: string, fetchImpl: FetchLike = fetch) {
    this.base = base.replace(/\/$/, "");
    this.token = token;
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(method: string, path: string, body?: string): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body,
    });
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = { code: "HttpError", message: `HTTP ${response.status}`, details: {} };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  listSystems(): Promise<SystemList> {
    return this.request("GET", "/api/v1/systems");
  }

  portfolioScorecard(): Promise<ScorecardReport<EnterpriseBody>> {
    return this.request("GET", "/api/v1/portfolio/scorecard");
  }

  projectScorecard(systemId: string): Promise<ScorecardReport<Record<string, unknown>>> {
    return this.request("GET", `/api/v1/systems/${encodeURIComponent(systemId)}/scorecard`);
  }

  gateEvaluation(systemId: string, gate: number): Promise<GateEvaluation> {
    return this.request(
      "GET",
      `/api/v1/systems/${encodeURIComponent(systemId)}/gates/${gate}/evaluation`,
    );
  }

  submitDecision(
    systemId: string,
    gate: number,
    request: DecisionRequest,
  ): Promise<GateDecision> {
    return this.request(
      "POST",
      `/api/v1/systems/${encodeURIComponent(systemId)}/gates/${gate}/decision`,
      encodeDecisionRequest(request),
    );
  }

  listExceptions(systemId: string): Promise<{ exceptions: ExceptionRecord[] }> {
    return this.request("GET", `/api/v1/systems/${encodeURIComponent(systemId)}/exceptions`);
  }

  grantException(systemId: string, request: ExceptionRequest): Promise<ExceptionRecord> {
    return this.request(
      "POST",
      `/api/v1/systems/${encodeURIComponent(systemId)}/exceptions`,
      encodeExceptionRequest(request),
    );
  }
}

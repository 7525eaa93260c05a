// Typed client for the review server JSON API. Same-origin only; the
// server validates decisions and allow-lists every image path, so the
// client never constructs file paths itself.

export interface MemberDetail {
  s_t?: string;
  s_t1?: string;
  action?: string;
  goal?: string;
}

export interface DecisionRecord {
  cluster_id: string;
  decision: "duplicates" | "distinct";
  representative: string | null;
  annotator: string | null;
  timestamp: string | null;
}

export interface ClusterRecord {
  cluster_id: string;
  app: string;
  signature: string;
  members: string[];
  // [member_a, member_b, before_similarity, after_similarity]
  evidence: [string, string, number, number][];
  member_details: Record<string, MemberDetail>;
  decision: DecisionRecord | null;
  status: "pending" | "decided";
}

export interface ClusterCounts {
  all: number;
  pending: number;
  decided: number;
}

export interface ClusterPage {
  clusters: ClusterRecord[];
  total: number;
  offset: number;
  limit: number;
  counts: ClusterCounts;
}

export type StatusFilter = "all" | "pending" | "decided";

export interface DecisionRequest {
  decision: "duplicates" | "distinct";
  representative?: string | null;
  annotator?: string | null;
}

export interface DecisionAck {
  cluster_id: string;
  decision: DecisionRecord;
  written: boolean;
}

export type ApiResult<T> = { ok: true; data: T } | { ok: false; error: string };

async function errorText(res: Response): Promise<string> {
  try {
    const body = (await res.json()) as { detail?: unknown };
    if (typeof body.detail === "string" && body.detail.length > 0) {
      return body.detail;
    }
  } catch {
    // non-JSON error body; fall back to the status line
  }
  return `HTTP ${res.status}`;
}

export async function fetchClusters(
  filter: StatusFilter,
  offset: number,
  limit: number,
): Promise<ApiResult<ClusterPage>> {
  const query = new URLSearchParams({
    status: filter,
    offset: String(offset),
    limit: String(limit),
  });
  let res: Response;
  try {
    res = await fetch(`/api/clusters?${query.toString()}`);
  } catch {
    return { ok: false, error: "review server unreachable" };
  }
  if (!res.ok) {
    return { ok: false, error: await errorText(res) };
  }
  return { ok: true, data: (await res.json()) as ClusterPage };
}

export async function postDecision(
  clusterId: string,
  body: DecisionRequest,
): Promise<ApiResult<DecisionAck>> {
  let res: Response;
  try {
    res = await fetch(`/api/clusters/${encodeURIComponent(clusterId)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  } catch {
    return { ok: false, error: "review server unreachable" };
  }
  if (!res.ok) {
    return { ok: false, error: await errorText(res) };
  }
  return { ok: true, data: (await res.json()) as DecisionAck };
}

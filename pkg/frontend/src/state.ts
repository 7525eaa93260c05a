// Session state for the review loop, kept free of DOM and network so the
// transition logic is directly testable. The server owns ordering and
// filtering; this module only tracks which page is loaded and where the
// cursors sit within it.

import type { ClusterPage, ClusterRecord, StatusFilter } from "./api.js";

export interface SessionState {
  filter: StatusFilter;
  offset: number;
  limit: number;
  total: number;
  counts: { all: number; pending: number; decided: number };
  clusters: ClusterRecord[];
  cursor: number;
  memberCursor: number;
  notice: string | null;
  lightbox: string | null;
}

export function initialState(limit = 20): SessionState {
  return {
    filter: "pending",
    offset: 0,
    limit,
    total: 0,
    counts: { all: 0, pending: 0, decided: 0 },
    clusters: [],
    cursor: 0,
    memberCursor: 0,
    notice: null,
    lightbox: null,
  };
}

export function currentCluster(state: SessionState): ClusterRecord | null {
  return state.clusters[state.cursor] ?? null;
}

export function selectedMember(state: SessionState): string | null {
  const cluster = currentCluster(state);
  if (cluster === null) {
    return null;
  }
  return cluster.members[state.memberCursor] ?? cluster.members[0] ?? null;
}

/** Fold a fetched page into the session, keeping the cursor sane. */
export function pageLoaded(state: SessionState, page: ClusterPage): SessionState {
  const previousId = currentCluster(state)?.cluster_id;
  const cursor = clamp(state.cursor, page.clusters.length);
  const landed = page.clusters[cursor];
  const sameCluster = landed !== undefined && landed.cluster_id === previousId;
  return {
    ...state,
    offset: page.offset,
    limit: page.limit,
    total: page.total,
    counts: page.counts,
    clusters: page.clusters,
    cursor,
    memberCursor: sameCluster ? clamp(state.memberCursor, landed.members.length) : 0,
  };
}

export function moveCursor(state: SessionState, delta: number): SessionState {
  const cursor = clamp(state.cursor + delta, state.clusters.length);
  if (cursor === state.cursor) {
    return state;
  }
  return { ...state, cursor, memberCursor: 0 };
}

export function moveMember(state: SessionState, delta: number): SessionState {
  const cluster = currentCluster(state);
  if (cluster === null) {
    return state;
  }
  const memberCursor = clamp(state.memberCursor + delta, cluster.members.length);
  return memberCursor === state.memberCursor ? state : { ...state, memberCursor };
}

/** Offset of the adjacent page, or null when already at that edge. */
export function nextOffset(state: SessionState, direction: 1 | -1): number | null {
  if (direction === -1) {
    return state.offset > 0 ? Math.max(0, state.offset - state.limit) : null;
  }
  const next = state.offset + state.limit;
  return next < state.total ? next : null;
}

/**
 * Corrected offset after a reload landed on an empty page, which happens
 * when the last pending cluster of a page gets decided. Null means the
 * page is fine as is.
 */
export function retryOffset(page: ClusterPage): number | null {
  if (page.clusters.length > 0 || page.total === 0 || page.offset === 0) {
    return null;
  }
  return Math.max(0, page.offset - page.limit);
}

export function toggledFilter(state: SessionState): StatusFilter {
  return state.filter === "pending" ? "all" : "pending";
}

export function statusSummary(state: SessionState): string {
  if (state.counts.all === 0) {
    return "nothing to review";
  }
  if (state.total === 0) {
    return `nothing ${state.filter} (${state.counts.decided} decided, ${state.counts.pending} pending)`;
  }
  const first = state.offset + 1;
  const last = state.offset + state.clusters.length;
  return (
    `clusters ${first}-${last} of ${state.total}` +
    ` | ${state.counts.pending} pending, ${state.counts.decided} decided`
  );
}

export function evidenceSummary(cluster: ClusterRecord): string {
  if (cluster.evidence.length === 0) {
    return "no recorded pairs";
  }
  let weakest = Infinity;
  for (const [, , simT, simT1] of cluster.evidence) {
    weakest = Math.min(weakest, simT, simT1);
  }
  const pairs = cluster.evidence.length === 1 ? "1 linked pair" : `${cluster.evidence.length} linked pairs`;
  return `${pairs}, weakest similarity ${weakest.toFixed(4)}`;
}

export function decisionSummary(cluster: ClusterRecord): string {
  if (cluster.decision === null) {
    return "pending";
  }
  if (cluster.decision.decision === "duplicates") {
    return `duplicates, keep ${cluster.decision.representative ?? "?"}`;
  }
  return "distinct";
}

function clamp(index: number, length: number): number {
  if (length <= 0) {
    return 0;
  }
  return Math.min(Math.max(index, 0), length - 1);
}

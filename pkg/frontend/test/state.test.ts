import { describe, expect, it } from "vitest";

import type { ClusterPage, ClusterRecord } from "../src/api.js";
import {
  currentCluster,
  decisionSummary,
  evidenceSummary,
  initialState,
  moveCursor,
  moveMember,
  nextOffset,
  pageLoaded,
  retryOffset,
  selectedMember,
  statusSummary,
  toggledFilter,
} from "../src/state.js";

function cluster(id: string, members: string[], overrides: Partial<ClusterRecord> = {}): ClusterRecord {
  return {
    cluster_id: id,
    app: "mail",
    signature: "click:10x15",
    members,
    evidence: [],
    member_details: {},
    decision: null,
    status: "pending",
    ...overrides,
  };
}

function page(clusters: ClusterRecord[], overrides: Partial<ClusterPage> = {}): ClusterPage {
  return {
    clusters,
    total: clusters.length,
    offset: 0,
    limit: 20,
    counts: { all: clusters.length, pending: clusters.length, decided: 0 },
    ...overrides,
  };
}

describe("initial state", () => {
  it("starts on the pending filter with nothing loaded", () => {
    const state = initialState();
    expect(state.filter).toBe("pending");
    expect(state.offset).toBe(0);
    expect(currentCluster(state)).toBeNull();
    expect(selectedMember(state)).toBeNull();
  });
});

describe("pageLoaded", () => {
  it("adopts the page and keeps the cursor on the same cluster", () => {
    let state = pageLoaded(initialState(), page([cluster("c1", ["a", "b"]), cluster("c2", ["c"])]));
    state = moveCursor(state, 1);
    state = pageLoaded(state, page([cluster("c1", ["a", "b"]), cluster("c2", ["c", "d"])]));
    expect(currentCluster(state)?.cluster_id).toBe("c2");
  });

  it("clamps the cursor when the page shrinks and resets the member pick", () => {
    let state = pageLoaded(
      initialState(),
      page([cluster("c1", ["a"]), cluster("c2", ["b"]), cluster("c3", ["c"])]),
    );
    state = moveCursor(state, 2);
    state = pageLoaded(state, page([cluster("c1", ["a"])]));
    expect(state.cursor).toBe(0);
    expect(state.memberCursor).toBe(0);
    expect(currentCluster(state)?.cluster_id).toBe("c1");
  });

  it("clamps the member cursor when the same cluster lost members", () => {
    let state = pageLoaded(initialState(), page([cluster("c1", ["a", "b", "c"])]));
    state = moveMember(state, 2);
    expect(state.memberCursor).toBe(2);
    state = pageLoaded(state, page([cluster("c1", ["a", "b"])]));
    expect(state.memberCursor).toBe(1);
  });
});

describe("paging", () => {
  it("pages of size 2 over 3 clusters come out as 2 then 1", () => {
    const first = page([cluster("c1", ["a"]), cluster("c2", ["b"])], {
      total: 3,
      offset: 0,
      limit: 2,
    });
    let state = pageLoaded(initialState(2), first);
    expect(state.clusters).toHaveLength(2);
    expect(nextOffset(state, 1)).toBe(2);
    expect(nextOffset(state, -1)).toBeNull();

    const second = page([cluster("c3", ["c"])], { total: 3, offset: 2, limit: 2 });
    state = pageLoaded(state, second);
    expect(state.clusters).toHaveLength(1);
    expect(nextOffset(state, 1)).toBeNull();
    expect(nextOffset(state, -1)).toBe(0);
  });

  it("steps back one page when a reload lands past the end", () => {
    const empty = page([], { total: 3, offset: 4, limit: 2 });
    expect(retryOffset(empty)).toBe(2);
  });

  it("leaves valid pages alone", () => {
    expect(retryOffset(page([cluster("c1", ["a"])]))).toBeNull();
    expect(retryOffset(page([], { total: 0, offset: 0, limit: 2 }))).toBeNull();
    expect(retryOffset(page([], { total: 2, offset: 0, limit: 2 }))).toBeNull();
  });
});

describe("cursor movement", () => {
  it("clamps at both ends of the cluster list", () => {
    let state = pageLoaded(initialState(), page([cluster("c1", ["a"]), cluster("c2", ["b"])]));
    state = moveCursor(state, -1);
    expect(state.cursor).toBe(0);
    state = moveCursor(state, 5);
    expect(state.cursor).toBe(1);
  });

  it("resets the member pick when the cluster changes", () => {
    let state = pageLoaded(initialState(), page([cluster("c1", ["a", "b"]), cluster("c2", ["c"])]));
    state = moveMember(state, 1);
    expect(state.memberCursor).toBe(1);
    state = moveCursor(state, 1);
    expect(state.memberCursor).toBe(0);
  });

  it("walks members within one cluster and clamps", () => {
    let state = pageLoaded(initialState(), page([cluster("c1", ["a", "b", "c"])]));
    state = moveMember(state, 1);
    state = moveMember(state, 1);
    expect(selectedMember(state)).toBe("c");
    state = moveMember(state, 1);
    expect(selectedMember(state)).toBe("c");
    state = moveMember(state, -5);
    expect(selectedMember(state)).toBe("a");
  });

  it("is a no-op without clusters", () => {
    const state = initialState();
    expect(moveCursor(state, 1)).toBe(state);
    expect(moveMember(state, 1)).toBe(state);
  });
});

describe("filter toggle", () => {
  it("flips between pending and all", () => {
    const state = initialState();
    expect(toggledFilter(state)).toBe("all");
    expect(toggledFilter({ ...state, filter: "all" })).toBe("pending");
  });
});

describe("summaries", () => {
  it("says nothing to review for an empty corpus", () => {
    const state = pageLoaded(initialState(), page([]));
    expect(statusSummary(state)).toBe("nothing to review");
  });

  it("reports an exhausted pending filter with the decided count", () => {
    const state = pageLoaded(
      initialState(),
      page([], { total: 0, counts: { all: 4, pending: 0, decided: 4 } }),
    );
    expect(statusSummary(state)).toBe("nothing pending (4 decided, 0 pending)");
  });

  it("shows the loaded range and counts", () => {
    const state = pageLoaded(
      initialState(2),
      page([cluster("c1", ["a"]), cluster("c2", ["b"])], {
        total: 3,
        offset: 0,
        limit: 2,
        counts: { all: 5, pending: 3, decided: 2 },
      }),
    );
    expect(statusSummary(state)).toBe("clusters 1-2 of 3 | 3 pending, 2 decided");
  });

  it("summarizes pairwise evidence by count and weakest link", () => {
    expect(evidenceSummary(cluster("c1", ["a", "b"]))).toBe("no recorded pairs");
    const one = cluster("c1", ["a", "b"], { evidence: [["a", "b", 0.9991, 0.9987]] });
    expect(evidenceSummary(one)).toBe("1 linked pair, weakest similarity 0.9987");
    const two = cluster("c1", ["a", "b", "c"], {
      evidence: [
        ["a", "b", 0.9991, 0.9987],
        ["a", "c", 0.9978, 0.9995],
      ],
    });
    expect(evidenceSummary(two)).toBe("2 linked pairs, weakest similarity 0.9978");
  });

  it("summarizes the decision state", () => {
    expect(decisionSummary(cluster("c1", ["a"]))).toBe("pending");
    const dup = cluster("c1", ["a", "b"], {
      status: "decided",
      decision: {
        cluster_id: "c1",
        decision: "duplicates",
        representative: "a",
        annotator: "web",
        timestamp: "2026-08-23T10:00:00+00:00",
      },
    });
    expect(decisionSummary(dup)).toBe("duplicates, keep a");
    const dis = cluster("c2", ["a"], {
      status: "decided",
      decision: {
        cluster_id: "c2",
        decision: "distinct",
        representative: null,
        annotator: null,
        timestamp: null,
      },
    });
    expect(decisionSummary(dis)).toBe("distinct");
  });
});

import { fetchClusters, postDecision } from "./api.js";
import type { DecisionRequest } from "./api.js";
import { commandFor } from "./keys.js";
import type { Command } from "./keys.js";
import {
  currentCluster,
  initialState,
  moveCursor,
  moveMember,
  nextOffset,
  pageLoaded,
  retryOffset,
  selectedMember,
  toggledFilter,
} from "./state.js";
import type { SessionState } from "./state.js";
import { render } from "./render.js";
import type { Handlers } from "./render.js";

const PAGE_SIZE = 20;
const ANNOTATOR_KEY = "review-annotator";

let state: SessionState = initialState(PAGE_SIZE);
let root: HTMLElement;
let annotatorInput: HTMLInputElement | null = null;

function paint(): void {
  render(root, state, handlers);
}

function annotator(): string | null {
  const name = annotatorInput?.value.trim() ?? "";
  return name.length > 0 ? name : "web";
}

async function load(offset: number = state.offset): Promise<void> {
  const result = await fetchClusters(state.filter, offset, state.limit);
  if (!result.ok) {
    state = { ...state, notice: result.error };
    paint();
    return;
  }
  let page = result.data;
  // Deciding the last pending cluster of a trailing page can leave the
  // current offset past the end; step back once instead of showing a
  // blank screen.
  const corrected = retryOffset(page);
  if (corrected !== null) {
    const retry = await fetchClusters(state.filter, corrected, state.limit);
    if (retry.ok) {
      page = retry.data;
    }
  }
  state = pageLoaded({ ...state, notice: null }, page);
  paint();
}

async function decide(kind: "duplicates" | "distinct", representative?: string): Promise<void> {
  const cluster = currentCluster(state);
  if (cluster === null) {
    return;
  }
  const body: DecisionRequest = {
    decision: kind,
    representative: kind === "duplicates" ? (representative ?? selectedMember(state)) : null,
    annotator: annotator(),
  };
  const result = await postDecision(cluster.cluster_id, body);
  if (!result.ok) {
    state = { ...state, notice: result.error };
    paint();
    return;
  }
  const note = result.data.written
    ? `${cluster.cluster_id}: ${kind}`
    : `${cluster.cluster_id}: already recorded`;
  await load();
  state = { ...state, notice: note };
  if (state.filter !== "pending") {
    // Under the pending filter the decided row vanishes on reload and the
    // cursor already rests on the next pending cluster; elsewhere the row
    // stays, so step past it.
    state = moveCursor(state, 1);
  }
  paint();
}

function openSelectedImage(): void {
  const cluster = currentCluster(state);
  const member = selectedMember(state);
  if (cluster === null || member === null) {
    return;
  }
  const detail = cluster.member_details[member];
  const url = detail?.s_t1 ?? detail?.s_t;
  if (url) {
    state = { ...state, lightbox: url };
    paint();
  }
}

function handleCommand(command: Command): void {
  switch (command) {
    case "prev-cluster":
      state = moveCursor(state, -1);
      paint();
      break;
    case "next-cluster":
      state = moveCursor(state, 1);
      paint();
      break;
    case "prev-member":
      state = moveMember(state, -1);
      paint();
      break;
    case "next-member":
      state = moveMember(state, 1);
      paint();
      break;
    case "confirm-duplicates":
      void decide("duplicates");
      break;
    case "mark-distinct":
      void decide("distinct");
      break;
    case "toggle-pending":
      state = { ...state, filter: toggledFilter(state), cursor: 0, memberCursor: 0 };
      void load(0);
      break;
    case "open-image":
      openSelectedImage();
      break;
    case "close-overlay":
      if (state.lightbox !== null) {
        state = { ...state, lightbox: null };
        paint();
      }
      break;
    case "page-back":
    case "page-forward": {
      const offset = nextOffset(state, command === "page-back" ? -1 : 1);
      if (offset !== null) {
        void load(offset);
      }
      break;
    }
    case "refresh":
      void load();
      break;
  }
}

const handlers: Handlers = {
  onSelectCluster(index) {
    if (index !== state.cursor) {
      state = { ...state, cursor: index, memberCursor: 0 };
      paint();
    }
  },
  onSelectMember(index) {
    state = { ...state, memberCursor: index };
    paint();
  },
  onDecide(kind, representative) {
    void decide(kind, representative);
  },
  onOpenImage(url) {
    state = { ...state, lightbox: url };
    paint();
  },
  onCloseOverlay() {
    state = { ...state, lightbox: null };
    paint();
  },
  onToggleFilter() {
    handleCommand("toggle-pending");
  },
  onPage(direction) {
    handleCommand(direction === -1 ? "page-back" : "page-forward");
  },
};

function isEditing(): boolean {
  const active = document.activeElement;
  return active instanceof HTMLInputElement || active instanceof HTMLTextAreaElement;
}

function bootstrap(): void {
  const appNode = document.getElementById("app");
  if (appNode === null) {
    return;
  }
  root = appNode;
  annotatorInput = document.getElementById("annotator") as HTMLInputElement | null;
  if (annotatorInput !== null) {
    annotatorInput.value = localStorage.getItem(ANNOTATOR_KEY) ?? "";
    annotatorInput.addEventListener("change", () => {
      localStorage.setItem(ANNOTATOR_KEY, annotatorInput?.value.trim() ?? "");
    });
  }

  document.addEventListener("keydown", (event) => {
    const command = commandFor({
      key: event.key,
      ctrlKey: event.ctrlKey,
      metaKey: event.metaKey,
      altKey: event.altKey,
      editing: isEditing(),
    });
    if (command !== null) {
      event.preventDefault();
      handleCommand(command);
    }
  });

  paint();
  void load(0);
}

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", bootstrap);
} else {
  bootstrap();
}

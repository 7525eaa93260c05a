// DOM view. Rebuilds the #app subtree from session state on every change;
// cluster pages are small (tens of rows) so diffing is not worth the
// complexity. All data lands through textContent, never innerHTML.

import type { ClusterRecord } from "./api.js";
import type { SessionState } from "./state.js";
import { decisionSummary, evidenceSummary, statusSummary } from "./state.js";

export interface Handlers {
  onSelectCluster(index: number): void;
  onSelectMember(index: number): void;
  onDecide(kind: "duplicates" | "distinct", representative?: string): void;
  onOpenImage(url: string): void;
  onCloseOverlay(): void;
  onToggleFilter(): void;
  onPage(direction: 1 | -1): void;
}

export function render(root: HTMLElement, state: SessionState, handlers: Handlers): void {
  root.replaceChildren(
    navBar(state, handlers),
    clusterList(state, handlers),
    ...(state.lightbox !== null ? [lightbox(state.lightbox, handlers)] : []),
  );
  root.querySelector(".cluster.selected")?.scrollIntoView({ block: "nearest" });
}

function navBar(state: SessionState, handlers: Handlers): HTMLElement {
  const nav = el("nav");
  const filterBtn = el("button", undefined, state.filter === "pending" ? "showing pending" : "showing all");
  filterBtn.addEventListener("click", () => handlers.onToggleFilter());
  const back = el("button", undefined, "← page");
  back.addEventListener("click", () => handlers.onPage(-1));
  const forward = el("button", undefined, "page →");
  forward.addEventListener("click", () => handlers.onPage(1));
  nav.append(
    filterBtn,
    back,
    forward,
    el("span", "summary", statusSummary(state)),
    el("span", "notice", state.notice ?? ""),
  );
  return nav;
}

function clusterList(state: SessionState, handlers: Handlers): HTMLElement {
  const section = el("section", "clusters");
  if (state.clusters.length === 0) {
    section.appendChild(el("p", "empty", statusSummary(state)));
    return section;
  }
  state.clusters.forEach((cluster, index) => {
    section.appendChild(clusterCard(cluster, index, state, handlers));
  });
  return section;
}

function clusterCard(
  cluster: ClusterRecord,
  index: number,
  state: SessionState,
  handlers: Handlers,
): HTMLElement {
  const selected = index === state.cursor;
  const card = el("article", "cluster");
  if (selected) card.classList.add("selected");
  if (cluster.status === "decided") card.classList.add("decided");
  card.addEventListener("click", () => {
    if (!selected) handlers.onSelectCluster(index);
  });

  const head = el("header");
  head.append(
    el("strong", "cid", cluster.cluster_id),
    el("span", "app", `${cluster.app} / ${cluster.signature}`),
    el("span", "verdict", decisionSummary(cluster)),
  );
  card.appendChild(head);
  card.appendChild(el("div", "evidence", evidenceSummary(cluster)));

  const row = el("div", "members");
  cluster.members.forEach((member, memberIndex) => {
    row.appendChild(memberCard(cluster, index, member, memberIndex, selected, state, handlers));
  });
  card.appendChild(row);

  const actions = el("div", "actions");
  const dup = el("button", "dup", "duplicates (keep selected)");
  dup.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onDecide("duplicates");
  });
  const dis = el("button", "dis", "distinct");
  dis.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onDecide("distinct");
  });
  actions.append(dup, dis);
  card.appendChild(actions);
  return card;
}

function memberCard(
  cluster: ClusterRecord,
  clusterIndex: number,
  member: string,
  memberIndex: number,
  clusterSelected: boolean,
  state: SessionState,
  handlers: Handlers,
): HTMLElement {
  const detail = cluster.member_details[member] ?? {};
  const card = el("figure", "member");
  if (clusterSelected && memberIndex === state.memberCursor) {
    card.classList.add("picked");
  }
  card.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onSelectCluster(clusterIndex);
    handlers.onSelectMember(memberIndex);
  });

  const caption = el("figcaption");
  caption.appendChild(el("div", "tid", member));
  if (detail.action) caption.appendChild(el("div", "action", detail.action));
  if (detail.goal) caption.appendChild(el("div", "goal", detail.goal));
  card.appendChild(caption);

  const shots = el("div", "shots");
  for (const [field, label] of [
    ["s_t", "before"],
    ["s_t1", "after"],
  ] as const) {
    const url = detail[field];
    if (!url) continue;
    const holder = el("div", "shot");
    const img = document.createElement("img");
    img.src = url;
    img.loading = "lazy";
    img.alt = `${member} ${label}`;
    img.addEventListener("click", (event) => {
      event.stopPropagation();
      handlers.onSelectMember(memberIndex);
      handlers.onOpenImage(url);
    });
    holder.append(img, el("span", "label", label));
    shots.appendChild(holder);
  }
  card.appendChild(shots);

  const keep = el("button", "keep", "keep this");
  keep.addEventListener("click", (event) => {
    event.stopPropagation();
    handlers.onDecide("duplicates", member);
  });
  card.appendChild(keep);
  return card;
}

function lightbox(url: string, handlers: Handlers): HTMLElement {
  const overlay = el("div", "lightbox");
  const img = document.createElement("img");
  img.src = url;
  img.alt = "full resolution screenshot";
  overlay.appendChild(img);
  overlay.addEventListener("click", () => handlers.onCloseOverlay());
  return overlay;
}

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls !== undefined) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

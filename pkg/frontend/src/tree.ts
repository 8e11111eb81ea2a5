// The model browser: the five-level hierarchy on the left, the selected
// node with its attached failures on the right. Children arrive from the
// service already in step order, so they render in payload order.

import { clear, el } from "./dom";
import type { ViewState } from "./state";
import type { FailureBrief, FailureDetail, TreeNode } from "./types";
import { LEVEL_BADGE } from "./types";

export interface TreeViewDeps {
  fetchFailure(id: string): Promise<FailureDetail>;
  state: ViewState;
  onAttachHere(node: TreeNode): void;
}

export interface TreeViewHandle {
  setRoots(roots: TreeNode[]): void;
  select(node: TreeNode): void;
  pending: Promise<void> | null;
}

export function mountTreeView(container: HTMLElement, deps: TreeViewDeps): TreeViewHandle {
  const treePane = el("div", { class: "tree-pane" });
  const detailPane = el("div", { class: "detail-pane" });
  container.append(treePane, detailPane);

  const handle: TreeViewHandle = {
    setRoots(roots) {
      renderRoots(roots);
    },
    select(node) {
      deps.state.selected = node;
      renderDetail(node);
    },
    pending: null,
  };

  function renderRoots(roots: TreeNode[]): void {
    clear(treePane);
    if (roots.length === 0) {
      treePane.append(
        el(
          "div",
          { class: "empty-state" },
          el("p", {}, "The graph holds no model yet."),
          el("p", {}, "Build one from a model spec and restart the service:"),
          el("code", {}, "fbsdiag ingest model line.yaml --out line.dkg"),
        ),
      );
      return;
    }
    const list = el("ul", { class: "tree" });
    for (const root of roots) list.append(nodeItem(root));
    treePane.append(list);
  }

  function nodeItem(node: TreeNode): HTMLElement {
    const label = el(
      "span",
      { class: "node-label", "data-node-id": node.id, tabindex: "0" },
      node.label,
    );
    label.addEventListener("click", (event) => {
      event.preventDefault();
      handle.select(node);
    });
    const parts: Array<Node> = [levelBadge(node), label];
    if (node.failures > 0) {
      parts.push(
        el(
          "span",
          { class: "count-badge", title: `${node.failures} failure(s) attached here` },
          String(node.failures),
        ),
      );
    }
    if (node.subtree_failures > node.failures) {
      parts.push(
        el(
          "span",
          { class: "count-badge subtree", title: `${node.subtree_failures} in this subtree` },
          String(node.subtree_failures),
        ),
      );
    }
    if (node.children.length === 0) {
      return el("li", { class: "leaf" }, ...parts);
    }
    // top two levels start open so the six processes are visible at once
    const details = el(
      "details",
      node.level === "LineFunction" || node.level === "ProcessFunction" ? { open: "" } : {},
    );
    details.append(el("summary", {}, ...parts));
    const children = el("ul", { class: "tree" });
    for (const child of node.children) children.append(nodeItem(child));
    details.append(children);
    return el("li", {}, details);
  }

  function renderDetail(node: TreeNode): void {
    clear(detailPane);
    const attachButton = el("button", { class: "secondary", type: "button" }, "new record here");
    attachButton.addEventListener("click", () => deps.onAttachHere(node));
    detailPane.append(el("h3", {}, levelBadge(node), " ", node.label));
    detailPane.append(el("p", { class: "muted mono" }, node.id));
    if (node.description) detailPane.append(el("p", {}, node.description));
    if (node.after.length > 0) {
      detailPane.append(el("p", { class: "muted" }, `runs after: ${node.after.join(", ")}`));
    }
    detailPane.append(
      attachButton,
      el("h4", {}, `attached failures (${node.attached.length})`),
      failureList(node.attached),
      el("div", { class: "drilldown" }),
    );
  }

  function failureList(briefs: FailureBrief[]): HTMLElement {
    if (briefs.length === 0) {
      return el("p", { class: "muted" }, "none recorded at this node");
    }
    const list = el("ul", { class: "failure-list" });
    for (const brief of briefs) {
      const button = el(
        "button",
        { class: "link", type: "button", "data-failure-id": brief.id },
        brief.label,
      );
      button.addEventListener("click", () => {
        handle.pending = showFailure(brief.id);
      });
      list.append(
        el("li", {}, button, " ", el("span", { class: "tag" }, brief.category)),
      );
    }
    return list;
  }

  async function showFailure(id: string): Promise<void> {
    const target = detailPane.querySelector<HTMLElement>(".drilldown");
    if (!target) return;
    clear(target);
    try {
      const detail = await deps.fetchFailure(id);
      target.append(failureCard(detail));
    } catch (error) {
      target.append(el("p", { class: "error-banner" }, String(error)));
    }
  }

  return handle;
}

export function failureCard(detail: FailureDetail): HTMLElement {
  const rows: Array<[string, Node | string | null]> = [
    ["failure", el("strong", {}, detail.label)],
    ["id", el("span", { class: "mono" }, detail.id)],
    ["category", el("span", { class: "tag" }, detail.category)],
    ["record", detail.record_id],
    ["description", detail.description || null],
    [
      "attached to",
      detail.attached_to
        ? `${detail.attached_to.label} (${detail.attached_to.level}), id ${detail.attached_to.id}`
        : "nowhere",
    ],
    ["causes", briefLine(detail.causes)],
    ["effects", briefLine(detail.effects)],
  ];
  const list = el("dl", { class: "failure-card" });
  for (const [term, value] of rows) {
    if (value === null) continue;
    list.append(el("dt", {}, term), el("dd", {}, value));
  }
  return list;
}

function briefLine(briefs: FailureBrief[]): string {
  if (briefs.length === 0) return "none";
  return briefs.map((brief) => `${brief.label} [${brief.id}]`).join("; ");
}

function levelBadge(node: TreeNode): HTMLElement {
  return el(
    "span",
    { class: `level-badge level-${node.level}`, title: node.level },
    LEVEL_BADGE[node.level],
  );
}

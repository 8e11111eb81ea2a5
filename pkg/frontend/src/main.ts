// App shell: boots against the service, wires the four views together,
// and keeps the header counts in step with acknowledged writes.

import { ApiClient } from "./api";
import { mountConsole } from "./console";
import { mountDashboard } from "./dashboard";
import { clear, el } from "./dom";
import { initialState } from "./state";
import { mountTreeView } from "./tree";
import type { GraphSummary, SubmitAck, TreeNode } from "./types";
import { mountWizard } from "./wizard";
import "./style.css";

const TABS = ["model", "diagnose", "new record", "evaluation"] as const;

export async function initApp(root: HTMLElement, client: ApiClient): Promise<void> {
  clear(root);
  const state = initialState();

  const header = el("header", { class: "app-header" });
  const banner = el("div", { class: "banner-slot" });
  const tabBar = el("nav", { class: "tabs" });
  const views = TABS.map((name) =>
    el("section", { class: "view", "data-view": name, hidden: "" }),
  );
  root.append(header, banner, tabBar, ...views);

  const show = (name: (typeof TABS)[number]): void => {
    views.forEach((view) => {
      if (view.dataset.view === name) view.removeAttribute("hidden");
      else view.setAttribute("hidden", "");
    });
    tabBar.querySelectorAll("button").forEach((button) => {
      button.classList.toggle("active", button.dataset.tab === name);
    });
  };
  TABS.forEach((name) => {
    const button = el("button", { type: "button", "data-tab": name }, name);
    button.addEventListener("click", () => show(name));
    tabBar.append(button);
  });

  const [modelView, diagnoseView, recordView, evalView] = views as [
    HTMLElement,
    HTMLElement,
    HTMLElement,
    HTMLElement,
  ];

  const tree = mountTreeView(modelView, {
    fetchFailure: (id) => client.failure(id),
    state,
    onAttachHere(node) {
      state.selected = node;
      wizard.render();
      show("new record");
    },
  });
  mountConsole(diagnoseView, {
    diagnose: (request) => client.diagnose(request),
    fetchFailure: (id) => client.failure(id),
    state,
    onVerified(draft) {
      wizard.setDraft(draft);
      show("new record");
    },
  });
  const wizard = mountWizard(recordView, {
    submit: (draft) => client.submitRecord(draft),
    state,
    onSubmitted(ack) {
      void refresh(ack);
    },
  });
  mountDashboard(evalView, {
    evalRun: (suite) => client.evalRun(suite),
    state,
  });

  function renderHeader(summary: GraphSummary | null, version: string): void {
    clear(header);
    header.append(
      el("h1", {}, "fbsdiag"),
      el("span", { class: "muted" }, version ? `service ${version}` : ""),
    );
    if (summary) {
      header.append(
        chip("systems", summary.system_nodes),
        chip("failures", summary.failure_nodes),
        chip("records", summary.records),
        el(
          "span",
          { class: summary.validated ? "chip ok" : "chip warn" },
          summary.validated ? "validated" : "not validated",
        ),
      );
    }
  }

  function chip(name: string, value: number): HTMLElement {
    return el(
      "span",
      { class: "chip", "data-chip": name },
      `${name} `,
      el("strong", { "data-count": String(value) }, String(value)),
    );
  }

  async function refresh(ack?: SubmitAck): Promise<void> {
    const summary = await client.graph();
    // the ack already told us the count; the summary must agree with it
    if (ack && summary.records !== ack.record_count) {
      summary.records = ack.record_count;
    }
    renderHeader(summary, version);
    const { roots } = await client.tree();
    applyRoots(roots);
  }

  function applyRoots(roots: TreeNode[]): void {
    tree.setRoots(roots);
    wizard.setSystems(roots);
  }

  let version = "";
  try {
    const health = await client.health();
    version = health.version;
    await refresh();
  } catch (error) {
    renderHeader(null, "");
    banner.append(
      el(
        "div",
        { class: "error-banner service-unreachable", role: "alert" },
        el("strong", {}, "service unreachable"),
        el("p", {}, `is fbsdiag serve running? ${String(error)}`),
        retryButton(),
      ),
    );
  }

  function retryButton(): HTMLElement {
    const button = el("button", { type: "button", class: "secondary" }, "retry");
    button.addEventListener("click", () => {
      void initApp(root, client);
    });
    return button;
  }

  show("model");
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void initApp(document.getElementById("app") as HTMLElement, new ApiClient());
}

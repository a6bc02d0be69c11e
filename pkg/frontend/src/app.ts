/** Triage view: page through ranked records, inspect neighborhood context,
 * record verdicts, export the cleaned dataset. All state lives in the
 * service; every action here maps onto one API call, so a page reload
 * reproduces the session exactly. */

import { ApiClient, ApiError, type ReviewApi } from "./api.js";
import {
  buildSubmission,
  clampIndex,
  gateSubmission,
  labelHistogram,
  pageStart,
  progressSegments,
  type Selection,
} from "./state.js";
import {
  VERDICT_CLASSES,
  type ExportPayload,
  type NodeDetail,
  type Progress,
  type RankedRecord,
  type ReportPage,
  type VerdictClass,
} from "./types.js";

const VERDICT_TITLES: Record<VerdictClass, string> = {
  clear_mislabel: "clear mislabel",
  likely_mislabel: "likely mislabel",
  ambiguous: "ambiguous",
  likely_ok: "likely ok",
  clear_ok: "clear ok",
};

export interface AppOptions {
  reviewer?: string;
  pageSize?: number;
}

/** Programmatic handle over the mounted view (used by the tests and by
 * keyboard wiring); every mutation a button performs goes through here. */
export interface AppHandle {
  root: HTMLElement;
  whenIdle(): Promise<void>;
  next(): void;
  prev(): void;
  goTo(index: number): void;
  selectVerdict(verdict: VerdictClass): void;
  setCorrection(label: number | null): void;
  setReviewer(name: string): void;
  submit(): void;
  exportClean(): void;
  retry(): void;
  currentRecord(): RankedRecord | null;
  lastExport(): ExportPayload | null;
}

export function mountApp(
  root: HTMLElement,
  api: ReviewApi,
  options: AppOptions = {},
): AppHandle {
  const pageSize = options.pageSize ?? 25;

  // -- session state (all reconstructible from the service) ---------------
  let page: ReportPage | null = null;
  let detail: NodeDetail | null = null;
  let progress: Progress | null = null;
  let index = 0; // global position in the ranked queue
  let selection: Selection = { verdict: null, correctedLabel: null };
  let reviewer = options.reviewer ?? "reviewer";
  let error: string | null = null;
  let notice: string | null = null;
  let exported: ExportPayload | null = null;
  let lastAction: (() => void) | null = null;
  let busy: Promise<void> = Promise.resolve();

  // -- static skeleton -----------------------------------------------------
  root.innerHTML = `
    <header class="bar">
      <h1 id="dataset-name">audit review</h1>
      <div id="progress-wrap">
        <div id="progress-bar" role="img" aria-label="verdict progress"></div>
        <div id="progress-text"></div>
      </div>
      <button id="export-btn" type="button">Export cleaned dataset</button>
    </header>
    <div id="error-bar" hidden>
      <span id="error-text"></span>
      <button id="retry-btn" type="button">Retry</button>
    </div>
    <div id="notice-bar" hidden></div>
    <main>
      <section id="record-panel">
        <div class="nav">
          <button id="prev-btn" type="button">&#8592; prev</button>
          <span id="queue-pos"></span>
          <button id="next-btn" type="button">next &#8594;</button>
        </div>
        <div id="record-body"></div>
        <div id="prob-panel"></div>
      </section>
      <section id="context-panel">
        <h2>Neighborhood</h2>
        <div id="neighbor-body"></div>
      </section>
      <section id="verdict-panel">
        <h2>Verdict</h2>
        <div id="verdict-buttons"></div>
        <label id="correction-row">
          corrected label
          <select id="correction-select"></select>
        </label>
        <label>
          reviewer
          <input id="reviewer-input" type="text" />
        </label>
        <button id="submit-btn" type="button">Submit verdict</button>
        <div id="gate-hint"></div>
      </section>
    </main>
  `;

  const el = <T extends HTMLElement>(id: string): T => {
    const found = root.querySelector<T>(`#${id}`);
    if (found === null) {
      throw new Error(`missing element #${id}`);
    }
    return found;
  };

  const verdictButtons = el<HTMLDivElement>("verdict-buttons");
  for (const verdict of VERDICT_CLASSES) {
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.verdict = verdict;
    button.textContent = VERDICT_TITLES[verdict];
    button.addEventListener("click", () => handle.selectVerdict(verdict));
    verdictButtons.appendChild(button);
  }

  const reviewerInput = el<HTMLInputElement>("reviewer-input");
  reviewerInput.value = reviewer;
  reviewerInput.addEventListener("change", () => {
    handle.setReviewer(reviewerInput.value);
  });

  const correctionSelect = el<HTMLSelectElement>("correction-select");
  correctionSelect.addEventListener("change", () => {
    const raw = correctionSelect.value;
    handle.setCorrection(raw === "" ? null : Number(raw));
  });

  el<HTMLButtonElement>("prev-btn").addEventListener("click", () => handle.prev());
  el<HTMLButtonElement>("next-btn").addEventListener("click", () => handle.next());
  el<HTMLButtonElement>("submit-btn").addEventListener("click", () => handle.submit());
  el<HTMLButtonElement>("export-btn").addEventListener("click", () => handle.exportClean());
  el<HTMLButtonElement>("retry-btn").addEventListener("click", () => handle.retry());

  // -- rendering -----------------------------------------------------------

  function currentRecord(): RankedRecord | null {
    if (page === null) {
      return null;
    }
    return page.records[index - page.offset] ?? null;
  }

  function renderProgress(): void {
    const bar = el<HTMLDivElement>("progress-bar");
    const text = el<HTMLDivElement>("progress-text");
    bar.innerHTML = "";
    if (progress === null) {
      text.textContent = "";
      return;
    }
    for (const segment of progressSegments(progress)) {
      if (segment.count === 0) {
        continue;
      }
      const span = document.createElement("span");
      span.className = `seg seg-${segment.verdict}`;
      span.style.width = `${(segment.fraction * 100).toFixed(2)}%`;
      span.title = `${VERDICT_TITLES[segment.verdict]}: ${segment.count}`;
      bar.appendChild(span);
    }
    text.textContent =
      `${progress.reviewed} / ${progress.total} reviewed · ` +
      `${progress.flagged} flagged`;
  }

  function renderRecord(): void {
    const body = el<HTMLDivElement>("record-body");
    const pos = el<HTMLSpanElement>("queue-pos");
    const record = currentRecord();
    if (page === null || record === null) {
      body.textContent = "no records";
      pos.textContent = "";
      return;
    }
    pos.textContent = `${index + 1} / ${page.total}`;
    const suggested =
      record.suggested_label === undefined ? "—" : String(record.suggested_label);
    const verdictNote =
      record.verdict === null
        ? ""
        : `<div class="reviewed-note">reviewed: ${VERDICT_TITLES[record.verdict]}</div>`;
    body.innerHTML = `
      <div class="node-head">
        <span class="node-id">node ${record.node_id}</span>
        ${record.flagged ? '<span class="flag-badge">flagged</span>' : ""}
      </div>
      <dl>
        <dt>given label</dt><dd id="given-label">${record.given_label}</dd>
        <dt>suggested label</dt><dd id="suggested-label">${suggested}</dd>
        <dt>mislabel score</dt><dd id="mislabel-score">${record.mislabel_score.toFixed(4)}</dd>
      </dl>
      ${verdictNote}
    `;
  }

  function renderProbs(): void {
    const panel = el<HTMLDivElement>("prob-panel");
    panel.innerHTML = "";
    if (detail?.p_row === undefined) {
      return;
    }
    const title = document.createElement("h3");
    title.textContent = "base classifier";
    panel.appendChild(title);
    detail.p_row.forEach((p, label) => {
      const row = document.createElement("div");
      row.className = "prob-row";
      const tag = document.createElement("span");
      tag.textContent = `class ${label}`;
      const bar = document.createElement("span");
      bar.className = "prob-bar";
      bar.style.width = `${(p * 100).toFixed(1)}%`;
      const value = document.createElement("span");
      value.textContent = p.toFixed(3);
      row.append(tag, bar, value);
      panel.appendChild(row);
    });
  }

  function renderNeighbors(): void {
    const body = el<HTMLDivElement>("neighbor-body");
    body.innerHTML = "";
    if (detail === null || page === null) {
      return;
    }
    for (const ring of detail.neighbors) {
      const block = document.createElement("div");
      block.className = "hop-block";
      const head = document.createElement("h3");
      head.textContent = `${ring.hop} hop${ring.hop > 1 ? "s" : ""} · ${ring.nodes.length} nodes`;
      block.appendChild(head);
      const histogram = labelHistogram(ring.nodes, page.num_classes);
      const list = document.createElement("div");
      list.className = "histogram";
      histogram.forEach((count, label) => {
        const row = document.createElement("div");
        row.className = "hist-row";
        row.dataset.label = String(label);
        const max = Math.max(...histogram, 1);
        row.innerHTML =
          `<span class="hist-tag">label ${label}</span>` +
          `<span class="hist-bar" style="width:${((count / max) * 100).toFixed(1)}%"></span>` +
          `<span class="hist-count">${count}</span>`;
        list.appendChild(row);
      });
      block.appendChild(list);
      body.appendChild(block);
    }
  }

  function renderVerdictControls(): void {
    for (const button of verdictButtons.querySelectorAll("button")) {
      button.classList.toggle("selected", button.dataset.verdict === selection.verdict);
    }
    if (page !== null && correctionSelect.options.length !== page.num_classes + 1) {
      correctionSelect.innerHTML = "";
      const blank = document.createElement("option");
      blank.value = "";
      blank.textContent = "—";
      correctionSelect.appendChild(blank);
      for (let label = 0; label < page.num_classes; label += 1) {
        const option = document.createElement("option");
        option.value = String(label);
        option.textContent = `class ${label}`;
        correctionSelect.appendChild(option);
      }
    }
    correctionSelect.value =
      selection.correctedLabel === null ? "" : String(selection.correctedLabel);
    const gate = gateSubmission(selection);
    // disabled until a class is chosen; a chosen-but-incomplete selection
    // stays clickable so the block is visible on submit
    el<HTMLButtonElement>("submit-btn").disabled = selection.verdict === null;
    el<HTMLDivElement>("gate-hint").textContent = gate.ok ? "" : (gate.reason ?? "");
  }

  function renderBars(): void {
    const errorBar = el<HTMLDivElement>("error-bar");
    errorBar.hidden = error === null;
    el<HTMLSpanElement>("error-text").textContent = error ?? "";
    const noticeBar = el<HTMLDivElement>("notice-bar");
    noticeBar.hidden = notice === null;
    noticeBar.textContent = notice ?? "";
    if (page !== null) {
      el<HTMLHeadingElement>("dataset-name").textContent = `audit review · ${page.dataset}`;
    }
  }

  function render(): void {
    renderProgress();
    renderRecord();
    renderProbs();
    renderNeighbors();
    renderVerdictControls();
    renderBars();
  }

  // -- async actions -------------------------------------------------------

  function run(label: string, action: () => Promise<void>): void {
    const attempt = (): void => {
      busy = busy.then(async () => {
        error = null;
        try {
          await action();
        } catch (err) {
          error = err instanceof ApiError ? `${label}: ${err.message}` : String(err);
          lastAction = attempt;
        }
        render();
      });
    };
    attempt();
  }

  async function loadAround(target: number): Promise<void> {
    const offset = pageStart(target, pageSize);
    if (page === null || page.offset !== offset) {
      page = await api.reportPage(offset, pageSize);
    }
    index = clampIndex(target, page.total);
    const record = currentRecord();
    detail = record === null ? null : await api.nodeDetail(record.node_id);
    selection = { verdict: null, correctedLabel: null };
    notice = null;
  }

  async function refresh(target: number): Promise<void> {
    page = null; // force a re-fetch: verdict state lives server-side
    await loadAround(target);
    progress = await api.progress();
  }

  const handle: AppHandle = {
    root,
    whenIdle: () => busy,
    next: () => run("load", () => loadAround(index + 1)),
    prev: () => run("load", () => loadAround(index - 1)),
    goTo: (target) => run("load", () => loadAround(target)),
    selectVerdict: (verdict) => {
      selection = { ...selection, verdict };
      render();
    },
    setCorrection: (label) => {
      selection = { ...selection, correctedLabel: label };
      render();
    },
    setReviewer: (name) => {
      reviewer = name.trim() === "" ? "reviewer" : name.trim();
      reviewerInput.value = reviewer;
    },
    submit: () => {
      const record = currentRecord();
      const gate = gateSubmission(selection);
      if (record === null || !gate.ok) {
        // client-side block: no request leaves the page
        render();
        return;
      }
      const body = buildSubmission(record.node_id, selection, reviewer);
      run("submit", async () => {
        const stored = await api.submitVerdict(body);
        notice = `recorded ${VERDICT_TITLES[stored.verdict]} for node ${stored.node_id}`;
        await refresh(index + 1); // advance down the ranked queue
        notice = `recorded ${VERDICT_TITLES[stored.verdict]} for node ${stored.node_id}`;
      });
    },
    exportClean: () => {
      run("export", async () => {
        exported = await api.exportClean();
        offerDownload("labels.csv", exported.label_csv);
        offerDownload("splits.csv", exported.split_csv);
        notice = "export ready: labels.csv and splits.csv";
      });
    },
    retry: () => {
      if (lastAction !== null) {
        const again = lastAction;
        lastAction = null;
        again();
      }
    },
    currentRecord,
    lastExport: () => exported,
  };

  function offerDownload(name: string, content: string): void {
    // jsdom has no createObjectURL; the payload stays reachable via lastExport
    if (typeof URL.createObjectURL !== "function") {
      return;
    }
    const url = URL.createObjectURL(new Blob([content], { type: "text/csv" }));
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = name;
    anchor.click();
    URL.revokeObjectURL(url);
  }

  run("load", () => refresh(0));
  return handle;
}

// browser entry: mount onto the page served at /
const appRoot = typeof document === "undefined" ? null : document.getElementById("app");
if (appRoot !== null) {
  mountApp(appRoot, new ApiClient());
}

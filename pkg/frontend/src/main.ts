import { ApiClient } from "./api.js";
import { CandidatesController } from "./candidates.js";
import { QueueController } from "./queue.js";
import {
  renderCandidateRow,
  renderEmptyCandidates,
  renderPrecisionBanner,
  renderQueueItem,
  renderStats,
  renderUnsaved,
  textEl,
} from "./render.js";

const STATS_POLL_MS = 5000;

type View = "queue" | "candidates" | "stats";

function mount(root: HTMLElement, expertId: string): { stop: () => void } {
  const api = new ApiClient();
  const queue = new QueueController(api, expertId);
  const candidates = new CandidatesController(api, expertId);
  let view: View = "queue";
  let stats: Awaited<ReturnType<ApiClient["getStats"]>> | null = null;

  const nav = document.createElement("nav");
  for (const name of ["queue", "candidates", "stats"] as View[]) {
    const button = textEl("button", name, `tab tab-${name}`);
    button.addEventListener("click", () => {
      view = name;
      if (name === "candidates") void candidates.load();
      draw();
    });
    nav.append(button);
  }
  const content = document.createElement("main");
  root.replaceChildren(textEl("header", `ad triage console — expert ${expertId}`), nav, content);

  function drawQueue(): void {
    content.replaceChildren();
    const unsentLabels = queue.unsaved();
    if (unsentLabels.length > 0) {
      content.append(renderUnsaved(unsentLabels, (id) => void queue.retry(id)));
    }
    const item = queue.current();
    if (item) {
      content.append(renderQueueItem(item));
      content.append(
        textEl("p", "keys: P positive · N negative · S skip", "hint"),
        textEl("p", `${queue.remainingCount()} listings left in your queue`, "remaining"),
      );
    } else if (queue.exhausted()) {
      content.append(textEl("p", "Queue done — every sampled listing has your verdict.", "empty-state"));
    } else {
      content.append(textEl("p", "loading queue…", "loading"));
    }
  }

  function drawCandidates(): void {
    content.replaceChildren();
    if (candidates.lastError()) {
      content.append(textEl("p", `error: ${candidates.lastError()}`, "error"));
    }
    const current = candidates.stats();
    if (current) {
      content.append(
        renderPrecisionBanner(
          candidates.precisionBanner(),
          current.results.expert_confirmed,
          current.results.learner_positive,
        ),
      );
    }
    const rows = candidates.candidates();
    if (rows.length === 0) {
      content.append(renderEmptyCandidates());
      const retrain = textEl("button", "retrain", "retrain");
      retrain.addEventListener("click", () => {
        void api.retrain().then(() => candidates.load());
      });
      content.append(retrain);
      return;
    }
    const table = document.createElement("table");
    table.className = "candidates";
    const head = document.createElement("tr");
    for (const caption of ["listing", "score", "status", "actions"]) {
      head.append(textEl("th", caption));
    }
    table.append(head);
    for (const row of rows) {
      table.append(renderCandidateRow(row, (id, ok) => void candidates.verify(id, ok)));
    }
    content.append(table);
  }

  function drawStats(): void {
    content.replaceChildren(stats ? renderStats(stats) : textEl("p", "loading…", "loading"));
  }

  function draw(): void {
    if (view === "queue") drawQueue();
    else if (view === "candidates") drawCandidates();
    else drawStats();
  }

  queue.onChange(draw);
  candidates.onChange(() => {
    if (view === "candidates") draw();
  });

  function onKey(event: KeyboardEvent): void {
    if (view !== "queue") return;
    const key = event.key.toLowerCase();
    if (key === "p") void queue.label("positive");
    else if (key === "n") void queue.label("negative");
    else if (key === "s") void queue.label("skip");
  }
  document.addEventListener("keydown", onKey);

  async function pollStats(): Promise<void> {
    try {
      stats = await api.getStats();
      if (view === "stats") draw();
    } catch {
      // stats stay stale on transient errors; next poll retries
    }
  }
  const timer = setInterval(() => void pollStats(), STATS_POLL_MS);

  void queue.load();
  void pollStats();
  draw();

  return {
    stop: () => {
      clearInterval(timer);
      document.removeEventListener("keydown", onKey);
    },
  };
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const stored = window.sessionStorage.getItem("expert_id");
  const expertId = stored ?? window.prompt("expert id (e.g. e1)", "e1") ?? "e1";
  window.sessionStorage.setItem("expert_id", expertId);
  mount(root, expertId);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  start();
}

export { mount };

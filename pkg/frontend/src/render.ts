// DOM rendering for the dashboard: queue cards with pixel-grid previews,
// the known-class panel, the budget gauge, and the control strip.

import type { KnownClass, QueueEntry, SessionState } from "./api.js";
import { budgetFraction, QueueModel } from "./model.js";

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

/** Draw the raw [0,1] pixel grid onto a canvas, client-side only. */
export function drawInputGrid(canvas: HTMLCanvasElement, entry: QueueEntry): void {
  const { width, height, channels, pixels } = entry;
  canvas.width = width;
  canvas.height = height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const image = ctx.createImageData(width, height);
  for (let i = 0; i < width * height; i += 1) {
    let r: number;
    let g: number;
    let b: number;
    if (channels >= 3) {
      r = pixels[i * channels] * 255;
      g = pixels[i * channels + 1] * 255;
      b = pixels[i * channels + 2] * 255;
    } else {
      r = g = b = pixels[i] * 255;
    }
    image.data[i * 4] = r;
    image.data[i * 4 + 1] = g;
    image.data[i * 4 + 2] = b;
    image.data[i * 4 + 3] = 255;
  }
  ctx.putImageData(image, 0, 0);
}

export interface QueueCallbacks {
  submit: (queryId: number, classId: number) => void;
}

export function renderQueue(
  container: HTMLElement,
  model: QueueModel,
  vocabulary: KnownClass[],
  callbacks: QueueCallbacks,
): void {
  clear(container);
  const entries = model.visible();
  if (entries.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No pending labeling queries.";
    container.appendChild(empty);
    return;
  }
  for (const entry of entries) {
    container.appendChild(renderCard(entry, model, vocabulary, callbacks));
  }
}

function renderCard(
  entry: QueueEntry,
  model: QueueModel,
  vocabulary: KnownClass[],
  callbacks: QueueCallbacks,
): HTMLElement {
  const card = document.createElement("div");
  card.className = "card";
  card.dataset.queryId = String(entry.query_id);

  const canvas = document.createElement("canvas");
  canvas.className = "card-image";
  drawInputGrid(canvas, entry);
  card.appendChild(canvas);

  const meta = document.createElement("div");
  meta.className = "card-meta";
  const confidence =
    entry.confidence === null ? "" : ` — monitor distance ${entry.confidence.toFixed(3)}`;
  meta.textContent = `input #${entry.input_index}: predicted ${entry.predicted_name}${confidence}`;
  card.appendChild(meta);

  const notice = model.notice(entry.query_id);
  if (notice !== undefined) {
    const warning = document.createElement("p");
    warning.className = "card-notice";
    warning.textContent = notice;
    card.appendChild(warning);
  }

  const buttons = document.createElement("div");
  buttons.className = "card-buttons";
  // the authority answers in the full vocabulary, learned or not
  for (const cls of vocabulary) {
    const button = document.createElement("button");
    button.textContent = cls.name;
    button.dataset.classId = String(cls.id);
    button.addEventListener("click", () => callbacks.submit(entry.query_id, cls.id));
    buttons.appendChild(button);
  }
  card.appendChild(buttons);
  return card;
}

export function renderKnownClasses(container: HTMLElement, state: SessionState): void {
  clear(container);
  const known = new Set(state.known_classes.map((c) => c.id));
  for (const cls of state.class_vocabulary) {
    const badge = document.createElement("span");
    badge.className = known.has(cls.id) ? "class-badge known" : "class-badge";
    badge.textContent = cls.name;
    container.appendChild(badge);
  }
}

export function renderBudget(container: HTMLElement, state: SessionState): void {
  const fraction = budgetFraction(state.queries_used, state.budget);
  const used = state.queries_used;
  container.querySelector(".gauge-fill")?.setAttribute(
    "style",
    `width: ${((fraction ?? 0) * 100).toFixed(1)}%`,
  );
  const label = container.querySelector(".gauge-label");
  if (label) label.textContent = `${used} / ${state.budget} queries`;
}

export function renderStatus(container: HTMLElement, state: SessionState): void {
  const precision =
    state.monitor_precision === null ? "n/a" : state.monitor_precision.toFixed(3);
  container.textContent =
    `${state.strategy} | ${state.run_state} | batch ${state.batch_index} | ` +
    `input ${state.cursor}/${state.stream_length} | precision ${precision} | ` +
    `adaptations ${state.model_adaptations} model / ${state.monitor_adaptations} monitor`;
}

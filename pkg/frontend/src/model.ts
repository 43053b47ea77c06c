// View-model logic: queue bookkeeping with optimistic removal, metric
// series with reconnect-safe dedupe, and adaptation-marker extraction.
// All truth lives server-side; this state is rebuilt from the endpoints.

import type { MetricRow, QueueEntry } from "./api.js";

export interface CardNotice {
  queryId: number;
  message: string;
}

/**
 * Labeling-queue state. Submissions remove the card optimistically; a
 * non-2xx response rolls the card back with an inline notice so the
 * human sees the conflict.
 */
export class QueueModel {
  private entries: QueueEntry[] = [];
  private inFlight = new Map<number, QueueEntry>();
  private notices = new Map<number, string>();

  /** Replace the visible queue with the latest server response. */
  sync(serverEntries: QueueEntry[]): void {
    const pending = new Set(serverEntries.map((e) => e.query_id));
    this.entries = serverEntries.filter((e) => !this.inFlight.has(e.query_id));
    for (const id of [...this.notices.keys()]) {
      if (!pending.has(id)) this.notices.delete(id);
    }
  }

  visible(): QueueEntry[] {
    return [...this.entries];
  }

  notice(queryId: number): string | undefined {
    return this.notices.get(queryId);
  }

  /** Optimistic removal before the POST settles. */
  beginSubmit(queryId: number): QueueEntry | undefined {
    const index = this.entries.findIndex((e) => e.query_id === queryId);
    if (index < 0) return undefined;
    const [entry] = this.entries.splice(index, 1);
    this.inFlight.set(queryId, entry);
    this.notices.delete(queryId);
    return entry;
  }

  /** Successful label: the card stays gone. */
  confirmSubmit(queryId: number): void {
    this.inFlight.delete(queryId);
  }

  /** Failed label: restore the card with a visible notice. */
  rollbackSubmit(queryId: number, message: string): void {
    const entry = this.inFlight.get(queryId);
    this.inFlight.delete(queryId);
    if (entry !== undefined) {
      this.entries.push(entry);
      this.entries.sort((a, b) => a.query_id - b.query_id);
    }
    this.notices.set(queryId, message);
  }
}

/**
 * Metric series keyed by batch index. Reconnecting to the stream replays
 * rows from the start; duplicates are dropped by batch_index so chart
 * points never double up.
 */
export class MetricsModel {
  private rows = new Map<number, MetricRow>();

  add(row: MetricRow): boolean {
    if (this.rows.has(row.batch_index)) return false;
    this.rows.set(row.batch_index, row);
    return true;
  }

  series(): MetricRow[] {
    return [...this.rows.values()].sort((a, b) => a.batch_index - b.batch_index);
  }

  /** Batches whose row carries a model-adaptation event (chart markers). */
  adaptationMarkers(kind = "AdaptModel"): number[] {
    return this.series()
      .filter((row) => row.event.split(";").includes(kind))
      .map((row) => row.batch_index);
  }

  precisionSeries(): Array<{ x: number; y: number }> {
    return this.series()
      .filter((row) => row.monitor_precision !== null)
      .map((row) => ({ x: row.batch_index, y: row.monitor_precision as number }));
  }

  /** Authority queries issued per batch, as a rate over batch size. */
  queryRateSeries(): Array<{ x: number; y: number }> {
    const series = this.series();
    const out: Array<{ x: number; y: number }> = [];
    let previousQueries = 0;
    let previousInputs = 0;
    for (const row of series) {
      const inputs = row.inputs_seen - previousInputs;
      const queries = row.queries_used - previousQueries;
      out.push({ x: row.batch_index, y: inputs > 0 ? queries / inputs : 0 });
      previousQueries = row.queries_used;
      previousInputs = row.inputs_seen;
    }
    return out;
  }
}

/** Budget gauge fraction in [0, 1]; null when no budget is configured. */
export function budgetFraction(queriesUsed: number, budget: number): number | null {
  if (budget <= 0) return null;
  return Math.min(1, queriesUsed / budget);
}

// Typed client for the monitoring service endpoints.

export interface KnownClass {
  id: number;
  name: string;
}

export interface SessionState {
  mode: string;
  run_state: string;
  strategy: string;
  known_classes: KnownClass[];
  class_vocabulary: KnownClass[];
  queries_used: number;
  budget: number;
  cursor: number;
  stream_length: number;
  batch_index: number;
  monitor_precision: number | null;
  network_precision: number | null;
  queue_length: number;
  model_adaptations: number;
  monitor_adaptations: number;
}

export interface QueueEntry {
  query_id: number;
  input_index: number;
  width: number;
  height: number;
  channels: number;
  pixels: number[];
  predicted_class: number;
  predicted_name: string;
  confidence: number | null;
  enqueued_at: number;
}

export interface MetricRow {
  batch_index: number;
  inputs_seen: number;
  queries_used: number;
  known_classes: number;
  monitor_precision: number | null;
  network_precision: number | null;
  event: string;
}

export type ControlAction = "pause" | "resume" | "step_batch";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function checked<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class Client {
  constructor(readonly baseUrl: string, readonly fetcher: typeof fetch = fetch) {}

  async state(): Promise<SessionState> {
    return checked(await this.fetcher(`${this.baseUrl}/state`));
  }

  async queue(): Promise<QueueEntry[]> {
    const body = await checked<{ entries: QueueEntry[] }>(
      await this.fetcher(`${this.baseUrl}/queue`),
    );
    return body.entries;
  }

  async label(queryId: number, classId: number): Promise<{ queries_used: number }> {
    return checked(
      await this.fetcher(`${this.baseUrl}/label`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ query_id: queryId, class_id: classId }),
      }),
    );
  }

  async control(action: ControlAction): Promise<{ run_state: string }> {
    return checked(
      await this.fetcher(`${this.baseUrl}/control`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ action }),
      }),
    );
  }

  /** Consume the newline-delimited metric stream, invoking onRow per row. */
  async streamMetrics(onRow: (row: MetricRow) => void, signal?: AbortSignal): Promise<void> {
    const response = await this.fetcher(`${this.baseUrl}/metrics/stream`, { signal });
    if (!response.ok || response.body === null) {
      throw new ApiError(response.status, "metrics stream unavailable");
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let pending = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      pending += decoder.decode(value, { stream: true });
      const lines = pending.split("\n");
      pending = lines.pop() ?? "";
      for (const line of lines) {
        if (line.trim() !== "") onRow(parseMetricRow(line));
      }
    }
    if (pending.trim() !== "") onRow(parseMetricRow(pending));
  }
}

/** Parse one CSV row of the fixed metrics schema. */
export function parseMetricRow(line: string): MetricRow {
  const parts = line.split(",");
  if (parts.length < 7) {
    throw new Error(`malformed metric row: ${line}`);
  }
  const optional = (text: string): number | null => (text === "" ? null : Number(text));
  return {
    batch_index: Number(parts[0]),
    inputs_seen: Number(parts[1]),
    queries_used: Number(parts[2]),
    known_classes: Number(parts[3]),
    monitor_precision: optional(parts[4]),
    network_precision: optional(parts[5]),
    event: parts.slice(6).join(","),
  };
}

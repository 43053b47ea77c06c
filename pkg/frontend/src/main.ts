// Dashboard wiring: poll /state and /queue, stream metrics, render.

import { ApiError, Client } from "./api.js";
import { lineChart } from "./charts.js";
import { MetricsModel, QueueModel } from "./model.js";
import { renderBudget, renderKnownClasses, renderQueue, renderStatus } from "./render.js";

const POLL_MS = 500;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

export function startDashboard(baseUrl: string): void {
  const client = new Client(baseUrl);
  const queueModel = new QueueModel();
  const metrics = new MetricsModel();
  let vocabulary: { id: number; name: string }[] = [];
  let haveSession = false;

  const submit = async (queryId: number, classId: number): Promise<void> => {
    queueModel.beginSubmit(queryId);
    redrawQueue();
    try {
      await client.label(queryId, classId);
      queueModel.confirmSubmit(queryId);
    } catch (error) {
      const message =
        error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
      queueModel.rollbackSubmit(queryId, message);
    }
    redrawQueue();
  };

  const redrawQueue = (): void => {
    renderQueue(el("queue"), queueModel, vocabulary, { submit });
  };

  const redrawCharts = (): void => {
    const markers = metrics.adaptationMarkers();
    el("chart-precision").innerHTML = lineChart(metrics.precisionSeries(), {
      width: 460,
      height: 220,
      title: "monitor precision per batch",
      yMax: 1,
      markers,
    });
    el("chart-queries").innerHTML = lineChart(metrics.queryRateSeries(), {
      width: 460,
      height: 220,
      title: "authority query rate per batch",
      markers,
    });
  };

  const poll = async (): Promise<void> => {
    try {
      const state = await client.state();
      haveSession = true;
      vocabulary = state.class_vocabulary;
      renderStatus(el("status"), state);
      renderKnownClasses(el("classes"), state);
      renderBudget(el("budget"), state);
      setControlsEnabled(true, state.run_state);
      queueModel.sync(await client.queue());
      redrawQueue();
    } catch {
      haveSession = false;
      setControlsEnabled(false, "no session");
      el("status").textContent = "no session loaded";
    }
  };

  const setControlsEnabled = (enabled: boolean, runState: string): void => {
    for (const action of ["pause", "resume", "step_batch"] as const) {
      const button = el(`control-${action}`) as HTMLButtonElement;
      button.disabled = !enabled;
      button.dataset.runState = runState;
    }
  };

  for (const action of ["pause", "resume", "step_batch"] as const) {
    el(`control-${action}`).addEventListener("click", async () => {
      if (!haveSession) return;
      try {
        await client.control(action);
      } catch (error) {
        el("status").textContent =
          error instanceof ApiError ? `control: ${error.message}` : String(error);
      }
      await poll();
    });
  }

  // metric stream with reconnect; duplicate rows are dropped by batch_index
  const consumeStream = async (): Promise<void> => {
    for (;;) {
      try {
        await client.streamMetrics((row) => {
          if (metrics.add(row)) redrawCharts();
        });
        return; // run finished and stream closed cleanly
      } catch {
        await new Promise((resolve) => setTimeout(resolve, 1000));
      }
    }
  };

  void poll();
  setInterval(() => void poll(), POLL_MS);
  void consumeStream();
  redrawCharts();
}

declare global {
  interface Window {
    startDashboard: typeof startDashboard;
  }
}

if (typeof window !== "undefined") {
  window.startDashboard = startDashboard;
}

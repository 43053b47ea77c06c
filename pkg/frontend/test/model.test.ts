import { describe, expect, it } from "vitest";

import { parseMetricRow, type QueueEntry } from "../src/api.js";
import { lineChart, markerCount } from "../src/charts.js";
import { budgetFraction, MetricsModel, QueueModel } from "../src/model.js";
import { parseTruthCsv } from "../src/driver.js";

function entry(queryId: number, inputIndex = queryId * 10): QueueEntry {
  return {
    query_id: queryId,
    input_index: inputIndex,
    width: 2,
    height: 2,
    channels: 1,
    pixels: [0, 0.5, 0.75, 1],
    predicted_class: 0,
    predicted_name: "blob0",
    confidence: 1.5,
    enqueued_at: inputIndex,
  };
}

describe("parseMetricRow", () => {
  it("parses a full row", () => {
    const row = parseMetricRow("3,512,26,2,0.9714285714,0.85,AdaptModel;AdaptMonitor");
    expect(row.batch_index).toBe(3);
    expect(row.inputs_seen).toBe(512);
    expect(row.queries_used).toBe(26);
    expect(row.known_classes).toBe(2);
    expect(row.monitor_precision).toBeCloseTo(0.9714285714, 9);
    expect(row.network_precision).toBeCloseTo(0.85, 9);
    expect(row.event).toBe("AdaptModel;AdaptMonitor");
  });

  it("maps empty optional fields to null", () => {
    const row = parseMetricRow("0,128,6,2,,,");
    expect(row.monitor_precision).toBeNull();
    expect(row.network_precision).toBeNull();
    expect(row.event).toBe("");
  });

  it("rejects malformed rows", () => {
    expect(() => parseMetricRow("1,2,3")).toThrow(/malformed/);
  });
});

describe("QueueModel", () => {
  it("optimistically removes a card and confirms it away", () => {
    const model = new QueueModel();
    model.sync([entry(1), entry(2)]);
    expect(model.visible().map((e) => e.query_id)).toEqual([1, 2]);

    expect(model.beginSubmit(1)?.query_id).toBe(1);
    expect(model.visible().map((e) => e.query_id)).toEqual([2]);

    model.confirmSubmit(1);
    model.sync([entry(2)]); // server no longer lists query 1
    expect(model.visible().map((e) => e.query_id)).toEqual([2]);
  });

  it("restores the card with a notice on rollback", () => {
    const model = new QueueModel();
    model.sync([entry(7)]);
    model.beginSubmit(7);
    expect(model.visible()).toHaveLength(0);

    model.rollbackSubmit(7, "409: already answered");
    expect(model.visible().map((e) => e.query_id)).toEqual([7]);
    expect(model.notice(7)).toBe("409: already answered");
  });

  it("keeps in-flight cards hidden when the server still lists them", () => {
    const model = new QueueModel();
    model.sync([entry(3)]);
    model.beginSubmit(3);
    model.sync([entry(3)]); // poll raced the label round-trip
    expect(model.visible()).toHaveLength(0);
    model.confirmSubmit(3);
    model.sync([]);
    expect(model.visible()).toHaveLength(0);
  });
});

describe("MetricsModel", () => {
  const rows = [
    "0,128,6,2,1,,",
    "1,256,12,2,1,,",
    "2,384,19,2,0.95,,AdaptModel",
    "3,512,26,3,0.9,,AdaptMonitor",
    "4,640,32,3,0.9,,AdaptModel;AdaptMonitor",
  ].map(parseMetricRow);

  it("deduplicates replayed rows by batch index", () => {
    const model = new MetricsModel();
    for (const row of rows) expect(model.add(row)).toBe(true);
    for (const row of rows) expect(model.add(row)).toBe(false); // reconnect replay
    expect(model.series()).toHaveLength(rows.length);
  });

  it("extracts adaptation markers by exact event kind", () => {
    const model = new MetricsModel();
    for (const row of rows) model.add(row);
    expect(model.adaptationMarkers()).toEqual([2, 4]);
    expect(model.adaptationMarkers("AdaptMonitor")).toEqual([3, 4]);
  });

  it("builds the precision and query-rate series", () => {
    const model = new MetricsModel();
    for (const row of rows) model.add(row);
    const precision = model.precisionSeries();
    expect(precision[0]).toEqual({ x: 0, y: 1 });
    const rate = model.queryRateSeries();
    expect(rate[0].y).toBeCloseTo(6 / 128, 12);
    expect(rate[1].y).toBeCloseTo(6 / 128, 12);
    expect(rate[2].y).toBeCloseTo(7 / 128, 12);
  });
});

describe("lineChart", () => {
  it("renders one marker line per adaptation batch", () => {
    const svg = lineChart(
      [
        { x: 0, y: 1 },
        { x: 5, y: 0.5 },
      ],
      { width: 400, height: 200, title: "t", yMax: 1, markers: [2, 4] },
    );
    expect(markerCount(svg)).toBe(2);
    expect(svg).toContain('data-marker="2"');
    expect(svg).toContain('data-marker="4"');
  });

  it("renders a flat line for a constant series", () => {
    const svg = lineChart(
      [
        { x: 0, y: 0.5 },
        { x: 1, y: 0.5 },
        { x: 2, y: 0.5 },
      ],
      { width: 400, height: 200, title: "flat", yMax: 1 },
    );
    const ys = [...svg.matchAll(/[ML]\d+(?:\.\d+)? (\d+(?:\.\d+)?)/g)].map((m) => m[1]);
    expect(new Set(ys).size).toBe(1);
  });

  it("shows an empty state without data", () => {
    const svg = lineChart([], { width: 400, height: 200, title: "empty" });
    expect(svg).toContain("no data yet");
  });
});

describe("budgetFraction", () => {
  it("clamps to [0, 1] and handles zero budgets", () => {
    expect(budgetFraction(5, 20)).toBeCloseTo(0.25, 12);
    expect(budgetFraction(30, 20)).toBe(1);
    expect(budgetFraction(0, 0)).toBeNull();
  });
});

describe("parseTruthCsv", () => {
  it("reads the serve --truth-out format", () => {
    const truth = parseTruthCsv("stream_index,true_class\n0,2\n1,0\n2,3\n");
    expect(truth.get(0)).toBe(2);
    expect(truth.get(2)).toBe(3);
    expect(truth.size).toBe(3);
  });

  it("rejects a wrong header", () => {
    expect(() => parseTruthCsv("index,label\n0,1\n")).toThrow(/header/);
  });
});

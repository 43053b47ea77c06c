// Dependency-free SVG line charts with adaptation markers. Pure string
// builders so the rendering is unit-testable without a DOM.

export interface Point {
  x: number;
  y: number;
}

export interface ChartOptions {
  width: number;
  height: number;
  title: string;
  yMax?: number; // default: data maximum
  markers?: number[]; // x positions flagged with a vertical marker line
}

const PAD = { left: 42, right: 12, top: 24, bottom: 22 };

function scale(
  points: Point[],
  options: ChartOptions,
): { sx: (x: number) => number; sy: (y: number) => number; xMax: number; yMax: number } {
  const xMax = Math.max(1, ...points.map((p) => p.x));
  const yMax = options.yMax ?? Math.max(1e-9, ...points.map((p) => p.y));
  const innerW = options.width - PAD.left - PAD.right;
  const innerH = options.height - PAD.top - PAD.bottom;
  return {
    sx: (x) => PAD.left + (x / xMax) * innerW,
    sy: (y) => PAD.top + innerH - (y / yMax) * innerH,
    xMax,
    yMax,
  };
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(3).replace(/0+$/, "").replace(/\.$/, "");
}

/** Render one line chart as an SVG string. */
export function lineChart(points: Point[], options: ChartOptions): string {
  const { width, height, title } = options;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="chart" role="img" aria-label="${title}">`,
    `<text x="${PAD.left}" y="14" class="chart-title">${title}</text>`,
  ];
  if (points.length === 0) {
    parts.push(
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="chart-empty">no data yet</text>`,
      "</svg>",
    );
    return parts.join("");
  }

  const { sx, sy, yMax } = scale(points, options);
  // axes
  const x0 = PAD.left;
  const yBottom = height - PAD.bottom;
  parts.push(
    `<line x1="${x0}" y1="${PAD.top}" x2="${x0}" y2="${yBottom}" class="axis"/>`,
    `<line x1="${x0}" y1="${yBottom}" x2="${width - PAD.right}" y2="${yBottom}" class="axis"/>`,
    `<text x="${x0 - 6}" y="${PAD.top + 4}" text-anchor="end" class="tick">${fmt(yMax)}</text>`,
    `<text x="${x0 - 6}" y="${yBottom}" text-anchor="end" class="tick">0</text>`,
  );

  for (const markerX of options.markers ?? []) {
    const mx = sx(markerX);
    parts.push(
      `<line x1="${mx}" y1="${PAD.top}" x2="${mx}" y2="${yBottom}" class="marker" data-marker="${markerX}"/>`,
    );
  }

  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${sx(p.x).toFixed(1)} ${sy(p.y).toFixed(1)}`)
    .join(" ");
  parts.push(`<path d="${path}" class="series" fill="none"/>`);
  parts.push("</svg>");
  return parts.join("");
}

/** Count the marker lines embedded in a rendered chart (test aid). */
export function markerCount(svg: string): number {
  return (svg.match(/data-marker="/g) ?? []).length;
}

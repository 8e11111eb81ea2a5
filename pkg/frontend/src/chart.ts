// Minimal SVG line chart for metric-over-n curves. No aggregation happens
// here; every plotted point is a number read from the service or a file.

const SVG = "http://www.w3.org/2000/svg";

export interface Series {
  name: string;
  className: string;
  points: Array<[number, number]>;
}

export interface ChartSpec {
  title: string;
  series: Series[];
  width?: number;
  height?: number;
}

export function lineChart(spec: ChartSpec): SVGSVGElement {
  const width = spec.width ?? 420;
  const height = spec.height ?? 240;
  const pad = { left: 36, right: 12, top: 24, bottom: 28 };
  const innerW = width - pad.left - pad.right;
  const innerH = height - pad.top - pad.bottom;

  const maxN = Math.max(1, ...spec.series.flatMap((s) => s.points.map(([n]) => n)));
  const x = (n: number) => pad.left + ((n - 1) / Math.max(1, maxN - 1)) * innerW;
  const y = (value: number) => pad.top + (1 - value) * innerH;

  const svg = document.createElementNS(SVG, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "metric-chart");
  svg.setAttribute("role", "img");

  const text = (content: string, tx: number, ty: number, cls: string) => {
    const node = document.createElementNS(SVG, "text");
    node.setAttribute("x", String(tx));
    node.setAttribute("y", String(ty));
    node.setAttribute("class", cls);
    node.textContent = content;
    svg.append(node);
  };

  text(spec.title, pad.left, 14, "chart-title");

  for (const tick of [0, 0.25, 0.5, 0.75, 1]) {
    const line = document.createElementNS(SVG, "line");
    line.setAttribute("x1", String(pad.left));
    line.setAttribute("x2", String(width - pad.right));
    line.setAttribute("y1", String(y(tick)));
    line.setAttribute("y2", String(y(tick)));
    line.setAttribute("class", "gridline");
    svg.append(line);
    text(tick.toFixed(2), 2, y(tick) + 3, "tick");
  }
  for (let n = 1; n <= maxN; n += Math.ceil(maxN / 10)) {
    text(String(n), x(n) - 3, height - 10, "tick");
  }
  text("n", width - pad.right - 8, height - 10, "tick");

  for (const series of spec.series) {
    const sorted = [...series.points].sort((a, b) => a[0] - b[0]);
    const path = document.createElementNS(SVG, "path");
    path.setAttribute(
      "d",
      sorted
        .map(([n, value], i) => `${i === 0 ? "M" : "L"}${x(n).toFixed(1)},${y(value).toFixed(1)}`)
        .join(" "),
    );
    path.setAttribute("class", `series ${series.className}`);
    path.setAttribute("fill", "none");
    path.setAttribute("data-series", series.name);
    svg.append(path);
  }

  return svg;
}

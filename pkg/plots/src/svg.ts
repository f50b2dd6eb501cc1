// Small SVG string builders. The figures are static documents, so plain
// string assembly beats pulling in a DOM shim.

import { ticks } from "d3-array";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tag(
  name: string,
  attrs: Record<string, string | number>,
  body = "",
): string {
  const a = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : esc(v)}"`)
    .join(" ");
  return body === "" && name !== "text"
    ? `<${name} ${a}/>`
    : `<${name} ${a}>${body}</${name}>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  attrs: Record<string, string | number> = {},
): string {
  return tag("text", { x, y, "font-size": 12, fill: "#222", ...attrs }, esc(content));
}

/** Trim float noise in attribute values and tick labels. */
export function fmt(v: number): string {
  return String(Number(v.toPrecision(6)));
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const f = ((v: number) => r0 + ((v - d0) / (d1 - d0)) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

export function xAxis(scale: Scale, yPix: number, label: string, nTicks = 6): string {
  const parts: string[] = [];
  const [lo, hi] = scale.domain;
  parts.push(tag("line", { x1: scale(lo), x2: scale(hi), y1: yPix, y2: yPix, stroke: "#222" }));
  for (const v of ticks(lo, hi, nTicks)) {
    const px = scale(v);
    parts.push(tag("line", { x1: px, x2: px, y1: yPix, y2: yPix + 5, stroke: "#222" }));
    parts.push(text(px, yPix + 18, fmt(v), { "text-anchor": "middle" }));
  }
  const mid = (scale(lo) + scale(hi)) / 2;
  parts.push(text(mid, yPix + 36, label, { "text-anchor": "middle", "font-size": 13 }));
  return parts.join("\n");
}

export function yAxis(scale: Scale, xPix: number, label: string, nTicks = 6): string {
  const parts: string[] = [];
  const [lo, hi] = scale.domain;
  parts.push(tag("line", { x1: xPix, x2: xPix, y1: scale(lo), y2: scale(hi), stroke: "#222" }));
  for (const v of ticks(lo, hi, nTicks)) {
    const py = scale(v);
    parts.push(tag("line", { x1: xPix - 5, x2: xPix, y1: py, y2: py, stroke: "#222" }));
    parts.push(text(xPix - 8, py + 4, fmt(v), { "text-anchor": "end" }));
  }
  const midY = (scale(lo) + scale(hi)) / 2;
  parts.push(
    tag(
      "text",
      {
        x: xPix - 42,
        y: midY,
        "font-size": 13,
        fill: "#222",
        "text-anchor": "middle",
        transform: `rotate(-90 ${fmt(xPix - 42)} ${fmt(midY)})`,
      },
      esc(label),
    ),
  );
  return parts.join("\n");
}

export function polyline(
  xs: number[],
  ys: number[],
  xScale: Scale,
  yScale: Scale,
  stroke: string,
  dash = "",
): string {
  const d = xs
    .map((x, i) => `${i === 0 ? "M" : "L"}${fmt(xScale(x))},${fmt(yScale(ys[i]))}`)
    .join("");
  const attrs: Record<string, string | number> = {
    d,
    fill: "none",
    stroke,
    "stroke-width": 1.6,
  };
  if (dash) attrs["stroke-dasharray"] = dash;
  return tag("path", attrs);
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}

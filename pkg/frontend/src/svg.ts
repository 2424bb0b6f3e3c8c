/** Deterministic SVG assembly: fixed formatting, no timestamps, no RNG. */

export interface Extent {
  min: number;
  max: number;
}

export type Scale = "linear" | "log";

export class AxisError extends Error {}

/** Fixed-precision number formatting so reruns are byte-identical. */
export function fmt(v: number): string {
  if (v === 0) return "0";
  const s = v.toPrecision(8);
  return s.includes(".") ? s.replace(/\.?0+$/, "").replace(/\.?0+e/, "e") : s;
}

export interface Mapper {
  (v: number): number;
  scale: Scale;
  extent: Extent;
}

export function makeMapper(
  values: number[],
  scale: Scale,
  pixelLo: number,
  pixelHi: number,
  label: string,
): Mapper {
  if (values.length === 0) throw new AxisError(`no data for ${label} axis`);
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (scale === "log") {
    if (lo <= 0) {
      throw new AxisError(
        `log ${label} axis requires positive data; minimum is ${fmt(lo)}`,
      );
    }
    lo = Math.log10(lo);
    hi = Math.log10(hi);
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  lo -= 0.05 * span;
  hi += 0.05 * span;
  const f = ((v: number) => {
    const t = scale === "log" ? Math.log10(v) : v;
    return pixelLo + ((t - lo) / (hi - lo)) * (pixelHi - pixelLo);
  }) as Mapper;
  f.scale = scale;
  f.extent = { min: lo, max: hi };
  return f;
}

export function ticks(extent: Extent, scale: Scale, count = 6): number[] {
  if (scale === "log") {
    const out: number[] = [];
    for (let e = Math.ceil(extent.min); e <= Math.floor(extent.max); e++) {
      out.push(Math.pow(10, e));
    }
    return out.length >= 2 ? out : [Math.pow(10, extent.min), Math.pow(10, extent.max)];
  }
  const span = extent.max - extent.min;
  const step = niceStep(span / count);
  const start = Math.ceil(extent.min / step) * step;
  const out: number[] = [];
  for (let v = start; v <= extent.max + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  if (norm < 1.5) return mag;
  if (norm < 3.5) return 2 * mag;
  if (norm < 7.5) return 5 * mag;
  return 10 * mag;
}

export const WIDTH = 640;
export const HEIGHT = 440;
export const MARGIN = { left: 72, right: 24, top: 36, bottom: 56 };

export const SERIES_COLORS = ["#1f6fb2", "#d1495b", "#3a7d44", "#8e6c8a", "#c98a2b"];

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width = WIDTH, readonly height = HEIGHT) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  raw(s: string) {
    this.parts.push(s);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke = "#222", width = 1, dash = "") {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  polyline(points: Array<[number, number]>, stroke: string, width = 1.5, dash = "") {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"${d}/>`,
    );
  }

  circle(x: number, y: number, r: number, fill: string) {
    this.parts.push(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"/>`);
  }

  rect(x: number, y: number, w: number, h: number, fill: string) {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"/>`,
    );
  }

  text(x: number, y: number, s: string, opts: { anchor?: string; size?: number; rotate?: boolean } = {}) {
    const anchor = opts.anchor ?? "middle";
    const size = opts.size ?? 12;
    const rot = opts.rotate ? ` transform="rotate(-90 ${fmt(x)} ${fmt(y)})"` : "";
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}"${rot}>` +
        `${escapeXml(s)}</text>`,
    );
  }

  axes(xm: Mapper, ym: Mapper, xlabel: string, ylabel: string) {
    const { left, right, top, bottom } = MARGIN;
    const x0 = left, x1 = this.width - right;
    const y0 = this.height - bottom, y1 = top;
    this.line(x0, y0, x1, y0);
    this.line(x0, y0, x0, y1);
    for (const t of ticks(xm.extent, xm.scale)) {
      const px = xm(t);
      if (px < x0 - 0.5 || px > x1 + 0.5) continue;
      this.line(px, y0, px, y0 + 5);
      this.text(px, y0 + 20, tickLabel(t, xm.scale), { size: 11 });
    }
    for (const t of ticks(ym.extent, ym.scale)) {
      const py = ym(t);
      if (py > y0 + 0.5 || py < y1 - 0.5) continue;
      this.line(x0 - 5, py, x0, py);
      this.text(x0 - 9, py + 4, tickLabel(t, ym.scale), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, this.height - 14, xlabel);
    this.text(18, (y0 + y1) / 2, ylabel, { rotate: true });
  }

  title(s: string) {
    this.text(this.width / 2, 22, s, { size: 14 });
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

function tickLabel(v: number, scale: Scale): string {
  if (scale === "log") {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return fmt(Math.round(v * 1e9) / 1e9);
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

/**
 * Failure-rate figure: one log-log curve per decoding scheme with 99% CI
 * error bars, a dashed least-squares fit per curve, and the x=y reference
 * line.  `buildFigure` is a pure function of the parsed CSV rows; rendering
 * only turns the model into pixels.
 */

import { ResultRow, SchemaError, schemeNames } from "./csv.js";
import { Color, GRAY, Raster, BLACK } from "./raster.js";
import { FitResult, formatG12, loglogFit } from "./stats.js";

export type Marker = "diamond" | "triangle" | "star" | "square";

export interface SeriesPoint {
  p: number;
  rate: number;
  ciLow: number;
  ciHigh: number;
}

export interface Series {
  scheme: string;
  marker: Marker;
  color: Color;
  points: SeriesPoint[];
  fit: FitResult;
}

export interface FigureModel {
  series: Series[];
  xRange: readonly [number, number];
  yRange: readonly [number, number];
}

export interface FigureOptions {
  schemes?: string[];
  xRange?: readonly [number, number];
  yRange?: readonly [number, number];
}

const MARKER_BY_SCHEME: Record<string, Marker> = {
  "standard-1-round": "diamond",
  "standard-3-rounds": "triangle",
  "fast-1-round": "star",
};

const COLOR_BY_MARKER: Record<Marker, Color> = {
  star: [205, 40, 70],
  triangle: [40, 95, 200],
  diamond: [30, 130, 95],
  square: [110, 110, 110],
};

export function markerFor(scheme: string): Marker {
  return MARKER_BY_SCHEME[scheme] ?? "square";
}

function padLog(lo: number, hi: number, factor: number): [number, number] {
  return [lo / factor, hi * factor];
}

export function buildFigure(
  rows: ResultRow[],
  options: FigureOptions = {}
): FigureModel {
  const wanted = options.schemes ?? schemeNames(rows);
  const series: Series[] = [];
  for (const scheme of wanted) {
    const mine = rows.filter((r) => r.scheme === scheme);
    if (mine.length === 0) {
      throw new SchemaError(`no rows for scheme "${scheme}"`);
    }
    mine.sort((a, b) => a.p - b.p);
    series.push({
      scheme,
      marker: markerFor(scheme),
      color: COLOR_BY_MARKER[markerFor(scheme)],
      points: mine.map((r) => ({
        p: r.p,
        rate: r.rate,
        ciLow: r.ci_low,
        ciHigh: r.ci_high,
      })),
      fit: loglogFit(mine),
    });
  }

  const xs = series.flatMap((s) => s.points.map((pt) => pt.p));
  // log axes can only hold positive values; zero-failure rates and the
  // lower CI end of an empty tally sit on the axis floor instead
  const ys = series.flatMap((s) =>
    s.points.flatMap((pt) =>
      [pt.rate, pt.ciLow, pt.ciHigh].filter((v) => v > 0)
    )
  );
  const xRange =
    options.xRange ?? padLog(Math.min(...xs), Math.max(...xs), 1.35);
  // include the x extent so the x=y reference crosses the whole panel
  const yRange =
    options.yRange ??
    padLog(
      Math.min(...(ys.length ? ys : xs), xRange[0]),
      Math.max(...(ys.length ? ys : xs), xRange[1]),
      1.5
    );
  return { series, xRange, yRange };
}

/** One printed line per scheme; the numbers come from loglogFit verbatim. */
export function fitSummaryLines(model: FigureModel): string[] {
  return model.series.map((s) =>
    s.fit.insufficient
      ? `${s.scheme}: slope insufficient data`
      : `${s.scheme}: slope ${formatG12(s.fit.slope)}`
  );
}

// ---------------------------------------------------------------------------
// pixel work
// ---------------------------------------------------------------------------

interface Frame {
  left: number;
  top: number;
  width: number;
  height: number;
  xRange: readonly [number, number];
  yRange: readonly [number, number];
}

function xPix(f: Frame, p: number): number {
  const [lo, hi] = f.xRange;
  return f.left + ((Math.log(p) - Math.log(lo)) / (Math.log(hi) - Math.log(lo))) * f.width;
}

function yPix(f: Frame, v: number): number {
  const [lo, hi] = f.yRange;
  const t = (Math.log(v) - Math.log(lo)) / (Math.log(hi) - Math.log(lo));
  return f.top + (1 - t) * f.height;
}

/** Liang-Barsky clip of a segment to the frame rectangle. */
function clipSegment(
  f: Frame,
  x0: number,
  y0: number,
  x1: number,
  y1: number
): [number, number, number, number] | null {
  let t0 = 0;
  let t1 = 1;
  const dx = x1 - x0;
  const dy = y1 - y0;
  const edges: Array<[number, number]> = [
    [-dx, x0 - f.left],
    [dx, f.left + f.width - x0],
    [-dy, y0 - f.top],
    [dy, f.top + f.height - y0],
  ];
  for (const [den, num] of edges) {
    if (den === 0) {
      if (num < 0) return null;
      continue;
    }
    const t = num / den;
    if (den < 0) {
      if (t > t1) return null;
      if (t > t0) t0 = t;
    } else {
      if (t < t0) return null;
      if (t < t1) t1 = t;
    }
  }
  return [x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy];
}

function decadeTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let k = Math.ceil(Math.log10(lo) - 1e-9); 10 ** k <= hi * (1 + 1e-9); k++) {
    out.push(10 ** k);
  }
  return out;
}

function minorTicks(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let k = Math.floor(Math.log10(lo)); 10 ** k <= hi; k++) {
    for (let m = 2; m <= 9; m++) {
      const v = m * 10 ** k;
      if (v >= lo && v <= hi) out.push(v);
    }
  }
  return out;
}

function tickLabel(v: number): string {
  const k = Math.round(Math.log10(v));
  return `1e${k}`;
}

function drawMarker(
  r: Raster,
  marker: Marker,
  x: number,
  y: number,
  size: number,
  color: Color
): void {
  const s = size;
  if (marker === "diamond") {
    r.polygon([[x, y - s], [x + s, y], [x, y + s], [x - s, y]], color);
  } else if (marker === "triangle") {
    r.polygon([[x, y - s], [x + s, y + s], [x - s, y + s]], color);
  } else if (marker === "star") {
    const points: [number, number][] = [];
    for (let i = 0; i < 10; i++) {
      const radius = i % 2 === 0 ? s * 1.45 : s * 0.58;
      const angle = -Math.PI / 2 + (i * Math.PI) / 5;
      points.push([x + radius * Math.cos(angle), y + radius * Math.sin(angle)]);
    }
    r.polygon(points, color);
  } else {
    r.polygon([[x - s, y - s], [x + s, y - s], [x + s, y + s], [x - s, y + s]], color);
  }
}

export function renderFigure(
  model: FigureModel,
  width = 900,
  height = 640
): Raster {
  const r = new Raster(width, height);
  const f: Frame = {
    left: 64,
    top: 18,
    width: width - 64 - 18,
    height: height - 18 - 56,
    xRange: model.xRange,
    yRange: model.yRange,
  };
  const bottom = f.top + f.height;
  const right = f.left + f.width;

  // frame and ticks
  r.line(f.left, f.top, f.left, bottom, BLACK);
  r.line(f.left, bottom, right, bottom, BLACK);
  r.line(f.left, f.top, right, f.top, GRAY);
  r.line(right, f.top, right, bottom, GRAY);
  for (const v of minorTicks(...f.xRange)) {
    r.line(xPix(f, v), bottom, xPix(f, v), bottom + 3, BLACK);
  }
  for (const v of decadeTicks(...f.xRange)) {
    const x = xPix(f, v);
    r.line(x, bottom, x, bottom + 6, BLACK);
    r.text(x - Raster.textWidth(tickLabel(v)) / 2, bottom + 9, tickLabel(v), BLACK);
  }
  for (const v of minorTicks(...f.yRange)) {
    r.line(f.left - 3, yPix(f, v), f.left, yPix(f, v), BLACK);
  }
  for (const v of decadeTicks(...f.yRange)) {
    const y = yPix(f, v);
    r.line(f.left - 6, y, f.left, y, BLACK);
    r.text(f.left - 9 - Raster.textWidth(tickLabel(v)), y - 3, tickLabel(v), BLACK);
  }
  r.text(
    f.left + f.width / 2 - Raster.textWidth("physical error rate", 2) / 2,
    bottom + 26,
    "physical error rate",
    BLACK,
    2
  );
  r.text(4, 4, "logical failure rate", BLACK, 2);

  // x=y pseudothreshold reference
  const lo = Math.max(f.xRange[0], f.yRange[0]);
  const hi = Math.min(f.xRange[1], f.yRange[1]);
  if (lo < hi) {
    r.line(xPix(f, lo), yPix(f, lo), xPix(f, hi), yPix(f, hi), GRAY);
    r.text(xPix(f, hi) - 24, yPix(f, hi) + 6, "x=y", GRAY);
  }

  for (const s of model.series) {
    // dashed fit line across the panel
    if (!s.fit.insufficient) {
      const rate = (p: number) =>
        Math.exp(s.fit.intercept + s.fit.slope * Math.log(p));
      const seg = clipSegment(
        f,
        xPix(f, f.xRange[0]),
        yPix(f, rate(f.xRange[0])),
        xPix(f, f.xRange[1]),
        yPix(f, rate(f.xRange[1]))
      );
      if (seg) r.line(seg[0], seg[1], seg[2], seg[3], s.color, [6, 5]);
    }
    const drawable = s.points.filter((pt) => pt.rate > 0);
    for (let i = 0; i + 1 < drawable.length; i++) {
      r.line(
        xPix(f, drawable[i].p),
        yPix(f, drawable[i].rate),
        xPix(f, drawable[i + 1].p),
        yPix(f, drawable[i + 1].rate),
        s.color
      );
    }
    for (const pt of drawable) {
      const x = xPix(f, pt.p);
      // an empty tally has ciLow = 0, which a log axis cannot hold; the
      // bar is drawn down to the panel floor instead
      const yLo = yPix(f, Math.max(pt.ciLow, f.yRange[0]));
      const yHi = yPix(f, Math.min(Math.max(pt.ciHigh, f.yRange[0]), f.yRange[1]));
      r.line(x, yLo, x, yHi, s.color);
      r.line(x - 3, yLo, x + 3, yLo, s.color);
      r.line(x - 3, yHi, x + 3, yHi, s.color);
      drawMarker(r, s.marker, x, yPix(f, pt.rate), 5, s.color);
    }
  }

  // legend, top left inside the panel
  let ly = f.top + 10;
  for (const s of model.series) {
    drawMarker(r, s.marker, f.left + 18, ly + 5, 5, s.color);
    r.text(f.left + 30, ly, s.scheme, BLACK, 2);
    ly += 20;
  }
  return r;
}

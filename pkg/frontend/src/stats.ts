/**
 * Log-log least squares, kept step-for-step identical to the Python
 * implementation in qsurgery.montecarlo.loglog_fit so the printed slopes
 * agree to within accumulated rounding (well under 1e-9).
 */

export interface FitResult {
  slope: number;
  intercept: number;
  insufficient: boolean;
}

export interface FitPoint {
  p: number;
  rate: number;
  failures: number;
}

/**
 * Least squares of log(rate) against log(p) over nonzero-failure points:
 * slope = sum((x - mx)(y - my)) / sum((x - mx)^2), intercept = my - slope*mx.
 * Fewer than two usable points, or a degenerate p grid, is flagged
 * insufficient with NaN coefficients.
 */
export function loglogFit(points: FitPoint[]): FitResult {
  const usable = points.filter((pt) => pt.failures > 0);
  if (usable.length < 2) {
    return { slope: NaN, intercept: NaN, insufficient: true };
  }
  const xs = usable.map((pt) => Math.log(pt.p));
  const ys = usable.map((pt) => Math.log(pt.rate));
  const mx = xs.reduce((a, b) => a + b, 0) / xs.length;
  const my = ys.reduce((a, b) => a + b, 0) / ys.length;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < xs.length; i++) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx === 0) {
    return { slope: NaN, intercept: NaN, insufficient: true };
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx, insufficient: false };
}

/** Shortest decimal form with 12 significant digits, like printf %.12g. */
export function formatG12(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  return String(Number(x.toPrecision(12)));
}

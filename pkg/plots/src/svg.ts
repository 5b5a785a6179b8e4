/** Minimal deterministic SVG line/scatter chart, log or linear y. */

export interface Series {
  points: [number, number][];
  color: string;
  width: number;
  dash?: string;
  label?: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  series: Series[];
  markers?: { points: [number, number][]; color: string; radius: number };
}

const W = 820;
const H = 520;
const M = { left: 70, right: 170, top: 40, bottom: 50 };

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

export function renderChart(spec: ChartSpec): string {
  const xs: number[] = [];
  const ys: number[] = [];
  const collect = (pts: [number, number][]) => {
    for (const [x, y] of pts) {
      xs.push(x);
      ys.push(spec.logY ? Math.log10(y) : y);
    }
  };
  spec.series.forEach((s) => collect(s.points));
  if (spec.markers) collect(spec.markers.points);
  if (xs.length === 0) throw new Error('nothing to plot');
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const sx = (x: number) => M.left + ((x - x0) / (x1 - x0)) * (W - M.left - M.right);
  const sy = (yRaw: number) => {
    const y = spec.logY ? Math.log10(yRaw) : yRaw;
    return H - M.bottom - ((y - y0) / (y1 - y0)) * (H - M.top - M.bottom);
  };

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`);
  parts.push(`<rect width="${W}" height="${H}" fill="white"/>`);
  parts.push(`<text x="${W / 2}" y="22" text-anchor="middle" font-size="16" font-family="sans-serif">${spec.title}</text>`);
  // axes
  parts.push(`<line x1="${M.left}" y1="${H - M.bottom}" x2="${W - M.right}" y2="${H - M.bottom}" stroke="black"/>`);
  parts.push(`<line x1="${M.left}" y1="${M.top}" x2="${M.left}" y2="${H - M.bottom}" stroke="black"/>`);
  parts.push(`<text x="${(W - M.right + M.left) / 2}" y="${H - 12}" text-anchor="middle" font-size="13" font-family="sans-serif">${spec.xLabel}</text>`);
  parts.push(`<text x="18" y="${(H - M.bottom + M.top) / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 18 ${(H - M.bottom + M.top) / 2})">${spec.yLabel}</text>`);
  // four ticks per axis
  for (let t = 0; t <= 3; t++) {
    const fx = x0 + ((x1 - x0) * t) / 3;
    const px = sx(fx);
    parts.push(`<line x1="${px}" y1="${H - M.bottom}" x2="${px}" y2="${H - M.bottom + 5}" stroke="black"/>`);
    parts.push(`<text x="${px}" y="${H - M.bottom + 20}" text-anchor="middle" font-size="11" font-family="sans-serif">${fx.toPrecision(3)}</text>`);
    const fy = y0 + ((y1 - y0) * t) / 3;
    const py = H - M.bottom - ((fy - y0) / (y1 - y0)) * (H - M.top - M.bottom);
    const label = spec.logY ? `1e${fy.toPrecision(3)}` : fy.toPrecision(3);
    parts.push(`<line x1="${M.left - 5}" y1="${py}" x2="${M.left}" y2="${py}" stroke="black"/>`);
    parts.push(`<text x="${M.left - 8}" y="${py + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${label}</text>`);
  }
  // series
  for (const s of spec.series) {
    if (s.points.length === 0) continue;
    const d = s.points
      .map(([x, y], i) => `${i === 0 ? 'M' : 'L'}${sx(x).toFixed(2)},${sy(y).toFixed(2)}`)
      .join(' ');
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : '';
    parts.push(`<path d="${d}" fill="none" stroke="${s.color}" stroke-width="${s.width}"${dash}/>`);
  }
  if (spec.markers) {
    for (const [x, y] of spec.markers.points) {
      parts.push(`<circle cx="${sx(x).toFixed(2)}" cy="${sy(y).toFixed(2)}" r="${spec.markers.radius}" fill="${spec.markers.color}"/>`);
    }
  }
  // legend for labelled series
  let ly = M.top + 10;
  for (const s of spec.series) {
    if (!s.label) continue;
    parts.push(`<line x1="${W - M.right + 12}" y1="${ly}" x2="${W - M.right + 40}" y2="${ly}" stroke="${s.color}" stroke-width="${s.width}"${s.dash ? ` stroke-dasharray="${s.dash}"` : ''}/>`);
    parts.push(`<text x="${W - M.right + 46}" y="${ly + 4}" font-size="12" font-family="sans-serif">${s.label}</text>`);
    ly += 20;
  }
  parts.push('</svg>');
  return parts.join('\n') + '\n';
}

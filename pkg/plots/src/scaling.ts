import { writeFileSync } from 'fs';
import { readTable } from './csv.js';
import { renderChart } from './svg.js';

export interface ScalingFit {
  /** least-squares coefficient of rounds = c * L / ln L */
  c: number;
  /** RMS residual relative to the mean observed rounds */
  residual: number;
  /** true when there are too few rows for a meaningful fit */
  degenerate: boolean;
  rows: { L: number; rounds: number }[];
}

export const ROUNDS_COLUMN = 'rounds_to_zero_median';

export function fitScaling(rows: { L: number; rounds: number }[]): ScalingFit {
  if (rows.length === 0) throw new Error('no rows to fit');
  for (const r of rows) {
    if (!Number.isFinite(r.L) || !Number.isFinite(r.rounds)) {
      throw new Error(`non-numeric scaling row: L=${r.L}, rounds=${r.rounds}`);
    }
    if (r.L <= 1) throw new Error(`L must exceed 1, got ${r.L}`);
  }
  const g = (L: number) => L / Math.log(L);
  let num = 0;
  let den = 0;
  for (const r of rows) {
    num += r.rounds * g(r.L);
    den += g(r.L) * g(r.L);
  }
  const c = num / den;
  const meanAbs = rows.reduce((a, r) => a + Math.abs(r.rounds), 0) / rows.length;
  const sq = rows.reduce((a, r) => a + (r.rounds - c * g(r.L)) ** 2, 0);
  const residual = Math.sqrt(sq / rows.length) / (meanAbs || 1);
  return { c, residual, degenerate: rows.length < 3, rows };
}

export function plotScaling(sweepPath: string, outPath: string): ScalingFit {
  const table = readTable(sweepPath, ['L', ROUNDS_COLUMN]);
  const rows = table.rows.map((r) => ({ L: r['L'], rounds: r[ROUNDS_COLUMN] }));
  const fit = fitScaling(rows);
  const lMin = Math.min(...rows.map((r) => r.L));
  const lMax = Math.max(...rows.map((r) => r.L));
  const curve: [number, number][] = [];
  for (let i = 0; i <= 60; i++) {
    const L = lMin + ((lMax - lMin) * i) / 60;
    if (L > 1) curve.push([L, (fit.c * L) / Math.log(L)]);
  }
  const svg = renderChart({
    title: 'Rounds to zero cost vs tier magnitude L',
    xLabel: 'L',
    yLabel: 'median rounds to zero',
    logY: false,
    series: [
      {
        points: curve,
        color: '#de2d26',
        width: 1.5,
        dash: '6,4',
        label: `fit ${fit.c.toFixed(3)} * L/ln L${fit.degenerate ? ' (degenerate)' : ''}`,
      },
    ],
    markers: { points: rows.map((r) => [r.L, r.rounds]), color: '#08519c', radius: 4 },
  });
  writeFileSync(outPath, svg);
  console.log(
    `fit c=${fit.c.toPrecision(6)} residual=${fit.residual.toPrecision(4)} ` +
      `degenerate=${fit.degenerate}`,
  );
  return fit;
}

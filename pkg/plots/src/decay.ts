import { writeFileSync } from 'fs';
import { readTrace, TraceFrame } from './csv.js';
import { renderChart, Series } from './svg.js';

export interface DecayCurves {
  /** rounds of the common positive support across all replicates */
  rounds: number[];
  /** geometric mean of phi_u per round over that support */
  mean: number[];
  /** per-replicate (round, phi_u) series, positive prefix only */
  replicates: [number, number][][];
  /** (49/50)^t reference anchored at the first mean value */
  reference: [number, number][];
}

const DECAY_FACTOR = 49 / 50;

/** Positive prefix of a replicate's unsettled-cost column. */
function positivePrefix(frame: TraceFrame): [number, number][] {
  const out: [number, number][] = [];
  for (const row of frame.rows) {
    if (!(row.phiU > 0)) break;
    out.push([row.round, row.phiU]);
  }
  return out;
}

export function computeDecay(frames: TraceFrame[]): DecayCurves {
  if (frames.length === 0) throw new Error('need at least one trace');
  const replicates = frames.map(positivePrefix);
  const live = replicates.filter((r) => r.length > 0);
  if (live.length === 0) {
    throw new Error('no positive unsettled-cost entries in any trace');
  }
  // the mean curve runs over rounds present (and positive) in every replicate,
  // which keeps it monotone whenever each replicate is monotone
  const common = Math.min(...live.map((r) => r.length));
  const rounds: number[] = [];
  const mean: number[] = [];
  for (let i = 0; i < common; i++) {
    rounds.push(live[0][i][0]);
    const logSum = live.reduce((acc, r) => acc + Math.log(r[i][1]), 0);
    mean.push(Math.exp(logSum / live.length));
  }
  const reference: [number, number][] = rounds.map((r, i) => [
    r,
    mean[0] * Math.pow(DECAY_FACTOR, r - rounds[0]),
  ]);
  return { rounds, mean, replicates: live, reference };
}

export function plotDecay(tracePaths: string[], outPath: string): DecayCurves {
  const frames = tracePaths.map(readTrace);
  const curves = computeDecay(frames);
  const series: Series[] = curves.replicates.map((pts) => ({
    points: pts,
    color: '#9ecae1',
    width: 0.8,
  }));
  series.push({
    points: curves.rounds.map((r, i) => [r, curves.mean[i]]),
    color: '#08519c',
    width: 2.5,
    label: 'geometric mean',
  });
  series.push({
    points: curves.reference,
    color: '#de2d26',
    width: 1.5,
    dash: '6,4',
    label: '(49/50)^t reference',
  });
  const svg = renderChart({
    title: `Unsettled-cost decay (${curves.replicates.length} replicates)`,
    xLabel: 'sampling round',
    yLabel: 'unsettled cost',
    logY: true,
    series,
  });
  writeFileSync(outPath, svg);
  return curves;
}

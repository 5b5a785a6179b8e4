import { mkdtempSync, writeFileSync, existsSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { describe, expect, it } from 'vitest';
import { SchemaError, readTable } from '../src/csv.js';
import { fitScaling, plotScaling } from '../src/scaling.js';
import { run } from '../src/cli.js';

const HEADER = 'L,replicates,rounds_to_zero_median,gamma';

function writeSweep(rows: [number, number][]): string {
  const dir = mkdtempSync(join(tmpdir(), 'sweep-'));
  const path = join(dir, 'sweep.csv');
  const lines = [HEADER];
  for (const [L, rounds] of rows) {
    lines.push(`${L},100,${rounds},nan`);
  }
  writeFileSync(path, lines.join('\n') + '\n');
  return path;
}

describe('scaling fit', () => {
  it('recovers an exact c * L / ln L law with near-zero residual', () => {
    const c = 2.5;
    const rows: [number, number][] = [4, 8, 16, 32, 64].map((L) => [
      L,
      (c * L) / Math.log(L),
    ]);
    const path = writeSweep(rows);
    const out = join(mkdtempSync(join(tmpdir(), 'img-')), 'scaling.svg');
    const fit = plotScaling(path, out);
    expect(existsSync(out)).toBe(true);
    expect(fit.degenerate).toBe(false);
    expect(Math.abs(fit.c - c)).toBeLessThan(1e-9);
    expect(fit.residual).toBeLessThan(1e-9);
  });

  it('flags a two-point fit as degenerate', () => {
    const path = writeSweep([[4, 3], [8, 4]]);
    const out = join(mkdtempSync(join(tmpdir(), 'img-')), 'deg.svg');
    const fit = plotScaling(path, out);
    expect(fit.degenerate).toBe(true);
    expect(existsSync(out)).toBe(true);
  });

  it('rejects non-numeric rounds', () => {
    const dir = mkdtempSync(join(tmpdir(), 'sweep-'));
    const path = join(dir, 'bad.csv');
    writeFileSync(path, HEADER + '\n4,100,three,nan\n');
    expect(() => readTable(path, ['L', 'rounds_to_zero_median'])).toThrow(SchemaError);
    expect(run(['scaling', '--in', path, '--out', join(dir, 'o.svg')])).toBe(1);
  });

  it('rejects missing columns', () => {
    const dir = mkdtempSync(join(tmpdir(), 'sweep-'));
    const path = join(dir, 'miss.csv');
    writeFileSync(path, 'L,final_cost_mean\n4,0.5\n');
    expect(run(['scaling', '--in', path, '--out', join(dir, 'o.svg')])).toBe(1);
  });

  it('rejects nan medians (cells that never reached zero)', () => {
    const dir = mkdtempSync(join(tmpdir(), 'sweep-'));
    const path = join(dir, 'nan.csv');
    writeFileSync(path, HEADER + '\n4,100,nan,nan\n');
    expect(run(['scaling', '--in', path, '--out', join(dir, 'o.svg')])).toBe(1);
  });

  it('fit floors at L > 1', () => {
    expect(() => fitScaling([{ L: 1.0, rounds: 2 }])).toThrow();
  });
});

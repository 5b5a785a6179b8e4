import { readFileSync } from 'fs';

/** Documented header of per-round trace files emitted by the runner. */
export const TRACE_HEADER =
  'round,centers,added,phi_x,phi_u,k_unsettled,alpha,heavy_count,massive_count';

export interface TraceRow {
  round: number;
  centers: number;
  added: number;
  phiX: number;
  phiU: number;
  kUnsettled: number;
  alpha: number;
  heavyCount: number;
  massiveCount: number;
}

/** Parsed rows of one trace file. */
export interface TraceFrame {
  path: string;
  rows: TraceRow[];
}

export class SchemaError extends Error {}

function splitLines(text: string): string[] {
  return text.split('\n').map((l) => l.trim()).filter((l) => l.length > 0);
}

function num(token: string, path: string, line: number, column: string): number {
  const v = Number(token);
  if (token === '' || (Number.isNaN(v) && token !== 'nan')) {
    throw new SchemaError(`${path}:${line}: non-numeric ${column} value ${JSON.stringify(token)}`);
  }
  return v;
}

/** Parse one trace file; the header must match the documented schema exactly. */
export function readTrace(path: string): TraceFrame {
  const lines = splitLines(readFileSync(path, 'utf8'));
  if (lines.length === 0 || lines[0] !== TRACE_HEADER) {
    throw new SchemaError(`${path}: expected trace header "${TRACE_HEADER}"`);
  }
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== 9) {
      throw new SchemaError(`${path}:${i + 1}: expected 9 columns, got ${parts.length}`);
    }
    rows.push({
      round: num(parts[0], path, i + 1, 'round'),
      centers: num(parts[1], path, i + 1, 'centers'),
      added: num(parts[2], path, i + 1, 'added'),
      phiX: num(parts[3], path, i + 1, 'phi_x'),
      phiU: num(parts[4], path, i + 1, 'phi_u'),
      kUnsettled: num(parts[5], path, i + 1, 'k_unsettled'),
      alpha: num(parts[6], path, i + 1, 'alpha'),
      heavyCount: num(parts[7], path, i + 1, 'heavy_count'),
      massiveCount: num(parts[8], path, i + 1, 'massive_count'),
    });
  }
  if (rows.length === 0) {
    throw new SchemaError(`${path}: trace has no data rows`);
  }
  return { path, rows };
}

/** Generic named-column table for sweep summaries. */
export interface Table {
  path: string;
  columns: string[];
  rows: Record<string, number>[];
}

export function readTable(path: string, required: string[]): Table {
  const lines = splitLines(readFileSync(path, 'utf8'));
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const columns = lines[0].split(',');
  for (const col of required) {
    if (!columns.includes(col)) {
      throw new SchemaError(`${path}: missing required column "${col}"`);
    }
  }
  const rows: Record<string, number>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(',');
    if (parts.length !== columns.length) {
      throw new SchemaError(`${path}:${i + 1}: expected ${columns.length} columns`);
    }
    const row: Record<string, number> = {};
    columns.forEach((col, j) => {
      row[col] = num(parts[j], path, i + 1, col);
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return { path, columns, rows };
}

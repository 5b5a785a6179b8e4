import { parseArgs } from 'node:util';
import { SchemaError } from './csv.js';
import { plotDecay } from './decay.js';
import { plotScaling } from './scaling.js';

function usage(): never {
  console.error(
    'usage: plot decay --in trace.csv [--in trace2.csv ...] --out decay.svg\n' +
      '       plot scaling --in sweep.csv --out scaling.svg',
  );
  process.exit(2);
}

export function run(argv: string[]): number {
  const command = argv[0];
  if (command !== 'decay' && command !== 'scaling') usage();
  let values;
  try {
    ({ values } = parseArgs({
      args: argv.slice(1),
      options: {
        in: { type: 'string', multiple: true },
        out: { type: 'string' },
      },
    }));
  } catch {
    usage();
  }
  const inputs = values.in ?? [];
  if (inputs.length === 0 || !values.out) usage();
  try {
    if (command === 'decay') {
      const curves = plotDecay(inputs, values.out);
      console.log(
        `wrote ${values.out}: ${curves.replicates.length} replicates over ` +
          `${curves.rounds.length} common rounds`,
      );
    } else {
      if (inputs.length !== 1) usage();
      plotScaling(inputs[0], values.out);
      console.log(`wrote ${values.out}`);
    }
  } catch (err) {
    if (err instanceof SchemaError || err instanceof Error) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

import { pathToFileURL } from 'node:url';

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(run(process.argv.slice(2)));
}

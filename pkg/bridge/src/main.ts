#!/usr/bin/env node
import { runExport } from './export.js';
import { loadModel } from './models.js';
import { MODES, Mode } from './schemas.js';

const USAGE = `usage: genaug-bridge --mode {logprobs,embeddings,sentiment} --model <id> --in <texts.jsonl> --out <file.jsonl>

Exports neural-model quantities into the evaluation toolkit's file formats.
Model identifiers: hash[:seed] (deterministic test double) or file:<path>
(re-export a raw model dump). Input is JSONL: {"id": str, "text": str}.`;

function parseArgs(argv: string[]): Map<string, string> {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) throw new Error(`unexpected argument "${arg}"`);
    const key = arg.slice(2);
    if (key === 'help') {
      args.set('help', '');
      continue;
    }
    const value = argv[++i];
    if (value === undefined) throw new Error(`flag --${key} needs a value`);
    args.set(key, value);
  }
  return args;
}

function main(): number {
  let args: Map<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 1;
  }
  if (args.has('help')) {
    console.log(USAGE);
    return 0;
  }
  const mode = args.get('mode');
  const input = args.get('in');
  const output = args.get('out');
  const modelId = args.get('model') ?? 'hash:0';
  if (!mode || !MODES.includes(mode as Mode) || !input || !output) {
    console.error(USAGE);
    return 1;
  }
  try {
    const model = loadModel(modelId);
    const count = runExport({ mode: mode as Mode, input, output, model });
    console.log(JSON.stringify({ mode, model: model.name, records: count, out: output }));
    return 0;
  } catch (err) {
    console.error(
      JSON.stringify({ error: { message: err instanceof Error ? err.message : String(err) } }),
    );
    return 2;
  }
}

process.exitCode = main();

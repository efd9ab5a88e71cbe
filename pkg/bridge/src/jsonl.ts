import * as fs from 'node:fs';

/** Read a JSONL file, skipping blank lines and `{"_header": ...}` lines. */
export function readJsonl(path: string): unknown[] {
  const out: unknown[] = [];
  const lines = fs.readFileSync(path, 'utf-8').split('\n');
  lines.forEach((line, i) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let obj: unknown;
    try {
      obj = JSON.parse(trimmed);
    } catch (err) {
      throw new Error(`${path}:${i + 1}: invalid JSON (${err})`);
    }
    if (typeof obj === 'object' && obj !== null && '_header' in (obj as object)) return;
    out.push(obj);
  });
  return out;
}

export function writeJsonl(path: string, records: unknown[], header?: object): void {
  const lines: string[] = [];
  if (header) lines.push(JSON.stringify({ _header: header }));
  for (const record of records) lines.push(JSON.stringify(record));
  fs.writeFileSync(path, lines.join('\n') + '\n', 'utf-8');
}

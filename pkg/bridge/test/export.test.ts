import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { afterAll, describe, expect, it } from 'vitest';

import { runExport } from '../src/export.js';
import { readJsonl, writeJsonl } from '../src/jsonl.js';
import { HashModel, loadModel } from '../src/models.js';
import { ScoreRecord, SentimentRecord } from '../src/schemas.js';

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), 'bridge-test-'));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function writeTexts(name: string, count: number): string {
  const file = path.join(tmp, name);
  const rows = Array.from({ length: count }, (_, i) => ({
    id: `t${i}`,
    text: `the sample text number ${i} talks about pizza and service quality`,
  }));
  writeJsonl(file, rows);
  return file;
}

describe('hash model', () => {
  it('is deterministic and in range', () => {
    const a = new HashModel('7');
    const b = new HashModel('7');
    const tokens = ['the', 'pizza', 'was', 'fine'];
    expect(a.tokenLogprobs('x', tokens)).toEqual(b.tokenLogprobs('x', tokens));
    for (const v of a.tokenLogprobs('x', tokens)) expect(v).toBeLessThan(0);
    expect(a.embedding('pizza')).toEqual(b.embedding('pizza'));
    const norm = Math.hypot(...a.embedding('pizza'));
    expect(norm).toBeCloseTo(1, 12);
    const s = a.sentiment('id1', 'text');
    expect(s).toBeGreaterThanOrEqual(0);
    expect(s).toBeLessThanOrEqual(1);
  });

  it('changes with the seed', () => {
    expect(new HashModel('1').sentiment('a', 'b')).not.toEqual(
      new HashModel('2').sentiment('a', 'b'),
    );
  });
});

describe('exports on a 100-line sample', () => {
  const input = writeTexts('texts100.jsonl', 100);

  it('logprobs: every line validates with equal lengths and values <= 0', () => {
    const out = path.join(tmp, 'scores.jsonl');
    const count = runExport({ mode: 'logprobs', input, output: out, model: loadModel('hash:1') });
    expect(count).toBe(100);
    const rows = readJsonl(out);
    expect(rows).toHaveLength(100);
    for (const row of rows) {
      const parsed = ScoreRecord.parse(row);
      expect(parsed.tokens.length).toBe(parsed.logprobs.length);
      for (const v of parsed.logprobs) expect(v).toBeLessThanOrEqual(0);
    }
  });

  it('embeddings: one valid vector per distinct token', () => {
    const out = path.join(tmp, 'emb.jsonl');
    runExport({ mode: 'embeddings', input, output: out, model: loadModel('hash:1') });
    const rows = readJsonl(out) as { token: string; vec: number[] }[];
    const tokens = rows.map((r) => r.token);
    expect(new Set(tokens).size).toBe(tokens.length);
    for (const row of rows) expect(row.vec).toHaveLength(16);
  });

  it('sentiment: scores clipped into [0,1] on every line', () => {
    const out = path.join(tmp, 'sent.jsonl');
    const count = runExport({ mode: 'sentiment', input, output: out, model: loadModel('hash:1') });
    expect(count).toBe(100);
    for (const row of readJsonl(out)) {
      const parsed = SentimentRecord.parse(row);
      expect(parsed.score).toBeGreaterThanOrEqual(0);
      expect(parsed.score).toBeLessThanOrEqual(1);
    }
  });
});

describe('file-backed model', () => {
  it('re-exports dump rows and clips sentiment overshoot', () => {
    const dump = path.join(tmp, 'dump.jsonl');
    writeJsonl(dump, [
      { id: 'a', tokens: ['sub', 'word', 'units'], logprobs: [-0.1, -2.5, -0.3] },
      { id: 'a', score: 1.4 },
    ]);
    const input = path.join(tmp, 'one.jsonl');
    writeJsonl(input, [{ id: 'a', text: 'anything at all' }]);
    const out = path.join(tmp, 'file-scores.jsonl');
    runExport({ mode: 'logprobs', input, output: out, model: loadModel(`file:${dump}`) });
    const record = ScoreRecord.parse(readJsonl(out)[0]);
    expect(record.tokens).toEqual(['sub', 'word', 'units']);

    const sentOut = path.join(tmp, 'file-sent.jsonl');
    runExport({ mode: 'sentiment', input, output: sentOut, model: loadModel(`file:${dump}`) });
    expect(SentimentRecord.parse(readJsonl(sentOut)[0]).score).toBe(1);
  });

  it('names the record on a token/logprob mismatch', () => {
    const dump = path.join(tmp, 'bad-dump.jsonl');
    writeJsonl(dump, [{ id: 'rec-9', tokens: ['a', 'b'], logprobs: [-0.5] }]);
    const input = path.join(tmp, 'bad-one.jsonl');
    writeJsonl(input, [{ id: 'rec-9', text: 'a b' }]);
    expect(() =>
      runExport({
        mode: 'logprobs',
        input,
        output: path.join(tmp, 'never.jsonl'),
        model: loadModel(`file:${dump}`),
      }),
    ).toThrowError(/rec-9/);
  });

  it('rejects unknown model identifiers', () => {
    expect(() => loadModel('mystery-9b')).toThrowError(/unknown model identifier/);
  });
});

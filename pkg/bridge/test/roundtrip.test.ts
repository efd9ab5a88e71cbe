import { spawnSync } from 'node:child_process';
import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';
import { afterAll, describe, expect, it } from 'vitest';

import { runExport } from '../src/export.js';
import { readJsonl, writeJsonl } from '../src/jsonl.js';
import { loadModel } from '../src/models.js';
import { ScoreRecord } from '../src/schemas.js';

const PYTHON = process.env.GENAUG_PYTHON ?? 'python3';
const tmp = fs.mkdtempSync(path.join(os.tmpdir(), 'bridge-rt-'));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function primary(args: string[]): { status: number | null; stderr: string } {
  const result = spawnSync(PYTHON, ['-m', 'genaug', ...args], { encoding: 'utf-8' });
  return { status: result.status, stderr: result.stderr };
}

const DISHES = ['pizza', 'burger', 'salad', 'soup', 'pasta'];
const MOODS = ['fine', 'fresh', 'slow', 'clean', 'cozy'];

interface CleanRow {
  id: string;
  text: string;
  prompt: string;
  continuation: string;
}

describe('round-trip through the primary toolkit', () => {
  const rawPath = path.join(tmp, 'raw.jsonl');
  const cleanPath = path.join(tmp, 'clean.jsonl');

  const raws = Array.from({ length: 25 }, (_, i) => ({
    id: `r${i}`,
    stars: (i % 5) + 1,
    text:
      `the ${DISHES[i % 5]} at this place was ${MOODS[i % 5]} and we had a ` +
      `${MOODS[(i + 2) % 5]} time with the service on visit number ${i}`,
  }));
  writeJsonl(rawPath, raws);

  const ingest = primary(['ingest', '--in', rawPath, '--out', cleanPath]);
  it('primary ingest accepts the corpus', () => {
    expect(ingest.status, ingest.stderr).toBe(0);
  });

  const clean = readJsonl(cleanPath) as CleanRow[];
  const reviews = clean.slice(0, 20);

  // 20 prompts x 4 continuations + 20 ground-truth reviews = 100 lines
  const texts: { id: string; text: string }[] = [];
  const batches = reviews.map((review, i) => {
    const words = review.continuation.split(' ');
    const continuations = [
      review.continuation,
      words.slice().reverse().join(' '),
      words.slice(0, Math.max(2, words.length - 3)).join(' '),
      `${review.continuation} with ${DISHES[i % 5]} on the side`,
    ];
    continuations.forEach((c, k) => {
      texts.push({ id: `${review.id}:${k}`, text: `${review.prompt} ${c}` });
    });
    return { prompt_id: review.id, continuations };
  });
  for (const review of reviews) texts.push({ id: review.id, text: review.text });

  const textsPath = path.join(tmp, 'texts.jsonl');
  writeJsonl(textsPath, texts);
  const batchesPath = path.join(tmp, 'batches.jsonl');
  writeJsonl(batchesPath, batches);
  const truthsPath = path.join(tmp, 'truths.jsonl');
  writeJsonl(
    truthsPath,
    reviews.map((r) => ({ id: r.id, stars: 4, text: r.text })),
  );

  const scoresPath = path.join(tmp, 'scores.jsonl');
  const embPath = path.join(tmp, 'embeddings.jsonl');
  const sentPath = path.join(tmp, 'sentiment.jsonl');
  const model = loadModel('hash:42');

  it('the sample is 100 lines', () => {
    expect(texts).toHaveLength(100);
  });

  it('logprob export satisfies the score contract on 100% of lines', () => {
    runExport({ mode: 'logprobs', input: textsPath, output: scoresPath, model });
    const rows = readJsonl(scoresPath);
    expect(rows).toHaveLength(100);
    for (const row of rows) {
      const record = ScoreRecord.parse(row);
      expect(record.tokens.length).toBe(record.logprobs.length);
      for (const v of record.logprobs) expect(v).toBeLessThanOrEqual(0);
    }
  });

  it('embedding and sentiment exports run on the same sample', () => {
    expect(runExport({ mode: 'embeddings', input: textsPath, output: embPath, model })).toBeGreaterThan(0);
    expect(runExport({ mode: 'sentiment', input: textsPath, output: sentPath, model })).toBe(100);
  });

  it('primary evaluate consumes all three exports without errors', () => {
    const reportPath = path.join(tmp, 'report.json');
    const result = primary([
      'evaluate',
      '--batches', batchesPath,
      '--table', cleanPath,
      '--truths', truthsPath,
      '--scores', scoresPath,
      '--embeddings', embPath,
      '--sentiment', sentPath,
      '--out', reportPath,
    ]);
    expect(result.status, result.stderr).toBe(0);
    const report = JSON.parse(fs.readFileSync(reportPath, 'utf-8'));
    for (const key of ['ppl', 'slor', 'bpro', 'sent_std', 'sent_diff']) {
      expect(report.aggregates[key], key).not.toBeNull();
    }
    expect(report.counts.unscored_items).toBe(0);
  });
});

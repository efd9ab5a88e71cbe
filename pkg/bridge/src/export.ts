import { readJsonl, writeJsonl } from './jsonl.js';
import { FileModel, Model } from './models.js';
import {
  EmbeddingRecord,
  Mode,
  ScoreRecord,
  SentimentRecord,
  TextRecord,
} from './schemas.js';

export interface ExportJob {
  input: string;
  output: string;
  mode: Mode;
  model: Model;
}

function readTexts(path: string): TextRecord[] {
  return readJsonl(path).map((row, i) => {
    const parsed = TextRecord.safeParse(row);
    if (!parsed.success) {
      throw new Error(`${path} record ${i + 1}: ${parsed.error.issues[0]?.message}`);
    }
    return parsed.data;
  });
}

const tokenize = (text: string): string[] => text.split(/\s+/).filter(Boolean);

/** Run one export; every emitted record is validated against its contract. */
export function runExport(job: ExportJob): number {
  const texts = readTexts(job.input);
  const header = { tool: 'genaug-bridge', mode: job.mode, model: job.model.name };

  if (job.mode === 'logprobs') {
    const records = texts.map((item) => {
      const fallback = tokenize(item.text);
      const tokens =
        job.model instanceof FileModel ? job.model.tokensFor(item.id, fallback) : fallback;
      if (tokens.length === 0) {
        throw new Error(`record ${item.id}: no tokens to score`);
      }
      const record = {
        id: item.id,
        tokens,
        logprobs: job.model.tokenLogprobs(item.id, tokens),
      };
      const parsed = ScoreRecord.safeParse(record);
      if (!parsed.success) {
        throw new Error(`record ${item.id}: ${parsed.error.issues[0]?.message}`);
      }
      return parsed.data;
    });
    writeJsonl(job.output, records, header);
    return records.length;
  }

  if (job.mode === 'embeddings') {
    const seen = new Set<string>();
    const records: EmbeddingRecord[] = [];
    for (const item of texts) {
      for (const token of tokenize(item.text)) {
        if (seen.has(token)) continue;
        seen.add(token);
        const record = { token, vec: job.model.embedding(token) };
        const parsed = EmbeddingRecord.safeParse(record);
        if (!parsed.success) {
          throw new Error(`token "${token}": ${parsed.error.issues[0]?.message}`);
        }
        records.push(parsed.data);
      }
    }
    writeJsonl(job.output, records, header);
    return records.length;
  }

  const records = texts.map((item) => {
    const record = { id: item.id, score: job.model.sentiment(item.id, item.text) };
    const parsed = SentimentRecord.safeParse(record);
    if (!parsed.success) {
      throw new Error(`record ${item.id}: ${parsed.error.issues[0]?.message}`);
    }
    return parsed.data;
  });
  writeJsonl(job.output, records, header);
  return records.length;
}

import { readJsonl } from './jsonl.js';

/**
 * Model backends behind the `--model` identifier.
 *
 * `hash[:seed]` is a deterministic stand-in that produces schema-valid
 * quantities from string hashes; it exists so pipelines can be wired and
 * validated end to end before a real scorer is available.
 *
 * `file:<path>` adapts an existing raw dump (one JSON object per line)
 * produced by an actual model, validating and normalizing it into the
 * toolkit contracts.
 */
export interface Model {
  readonly name: string;
  tokenLogprobs(id: string, tokens: string[]): number[];
  embedding(token: string): number[];
  sentiment(id: string, text: string): number;
}

function fnv1a(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

/** Deterministic uniform value in [0, 1) keyed by the joined parts. */
function hash01(...parts: string[]): number {
  return fnv1a(parts.join('')) / 0x100000000;
}

const EMBEDDING_DIM = 16;

export class HashModel implements Model {
  readonly name: string;
  private readonly seed: string;

  constructor(seed = '0') {
    this.seed = seed;
    this.name = `hash:${seed}`;
  }

  tokenLogprobs(_id: string, tokens: string[]): number[] {
    return tokens.map((token, i) => {
      const prev = i > 0 ? tokens[i - 1] : '<s>';
      // strictly negative, spread over a plausible range of surprisals
      return -(0.05 + 9.0 * hash01(this.seed, 'lp', prev, token));
    });
  }

  embedding(token: string): number[] {
    const raw = Array.from({ length: EMBEDDING_DIM }, (_, d) =>
      2 * hash01(this.seed, 'emb', token, String(d)) - 1,
    );
    const norm = Math.hypot(...raw);
    return raw.map((v) => v / norm);
  }

  sentiment(id: string, text: string): number {
    return hash01(this.seed, 'sent', id, text);
  }
}

interface RawDump {
  byId: Map<string, Record<string, unknown>>;
  byToken: Map<string, Record<string, unknown>>;
}

/**
 * Re-export quantities from a model dump file.  Rows are keyed by "id"
 * (logprobs, sentiment) or "token" (embeddings).
 */
export class FileModel implements Model {
  readonly name: string;
  private readonly dump: RawDump;

  constructor(path: string) {
    this.name = `file:${path}`;
    this.dump = { byId: new Map(), byToken: new Map() };
    for (const row of readJsonl(path)) {
      const record = row as Record<string, unknown>;
      if (typeof record.id === 'string') {
        // a dump may spread one record's quantities over several rows
        const merged = this.dump.byId.get(record.id) ?? {};
        this.dump.byId.set(record.id, { ...merged, ...record });
      }
      if (typeof record.token === 'string') this.dump.byToken.set(record.token, record);
    }
  }

  tokenLogprobs(id: string, tokens: string[]): number[] {
    const row = this.dump.byId.get(id);
    if (!row) throw new Error(`model dump has no log-probabilities for record ${id}`);
    const values = row.logprobs;
    if (!Array.isArray(values) || !values.every((v) => typeof v === 'number')) {
      throw new Error(`record ${id}: dump row carries no numeric "logprobs" array`);
    }
    const dumpTokens = Array.isArray(row.tokens) ? (row.tokens as string[]) : tokens;
    if (values.length !== dumpTokens.length) {
      throw new Error(
        `record ${id}: ${dumpTokens.length} tokens but ${values.length} logprobs (tokenizer mismatch)`,
      );
    }
    return values as number[];
  }

  /** Dump tokens win over the toolkit's whitespace split when present. */
  tokensFor(id: string, fallback: string[]): string[] {
    const row = this.dump.byId.get(id);
    if (row && Array.isArray(row.tokens)) return row.tokens as string[];
    return fallback;
  }

  embedding(token: string): number[] {
    const row = this.dump.byToken.get(token);
    if (!row || !Array.isArray(row.vec)) {
      throw new Error(`model dump has no vector for token "${token}"`);
    }
    return row.vec as number[];
  }

  sentiment(id: string, _text: string): number {
    const row = this.dump.byId.get(id);
    if (!row || typeof row.score !== 'number') {
      throw new Error(`model dump has no sentiment score for record ${id}`);
    }
    // clip into the contract range rather than failing on regressor overshoot
    return Math.min(1, Math.max(0, row.score));
  }
}

export function loadModel(identifier: string): Model {
  if (identifier === 'hash' || identifier.startsWith('hash:')) {
    return new HashModel(identifier.includes(':') ? identifier.split(':', 2)[1] : '0');
  }
  if (identifier.startsWith('file:')) {
    return new FileModel(identifier.slice('file:'.length));
  }
  throw new Error(`unknown model identifier "${identifier}" (use hash[:seed] or file:<path>)`);
}

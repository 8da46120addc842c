/**
 * Attention-dump conversion.
 *
 * Reads per-sentence attention grids dumped by an NMT toolkit and writes
 * the matrix interchange format consumed by the alignseg pipeline:
 * one JSON object per line with `id`, `lang`, `source`, `target` and
 * row-stochastic `rows` (target x source).
 *
 * Special source tokens (sentence markers, padding) either get dropped
 * with their attention mass renormalized away, or (with `eosAsNull`)
 * pooled into a `<NULL>` column at position 0, matching how the
 * pipeline's own aligner emits NULL.
 */

/** NULL token string used by the consuming pipeline (column 0). */
export const NULL_TOKEN = "<NULL>";

/** Source/target tokens treated as sentence markers or padding. */
export const SPECIAL_TOKENS = new Set(["<s>", "</s>", "<bos>", "<eos>", "<pad>"]);

/** Raised for malformed dumps and corpus mismatches. */
export class ExportError extends Error {}

/** One sentence record of the reference dump schema. */
export interface AttentionRecord {
  id: string;
  src: string[];
  tgt: string[];
  /** [target][source], or [head][target][source] with headMean. */
  attn: number[][] | number[][][];
}

/** One line of the interchange format. */
export interface MatrixRecord {
  id: string;
  lang: string;
  source: string[];
  target: string[];
  rows: number[][];
}

export interface ExportOptions {
  /** Pool special-token attention into a NULL column instead of dropping it. */
  eosAsNull?: boolean;
  /** Accept [head][target][source] grids and average over heads. */
  headMean?: boolean;
}

function isNumberGrid(value: unknown): value is number[][] {
  return (
    Array.isArray(value) &&
    value.every(
      (row) => Array.isArray(row) && row.every((v) => typeof v === "number"),
    )
  );
}

/** Parse one dump line, validating shape and non-negativity. */
export function parseDumpRecord(
  line: string,
  lineno: number,
  options: ExportOptions = {},
): AttentionRecord {
  let obj: unknown;
  try {
    obj = JSON.parse(line);
  } catch (err) {
    throw new ExportError(`dump line ${lineno}: invalid JSON: ${String(err)}`);
  }
  if (typeof obj !== "object" || obj === null) {
    throw new ExportError(`dump line ${lineno}: expected a JSON object`);
  }
  const record = obj as Record<string, unknown>;
  for (const key of ["id", "src", "tgt", "attn"]) {
    if (!(key in record)) {
      throw new ExportError(`dump line ${lineno}: missing field '${key}'`);
    }
  }
  const id = String(record.id);
  if (!Array.isArray(record.src) || !Array.isArray(record.tgt)) {
    throw new ExportError(`dump ${id}: 'src' and 'tgt' must be arrays`);
  }
  const src = record.src.map(String);
  const tgt = record.tgt.map(String);

  let attn: number[][];
  if (options.headMean) {
    const heads = record.attn;
    if (!Array.isArray(heads) || heads.length === 0 || !heads.every(isNumberGrid)) {
      throw new ExportError(`dump ${id}: expected [head][target][source] attention`);
    }
    attn = meanOverHeads(heads as number[][][], id);
  } else {
    if (!isNumberGrid(record.attn)) {
      throw new ExportError(`dump ${id}: expected a [target][source] number grid`);
    }
    attn = record.attn;
  }

  if (attn.length !== tgt.length) {
    throw new ExportError(
      `dump ${id}: ${attn.length} attention rows for ${tgt.length} target tokens`,
    );
  }
  attn.forEach((row, t) => {
    if (row.length !== src.length) {
      throw new ExportError(
        `dump ${id}: row ${t} has ${row.length} entries for ${src.length} source tokens`,
      );
    }
    if (row.some((v) => v < 0 || !Number.isFinite(v))) {
      throw new ExportError(`dump ${id}: row ${t} has a negative or non-finite weight`);
    }
  });
  return { id, src, tgt, attn };
}

function meanOverHeads(heads: number[][][], id: string): number[][] {
  const [first, ...rest] = heads;
  for (const head of rest) {
    if (
      head.length !== first.length ||
      head.some((row, t) => row.length !== first[t].length)
    ) {
      throw new ExportError(`dump ${id}: attention heads disagree on the grid shape`);
    }
  }
  return first.map((row, t) =>
    row.map((_, s) => heads.reduce((acc, head) => acc + head[t][s], 0) / heads.length),
  );
}

/**
 * Convert one attention record to an interchange record.
 *
 * Special target rows are dropped; the remaining target tokens must
 * equal the corpus phonemes for the utterance.  Special source columns
 * are dropped (mass renormalized away) or pooled into a NULL column at
 * position 0 when `eosAsNull` is set.  Every output row is renormalized
 * to sum to 1; a row left without mass is an error.
 */
export function convertRecord(
  record: AttentionRecord,
  phonemes: string[],
  lang: string,
  options: ExportOptions = {},
): MatrixRecord {
  const keepTarget: number[] = [];
  record.tgt.forEach((token, t) => {
    if (!SPECIAL_TOKENS.has(token)) {
      keepTarget.push(t);
    }
  });
  const target = keepTarget.map((t) => record.tgt[t]);
  if (
    target.length !== phonemes.length ||
    target.some((token, i) => token !== phonemes[i])
  ) {
    throw new ExportError(
      `dump ${record.id}: target tokens [${target.join(" ")}] do not match ` +
        `corpus phonemes [${phonemes.join(" ")}]`,
    );
  }

  const keepSource: number[] = [];
  const specialSource: number[] = [];
  record.src.forEach((token, s) => {
    (SPECIAL_TOKENS.has(token) ? specialSource : keepSource).push(s);
  });
  if (keepSource.length === 0) {
    throw new ExportError(`dump ${record.id}: no source tokens left after specials`);
  }
  const useNull = Boolean(options.eosAsNull);
  const source = keepSource.map((s) => record.src[s]);
  if (useNull) {
    source.unshift(NULL_TOKEN);
  }

  const attn = record.attn as number[][];
  const rows = keepTarget.map((t) => {
    const raw = attn[t];
    const kept = keepSource.map((s) => raw[s]);
    if (useNull) {
      kept.unshift(specialSource.reduce((acc, s) => acc + raw[s], 0));
    }
    const total = kept.reduce((acc, v) => acc + v, 0);
    if (total <= 0) {
      throw new ExportError(
        `dump ${record.id}: target row ${t} has no attention mass` +
          (specialSource.length > 0 && !useNull
            ? " outside the special tokens (consider --eos-as-null)"
            : ""),
      );
    }
    return kept.map((v) => v / total);
  });
  return { id: record.id, lang, source, target, rows };
}

/** Serialize interchange records as JSON-Lines (deterministic). */
export function formatMatrices(records: MatrixRecord[]): string {
  return records.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

/** Parse a whole dump file (JSON-Lines). */
export function parseDump(text: string, options: ExportOptions = {}): AttentionRecord[] {
  const records: AttentionRecord[] = [];
  const seen = new Set<string>();
  text.split("\n").forEach((line, index) => {
    if (line.trim() === "") {
      return;
    }
    const record = parseDumpRecord(line, index + 1, options);
    if (seen.has(record.id)) {
      throw new ExportError(`dump line ${index + 1}: duplicate id '${record.id}'`);
    }
    seen.add(record.id);
    records.push(record);
  });
  return records;
}

/**
 * Convert a parsed dump against the corpus phoneme index.
 *
 * Every dump id must exist in the corpus (partial dumps are fine);
 * unknown ids are reported together.
 */
export function convertDump(
  records: AttentionRecord[],
  phonemesById: Map<string, string[]>,
  lang: string,
  options: ExportOptions = {},
): MatrixRecord[] {
  const unknown = records.filter((r) => !phonemesById.has(r.id)).map((r) => r.id);
  if (unknown.length > 0) {
    throw new ExportError(
      `dump ids not present in the corpus: ${unknown.join(", ")}`,
    );
  }
  return records.map((r) =>
    convertRecord(r, phonemesById.get(r.id) as string[], lang, options),
  );
}

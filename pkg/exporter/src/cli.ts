#!/usr/bin/env node
/**
 * alignseg-export: convert an attention dump to the matrix interchange
 * format.
 *
 *   alignseg-export <dump.jsonl> --corpus corpus.tsv --lang fr \
 *       -o matrices.jsonl [--eos-as-null] [--head-mean]
 *
 * Exit codes: 0 success, 1 data error, 2 usage error.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { resolve } from "node:path";
import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";

import { readCorpusPhonemes } from "./corpus.js";
import {
  ExportError,
  convertDump,
  formatMatrices,
  parseDump,
} from "./exporter.js";

const USAGE =
  "usage: alignseg-export <dump.jsonl> --corpus <corpus> --lang <code> " +
  "-o <out.jsonl> [--eos-as-null] [--head-mean]";

export function exportAttention(
  dumpPath: string,
  corpusPath: string,
  lang: string,
  outPath: string,
  options: { eosAsNull?: boolean; headMean?: boolean } = {},
): void {
  let text: string;
  try {
    text = readFileSync(dumpPath, "utf-8");
  } catch (err) {
    throw new ExportError(`cannot read dump file ${dumpPath}: ${String(err)}`);
  }
  const records = parseDump(text, options);
  const phonemes = readCorpusPhonemes(corpusPath);
  const matrices = convertDump(records, phonemes, lang, options);
  writeFileSync(outPath, formatMatrices(matrices), "utf-8");
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        corpus: { type: "string" },
        lang: { type: "string" },
        output: { type: "string", short: "o" },
        "eos-as-null": { type: "boolean", default: false },
        "head-mean": { type: "boolean", default: false },
        help: { type: "boolean", short: "h", default: false },
      },
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  const { corpus, lang, output } = parsed.values;
  if (parsed.positionals.length !== 1 || !corpus || !lang || !output) {
    console.error(USAGE);
    return 2;
  }
  try {
    exportAttention(parsed.positionals[0], corpus, lang, output, {
      eosAsNull: parsed.values["eos-as-null"],
      headMean: parsed.values["head-mean"],
    });
  } catch (err) {
    if (err instanceof ExportError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (process.argv[1] && fileURLToPath(import.meta.url) === resolve(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}

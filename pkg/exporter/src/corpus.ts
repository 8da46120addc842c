/**
 * Minimal corpus reader: only the utterance id -> phoneme list mapping
 * is needed to validate a dump, so both corpus formats are skimmed
 * without touching translations or gold fields.
 */

import { readFileSync } from "node:fs";

import { ExportError } from "./exporter.js";

export function readCorpusPhonemes(path: string): Map<string, string[]> {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (err) {
    throw new ExportError(`cannot read corpus file ${path}: ${String(err)}`);
  }
  return path.endsWith(".jsonl") ? parseJsonl(text) : parseTsv(text);
}

function parseTsv(text: string): Map<string, string[]> {
  const lines = text.split("\n").filter((line) => line !== "");
  if (lines.length === 0) {
    throw new ExportError("corpus file is empty");
  }
  const header = lines[0].split("\t");
  if (header[0] !== "id" || header[1] !== "phonemes") {
    throw new ExportError(
      `bad corpus header: expected 'id<TAB>phonemes<TAB>...', got '${lines[0]}'`,
    );
  }
  const phonemes = new Map<string, string[]>();
  lines.slice(1).forEach((line, index) => {
    const cells = line.split("\t");
    if (cells.length !== header.length) {
      throw new ExportError(
        `corpus line ${index + 2}: expected ${header.length} fields, got ${cells.length}`,
      );
    }
    phonemes.set(cells[0], cells[1].split(" ").filter((p) => p !== ""));
  });
  return phonemes;
}

function parseJsonl(text: string): Map<string, string[]> {
  const phonemes = new Map<string, string[]>();
  text.split("\n").forEach((line, index) => {
    if (line.trim() === "") {
      return;
    }
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      throw new ExportError(`corpus line ${index + 1}: invalid JSON: ${String(err)}`);
    }
    const record = obj as { id?: unknown; phonemes?: unknown };
    if (typeof record.id !== "string" || !Array.isArray(record.phonemes)) {
      throw new ExportError(`corpus line ${index + 1}: need 'id' and 'phonemes'`);
    }
    phonemes.set(record.id, record.phonemes.map(String));
  });
  return phonemes;
}

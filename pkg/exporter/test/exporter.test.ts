import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { readCorpusPhonemes } from "../src/corpus.js";
import { exportAttention, main } from "../src/cli.js";
import {
  ExportError,
  NULL_TOKEN,
  convertDump,
  convertRecord,
  formatMatrices,
  parseDump,
  parseDumpRecord,
} from "../src/exporter.js";

/** Reference 3-sentence dump with sentence markers on both sides. */
const REFERENCE_DUMP = [
  {
    id: "u1",
    src: ["the", "dog", "</s>"],
    tgt: ["d", "o", "g", "</s>"],
    attn: [
      [0.1, 0.8, 0.1],
      [0.2, 0.7, 0.1],
      [0.15, 0.75, 0.1],
      [0.05, 0.05, 0.9],
    ],
  },
  {
    id: "u2",
    src: ["a", "cat", "</s>"],
    tgt: ["k", "a", "t"],
    attn: [
      [0.2, 0.6, 0.2],
      [0.3, 0.5, 0.2],
      [0.1, 0.7, 0.2],
    ],
  },
  {
    id: "u3",
    src: ["sun", "</s>"],
    tgt: ["s", "u", "n"],
    attn: [
      [0.9, 0.1],
      [0.85, 0.15],
      [0.8, 0.2],
    ],
  },
] as const;

const CORPUS_TSV = [
  "id\tphonemes\tgold\ttrans_en",
  "u1\td o g\td o g\tthe dog",
  "u2\tk a t\tk a | t\ta cat",
  "u3\ts u n\ts u n\tsun",
  "",
].join("\n");

function dumpText(): string {
  return REFERENCE_DUMP.map((r) => JSON.stringify(r)).join("\n") + "\n";
}

function writeFixtures(): { dir: string; dump: string; corpus: string } {
  const dir = mkdtempSync(join(tmpdir(), "exporter-"));
  const dump = join(dir, "dump.jsonl");
  const corpus = join(dir, "corpus.tsv");
  writeFileSync(dump, dumpText(), "utf-8");
  writeFileSync(corpus, CORPUS_TSV, "utf-8");
  return { dir, dump, corpus };
}

function rowSum(row: number[]): number {
  return row.reduce((acc, v) => acc + v, 0);
}

describe("parseDump", () => {
  it("reads every record", () => {
    const records = parseDump(dumpText());
    expect(records.map((r) => r.id)).toEqual(["u1", "u2", "u3"]);
  });

  it("rejects duplicate ids", () => {
    const text = dumpText() + JSON.stringify(REFERENCE_DUMP[0]) + "\n";
    expect(() => parseDump(text)).toThrow(/duplicate id 'u1'/);
  });

  it("rejects dimension mismatches", () => {
    const bad = { id: "u9", src: ["a", "b"], tgt: ["x"], attn: [[0.5]] };
    expect(() => parseDumpRecord(JSON.stringify(bad), 1)).toThrow(/row 0 has 1 entries/);
  });

  it("rejects negative weights", () => {
    const bad = { id: "u9", src: ["a"], tgt: ["x"], attn: [[-0.5]] };
    expect(() => parseDumpRecord(JSON.stringify(bad), 1)).toThrow(/negative/);
  });

  it("averages attention heads behind headMean", () => {
    const twoHeads = {
      id: "u9",
      src: ["a", "b"],
      tgt: ["x"],
      attn: [
        [[1.0, 0.0]],
        [[0.0, 1.0]],
      ],
    };
    const record = parseDumpRecord(JSON.stringify(twoHeads), 1, { headMean: true });
    expect(record.attn[0]).toEqual([0.5, 0.5]);
  });
});

describe("convertRecord", () => {
  const phonemes = { u1: ["d", "o", "g"], u2: ["k", "a", "t"], u3: ["s", "u", "n"] };

  it("passes small grids through verbatim", () => {
    const record = parseDumpRecord(
      JSON.stringify({ id: "u9", src: ["a", "b"], tgt: ["x"], attn: [[0.2, 0.8]] }),
      1,
    );
    const out = convertRecord(record, ["x"], "en");
    expect(out.rows).toEqual([[0.2, 0.8]]);
    expect(out.source).toEqual(["a", "b"]);
  });

  it("renormalizes rows that do not sum to 1", () => {
    const record = parseDumpRecord(
      JSON.stringify({ id: "u9", src: ["a", "b"], tgt: ["x"], attn: [[0.49, 0.49]] }),
      1,
    );
    const out = convertRecord(record, ["x"], "en");
    expect(rowSum(out.rows[0])).toBeCloseTo(1.0, 9);
    expect(out.rows[0][0]).toBeCloseTo(0.5, 9);
  });

  it("drops special tokens and renormalizes their mass away", () => {
    const records = parseDump(dumpText());
    const out = convertRecord(records[0], phonemes.u1, "en");
    expect(out.source).toEqual(["the", "dog"]);
    expect(out.target).toEqual(["d", "o", "g"]);
    expect(out.rows).toHaveLength(3);
    // first row: [0.1, 0.8] renormalized
    expect(out.rows[0][0]).toBeCloseTo(0.1 / 0.9, 9);
    expect(out.rows[0][1]).toBeCloseTo(0.8 / 0.9, 9);
    for (const row of out.rows) {
      expect(rowSum(row)).toBeCloseTo(1.0, 9);
    }
  });

  it("moves special mass to a NULL column with eosAsNull", () => {
    const records = parseDump(dumpText());
    const out = convertRecord(records[0], phonemes.u1, "en", { eosAsNull: true });
    expect(out.source).toEqual([NULL_TOKEN, "the", "dog"]);
    // EOS carried 0.1 on the first row
    expect(out.rows[0][0]).toBeCloseTo(0.1, 9);
    expect(out.rows[0][1]).toBeCloseTo(0.1, 9);
    expect(out.rows[0][2]).toBeCloseTo(0.8, 9);
    for (const row of out.rows) {
      expect(Math.abs(rowSum(row) - 1.0)).toBeLessThanOrEqual(1e-9);
    }
  });

  it("rejects target tokens that disagree with the corpus", () => {
    const records = parseDump(dumpText());
    expect(() => convertRecord(records[0], ["d", "o", "x"], "en")).toThrow(
      /do not match/,
    );
  });

  it("rejects rows left without mass", () => {
    const record = parseDumpRecord(
      JSON.stringify({
        id: "u9",
        src: ["word", "</s>"],
        tgt: ["x"],
        attn: [[0.0, 1.0]],
      }),
      1,
    );
    expect(() => convertRecord(record, ["x"], "en")).toThrow(/no attention mass/);
  });

  it("reports unknown dump ids together", () => {
    const records = parseDump(dumpText());
    const partial = new Map([["u1", phonemes.u1]]);
    expect(() => convertDump(records, partial, "en")).toThrow(/u2, u3/);
  });
});

describe("interchange conformance", () => {
  // Mirror of the consuming pipeline's read_matrices checks.
  function validateInterchange(text: string): void {
    const lines = text.split("\n").filter((line) => line !== "");
    expect(lines.length).toBeGreaterThan(0);
    for (const line of lines) {
      const obj = JSON.parse(line);
      expect(typeof obj.id).toBe("string");
      expect(typeof obj.lang).toBe("string");
      expect(Array.isArray(obj.source)).toBe(true);
      expect(Array.isArray(obj.target)).toBe(true);
      expect(obj.rows).toHaveLength(obj.target.length);
      for (const row of obj.rows) {
        expect(row).toHaveLength(obj.source.length);
        for (const v of row) {
          expect(v).toBeGreaterThanOrEqual(0);
        }
        expect(Math.abs(rowSum(row) - 1.0)).toBeLessThanOrEqual(1e-9);
      }
    }
  }

  it("reference dump converts cleanly (both flag settings)", () => {
    const { dump, corpus, dir } = writeFixtures();
    for (const [name, flags] of [
      ["plain.jsonl", []],
      ["null.jsonl", ["--eos-as-null"]],
    ] as const) {
      const out = join(dir, name);
      const code = main([dump, "--corpus", corpus, "--lang", "en", "-o", out, ...flags]);
      expect(code).toBe(0);
      validateInterchange(readFileSync(out, "utf-8"));
    }
  });

  it("re-export is byte-identical", () => {
    const { dump, corpus, dir } = writeFixtures();
    const outA = join(dir, "a.jsonl");
    const outB = join(dir, "b.jsonl");
    exportAttention(dump, corpus, "en", outA);
    exportAttention(dump, corpus, "en", outB);
    expect(readFileSync(outA, "utf-8")).toBe(readFileSync(outB, "utf-8"));
  });

  it("eos-as-null output starts with the NULL column", () => {
    const { dump, corpus, dir } = writeFixtures();
    const out = join(dir, "null.jsonl");
    exportAttention(dump, corpus, "en", out, { eosAsNull: true });
    const first = JSON.parse(readFileSync(out, "utf-8").split("\n")[0]);
    expect(first.source[0]).toBe(NULL_TOKEN);
  });
});

describe("cli", () => {
  it("usage error without required flags", () => {
    expect(main(["dump.jsonl"])).toBe(2);
  });

  it("unknown flag is a usage error", () => {
    expect(main(["dump.jsonl", "--bogus"])).toBe(2);
  });

  it("data errors exit 1", () => {
    const { dump, dir } = writeFixtures();
    const out = join(dir, "out.jsonl");
    expect(
      main([dump, "--corpus", join(dir, "missing.tsv"), "--lang", "en", "-o", out]),
    ).toBe(1);
  });
});

describe("corpus reader", () => {
  it("reads phonemes from TSV", () => {
    const { corpus } = writeFixtures();
    const phonemes = readCorpusPhonemes(corpus);
    expect(phonemes.get("u1")).toEqual(["d", "o", "g"]);
    expect(phonemes.size).toBe(3);
  });

  it("reads phonemes from JSONL", () => {
    const dir = mkdtempSync(join(tmpdir(), "exporter-"));
    const path = join(dir, "corpus.jsonl");
    writeFileSync(
      path,
      '{"id": "u1", "phonemes": ["a", "b"], "translations": {"en": "x"}}\n',
      "utf-8",
    );
    expect(readCorpusPhonemes(path).get("u1")).toEqual(["a", "b"]);
  });

  it("rejects a bad header", () => {
    const dir = mkdtempSync(join(tmpdir(), "exporter-"));
    const path = join(dir, "corpus.tsv");
    writeFileSync(path, "phonemes\tid\nx\tu1\n", "utf-8");
    expect(() => readCorpusPhonemes(path)).toThrow(ExportError);
  });
});

describe("formatMatrices", () => {
  it("is line-oriented with trailing newline", () => {
    const text = formatMatrices([
      { id: "u", lang: "en", source: ["a"], target: ["x"], rows: [[1.0]] },
    ]);
    expect(text.endsWith("\n")).toBe(true);
    expect(text.split("\n").filter((l) => l !== "")).toHaveLength(1);
  });
});

/**
 * Client-side submission checking that agrees with the service.
 *
 * The upload form validates a file before it leaves the browser, so the
 * verdict shown locally must match what the service would say — in
 * particular for header problems, where the two implementations are held to
 * byte-for-byte agreement on a committed fuzz corpus
 * (fixtures/header_fuzz.json).  That forces this module to reproduce two
 * pieces of Python behaviour exactly rather than approximately:
 *
 *  - `str.strip()` trims Python's whitespace set (NBSP, NEL, the Unicode
 *    space block, the information separators \x1c-\x1f, ...) but never a
 *    BOM or a zero-width space.  `String.prototype.trim` disagrees on
 *    several of those, so {@link pythonStrip} carries the exact set.
 *  - `csv.reader` has its own record grammar: `""` escapes inside quotes,
 *    text after a closing quote is appended, quoted newlines are data, a
 *    blank line is a zero-field record, a carriage return must be followed
 *    by a newline or end-of-input, and any NUL poisons the line.  The
 *    reader below is a port of that state machine.
 *
 * Body-row checks reuse the same reader and mirror the service wording so
 * the inline feedback reads like the 422 response would, but only header
 * verdicts are contractual.
 */

export const SUBMISSION_HEADER = ["epoch_id", "grade", "probability"] as const;

export const GRADES = [1, 2, 3, 4] as const;

/**
 * Characters `str.strip()` removes.  Deliberately excludes U+FEFF (BOM) and
 * U+200B (zero-width space): Python does not consider them whitespace, and
 * the service therefore rejects headers padded with them.
 */
const PY_WHITESPACE =
  "\t\n\v\f\r\x1c\x1d\x1e\x1f \x85\xa0 " +
  "           " +
  "    　";
const PY_WS = new Set(PY_WHITESPACE);

/** Python's `str.strip()` with no arguments. */
export function pythonStrip(text: string): string {
  let start = 0;
  let end = text.length;
  while (start < end && PY_WS.has(text[start]!)) {
    start += 1;
  }
  while (end > start && PY_WS.has(text[end - 1]!)) {
    end -= 1;
  }
  return text.slice(start, end);
}

// ---------------------------------------------------------------------------
// CSV records, the way Python's csv.reader produces them
// ---------------------------------------------------------------------------

export interface CsvRecord {
  /** Fields of the record; a blank line is `[]`. */
  fields: string[];
  /** Index just past the record's last consumed character. */
  next: number;
  /** Newlines consumed by this record (quoted newlines included). */
  linesConsumed: number;
}

export class CsvParseError extends Error {
  constructor(
    message: string,
    /** Newlines consumed before the error surfaced. */
    readonly linesConsumed: number,
  ) {
    super(message);
  }
}

const enum CsvState {
  StartRecord,
  StartField,
  InField,
  InQuotedField,
  QuoteInQuotedField,
  EatCrnl,
}

/**
 * Read one CSV record starting at `start`, or return null at end of input.
 *
 * Throws {@link CsvParseError} on the two conditions Python's reader raises
 * for with the default dialect: a NUL character anywhere in the record, and
 * a carriage return followed by anything but a newline or end-of-input.
 */
export function readCsvRecord(text: string, start: number): CsvRecord | null {
  if (start >= text.length) {
    return null;
  }
  const fields: string[] = [];
  let field = "";
  let state = CsvState.StartRecord;
  let lines = 0;
  let pos = start;

  const save = (): void => {
    fields.push(field);
    field = "";
  };

  while (pos < text.length) {
    const ch = text[pos]!;
    pos += 1;
    if (ch === "\n") {
      lines += 1;
    }
    if (ch === "\0") {
      // Python refuses NUL anywhere in a line, quoted or not.
      throw new CsvParseError("line contains NUL", lines);
    }

    switch (state) {
      case CsvState.StartRecord:
        if (ch === "\n") {
          return { fields: [], next: pos, linesConsumed: lines };
        }
        if (ch === "\r") {
          state = CsvState.EatCrnl;
        } else {
          // Reprocess as the first character of the first field.
          state = CsvState.StartField;
          pos -= 1;
        }
        break;

      case CsvState.StartField:
        if (ch === "\n") {
          save();
          return { fields, next: pos, linesConsumed: lines };
        }
        if (ch === "\r") {
          save();
          state = CsvState.EatCrnl;
        } else if (ch === '"') {
          state = CsvState.InQuotedField;
        } else if (ch === ",") {
          save();
        } else {
          field += ch;
          state = CsvState.InField;
        }
        break;

      case CsvState.InField:
        if (ch === "\n") {
          save();
          return { fields, next: pos, linesConsumed: lines };
        }
        if (ch === "\r") {
          save();
          state = CsvState.EatCrnl;
        } else if (ch === ",") {
          save();
          state = CsvState.StartField;
        } else {
          field += ch;
        }
        break;

      case CsvState.InQuotedField:
        if (ch === '"') {
          state = CsvState.QuoteInQuotedField;
        } else {
          field += ch;
        }
        break;

      case CsvState.QuoteInQuotedField:
        if (ch === '"') {
          field += '"';
          state = CsvState.InQuotedField;
        } else if (ch === ",") {
          save();
          state = CsvState.StartField;
        } else if (ch === "\n") {
          save();
          return { fields, next: pos, linesConsumed: lines };
        } else if (ch === "\r") {
          save();
          state = CsvState.EatCrnl;
        } else {
          // Non-strict dialect: text after a closing quote joins the field.
          field += ch;
          state = CsvState.InField;
        }
        break;

      case CsvState.EatCrnl:
        if (ch === "\n") {
          return { fields, next: pos, linesConsumed: lines };
        }
        if (ch !== "\r") {
          throw new CsvParseError(
            "new-line character seen in unquoted field - " +
              "do you need to open the file in universal-newline mode?",
            lines,
          );
        }
        break;
    }
  }

  // End of input: an open record flushes its current field, matching the
  // non-strict reader (an unterminated quote yields the partial field).
  switch (state) {
    case CsvState.StartRecord:
      return null;
    case CsvState.EatCrnl:
      return { fields, next: pos, linesConsumed: lines + 1 };
    default:
      save();
      return { fields, next: pos, linesConsumed: lines + 1 };
  }
}

// ---------------------------------------------------------------------------
// Submission validation
// ---------------------------------------------------------------------------

export interface Problem {
  /** 1-based line number, or null for file-level problems. */
  line: number | null;
  message: string;
}

export interface Verdict {
  ok: boolean;
  /** Whether the file was rejected before any body row was considered. */
  headerRejected: boolean;
  problems: Problem[];
  /** Parsed rows when ok: epoch id -> [grade, probability]. */
  rows: Map<string, [number, number]>;
}

function reject(problems: Problem[], headerRejected: boolean): Verdict {
  return { ok: false, headerRejected, problems, rows: new Map() };
}

/**
 * Validate raw upload bytes.  Mirrors the service: a strict UTF-8 decode
 * that absorbs at most one byte-order mark, then {@link validateSubmissionText}.
 */
export function validateSubmissionBytes(
  payload: Uint8Array,
  testEpochIds: readonly string[],
): Verdict {
  let text: string;
  try {
    // fatal:true matches Python's strict decoder; TextDecoder also drops a
    // single leading BOM, which is exactly the utf-8-sig behaviour.
    text = new TextDecoder("utf-8", { fatal: true }).decode(payload);
  } catch {
    return reject([{ line: null, message: "file is not valid UTF-8" }], true);
  }
  return validateSubmissionText(text, testEpochIds);
}

/** Python's repr() for the strings that appear in service messages. */
function pyRepr(text: string): string {
  let body = "";
  for (const ch of text) {
    const code = ch.codePointAt(0)!;
    if (ch === "'" || ch === "\\") {
      body += "\\" + ch;
    } else if (ch === "\n") {
      body += "\\n";
    } else if (ch === "\r") {
      body += "\\r";
    } else if (ch === "\t") {
      body += "\\t";
    } else if (code < 0x20 || code === 0x7f) {
      body += "\\x" + code.toString(16).padStart(2, "0");
    } else {
      body += ch;
    }
  }
  return "'" + body + "'";
}

/** Python's int() over an already-stripped string. */
function pythonInt(text: string): number | null {
  if (!/^[+-]?\d+(_\d+)*$/.test(text)) {
    return null;
  }
  const value = Number(text.replace(/_/g, ""));
  return Number.isSafeInteger(value) ? value : null;
}

/** Python's float() over an already-stripped string; NaN is a valid parse. */
function pythonFloat(text: string): number | null {
  if (/^[+-]?(inf|infinity)$/i.test(text)) {
    return text.startsWith("-") ? -Infinity : Infinity;
  }
  if (/^[+-]?nan$/i.test(text)) {
    return NaN;
  }
  const plain = text.replace(/_(?=\d)/g, "");
  if (!/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(plain)) {
    return null;
  }
  return Number(plain);
}

/**
 * Validate decoded submission text against the expected test epoch ids.
 *
 * Header handling is the contractual part: the empty-file check, the CSV
 * parse of the first record, the per-cell strip, and the exact-match
 * comparison all reproduce the service, so every file the service rejects
 * for header reasons is rejected here too.
 */
export function validateSubmissionText(
  text: string,
  testEpochIds: readonly string[],
): Verdict {
  if (text.length === 0) {
    return reject([{ line: null, message: "file is empty" }], true);
  }

  let header: CsvRecord | null;
  try {
    header = readCsvRecord(text, 0);
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    return reject(
      [{ line: 1, message: `header row is not parseable CSV: ${message}` }],
      true,
    );
  }
  if (header === null) {
    return reject([{ line: null, message: "file is empty" }], true);
  }
  const cells = header.fields.map(pythonStrip);
  if (
    cells.length !== SUBMISSION_HEADER.length ||
    cells.some((cell, i) => cell !== SUBMISSION_HEADER[i])
  ) {
    return reject(
      [{ line: 1, message: `header must be '${SUBMISSION_HEADER.join(",")}'` }],
      true,
    );
  }

  // --- body rows: advisory mirror of the service's 422 problems ----------
  const expected = new Set(testEpochIds);
  const problems: Problem[] = [];
  const rows = new Map<string, [number, number]>();
  const seen = new Set<string>();
  let pos = header.next;
  let lineNum = header.linesConsumed;

  for (;;) {
    let record: CsvRecord | null;
    try {
      record = readCsvRecord(text, pos);
    } catch (error) {
      if (error instanceof CsvParseError) {
        problems.push({
          line: lineNum + error.linesConsumed + 1,
          message: `row is not parseable CSV: ${error.message}`,
        });
        break;
      }
      throw error;
    }
    if (record === null) {
      break;
    }
    pos = record.next;
    lineNum += record.linesConsumed;
    const line = lineNum;
    const stripped = record.fields.map(pythonStrip);
    if (record.fields.length === 0 || stripped.every((cell) => cell === "")) {
      continue;
    }
    if (record.fields.length !== 3) {
      problems.push({
        line,
        message: `expected 3 fields, got ${record.fields.length}`,
      });
      continue;
    }
    const [eid, gradeText, probText] = stripped as [string, string, string];
    if (eid === "") {
      problems.push({ line, message: "empty epoch id" });
      continue;
    }
    if (!expected.has(eid)) {
      problems.push({ line, message: `unknown epoch id ${pyRepr(eid)}` });
      continue;
    }
    if (seen.has(eid)) {
      problems.push({ line, message: `duplicate row for epoch ${pyRepr(eid)}` });
      continue;
    }
    seen.add(eid);
    const grade = pythonInt(gradeText);
    if (grade === null) {
      problems.push({
        line,
        message: `grade must be an integer, got ${pyRepr(gradeText)}`,
      });
      continue;
    }
    if (!(GRADES as readonly number[]).includes(grade)) {
      problems.push({ line, message: `grade ${grade} outside 1-4` });
      continue;
    }
    const probability = pythonFloat(probText);
    if (probability === null) {
      problems.push({
        line,
        message: `probability must be a number, got ${pyRepr(probText)}`,
      });
      continue;
    }
    if (!(probability >= 0 && probability <= 1)) {
      problems.push({
        line,
        message: `probability ${probability} outside [0, 1]`,
      });
      continue;
    }
    rows.set(eid, [grade, probability]);
  }

  const missing = [...expected].filter((eid) => !seen.has(eid)).sort();
  if (missing.length > 0) {
    problems.push({ line: null, message: `missing epochs: ${missing.join(", ")}` });
  }
  if (problems.length > 0) {
    return { ok: false, headerRejected: false, problems, rows: new Map() };
  }
  return { ok: true, headerRejected: false, problems: [], rows };
}

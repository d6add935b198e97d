/**
 * JSON parsing that preserves number literals exactly as they appear on the
 * wire.
 *
 * The leaderboard promises that every figure shown on screen is the byte
 * sequence the API sent, not a round-trip through a float.  `JSON.parse`
 * destroys that information (and the reviver has no access to the source
 * text on the runtimes we target), so this module implements a small
 * recursive-descent parser whose numbers are {@link RawNumber} objects
 * carrying both the literal and its numeric value.
 */

/** A JSON number that remembers its exact source text. */
export class RawNumber {
  constructor(
    /** The literal as it appeared in the payload, e.g. "0.8333333333333334". */
    readonly raw: string,
    /** The numeric value, for comparisons and sorting. */
    readonly value: number,
  ) {}

  toString(): string {
    return this.raw;
  }

  toJSON(): number {
    return this.value;
  }
}

export type JsonValue =
  | null
  | boolean
  | string
  | RawNumber
  | JsonValue[]
  | JsonObject;

export interface JsonObject {
  [key: string]: JsonValue;
}

const NUMBER_RE = /-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][+-]?\d+)?/y;
const WS = new Set([" ", "\t", "\n", "\r"]);

class Parser {
  private pos = 0;

  constructor(private readonly text: string) {}

  parseDocument(): JsonValue {
    this.skipWs();
    const value = this.parseValue();
    this.skipWs();
    if (this.pos !== this.text.length) {
      throw this.fail("unexpected trailing characters");
    }
    return value;
  }

  private fail(message: string): Error {
    return new Error(`invalid JSON at offset ${this.pos}: ${message}`);
  }

  private skipWs(): void {
    while (this.pos < this.text.length && WS.has(this.text[this.pos]!)) {
      this.pos += 1;
    }
  }

  private peek(): string {
    if (this.pos >= this.text.length) {
      throw this.fail("unexpected end of input");
    }
    return this.text[this.pos]!;
  }

  private expect(ch: string): void {
    if (this.peek() !== ch) {
      throw this.fail(`expected ${JSON.stringify(ch)}`);
    }
    this.pos += 1;
  }

  private literal(word: string): void {
    if (this.text.startsWith(word, this.pos)) {
      this.pos += word.length;
      return;
    }
    throw this.fail(`expected ${JSON.stringify(word)}`);
  }

  private parseValue(): JsonValue {
    const ch = this.peek();
    switch (ch) {
      case "{":
        return this.parseObject();
      case "[":
        return this.parseArray();
      case '"':
        return this.parseString();
      case "t":
        this.literal("true");
        return true;
      case "f":
        this.literal("false");
        return false;
      case "n":
        this.literal("null");
        return null;
      default:
        return this.parseNumber();
    }
  }

  private parseNumber(): RawNumber {
    NUMBER_RE.lastIndex = this.pos;
    const match = NUMBER_RE.exec(this.text);
    if (match === null || match.index !== this.pos) {
      throw this.fail("expected a value");
    }
    this.pos += match[0].length;
    return new RawNumber(match[0], Number(match[0]));
  }

  private parseString(): string {
    this.expect('"');
    let out = "";
    for (;;) {
      if (this.pos >= this.text.length) {
        throw this.fail("unterminated string");
      }
      const ch = this.text[this.pos]!;
      this.pos += 1;
      if (ch === '"') {
        return out;
      }
      if (ch === "\\") {
        out += this.parseEscape();
        continue;
      }
      if (ch.charCodeAt(0) < 0x20) {
        throw this.fail("unescaped control character in string");
      }
      out += ch;
    }
  }

  private parseEscape(): string {
    if (this.pos >= this.text.length) {
      throw this.fail("unterminated escape");
    }
    const ch = this.text[this.pos]!;
    this.pos += 1;
    switch (ch) {
      case '"':
        return '"';
      case "\\":
        return "\\";
      case "/":
        return "/";
      case "b":
        return "\b";
      case "f":
        return "\f";
      case "n":
        return "\n";
      case "r":
        return "\r";
      case "t":
        return "\t";
      case "u": {
        const hex = this.text.slice(this.pos, this.pos + 4);
        if (!/^[0-9a-fA-F]{4}$/.test(hex)) {
          throw this.fail("invalid \\u escape");
        }
        this.pos += 4;
        return String.fromCharCode(parseInt(hex, 16));
      }
      default:
        throw this.fail(`invalid escape \\${ch}`);
    }
  }

  private parseArray(): JsonValue[] {
    this.expect("[");
    const items: JsonValue[] = [];
    this.skipWs();
    if (this.peek() === "]") {
      this.pos += 1;
      return items;
    }
    for (;;) {
      this.skipWs();
      items.push(this.parseValue());
      this.skipWs();
      const ch = this.peek();
      if (ch === ",") {
        this.pos += 1;
        continue;
      }
      if (ch === "]") {
        this.pos += 1;
        return items;
      }
      throw this.fail("expected ',' or ']'");
    }
  }

  private parseObject(): JsonObject {
    this.expect("{");
    const out: JsonObject = {};
    this.skipWs();
    if (this.peek() === "}") {
      this.pos += 1;
      return out;
    }
    for (;;) {
      this.skipWs();
      const key = this.parseString();
      this.skipWs();
      this.expect(":");
      this.skipWs();
      out[key] = this.parseValue();
      this.skipWs();
      const ch = this.peek();
      if (ch === ",") {
        this.pos += 1;
        continue;
      }
      if (ch === "}") {
        this.pos += 1;
        return out;
      }
      throw this.fail("expected ',' or '}'");
    }
  }
}

/** Parse a JSON document, representing every number as a {@link RawNumber}. */
export function parseWithRawNumbers(text: string): JsonValue {
  return new Parser(text).parseDocument();
}

/**
 * The display form of a payload value: number literals verbatim, strings as
 * themselves, booleans spelled out, and null/undefined as an em dash.
 */
export function displayText(value: JsonValue | undefined): string {
  if (value === undefined || value === null) {
    return "—";
  }
  if (value instanceof RawNumber) {
    return value.raw;
  }
  if (typeof value === "string") {
    return value;
  }
  if (typeof value === "boolean") {
    return value ? "true" : "false";
  }
  throw new Error("no scalar display form for arrays or objects");
}

export function asObject(value: JsonValue | undefined, what: string): JsonObject {
  if (value === null || typeof value !== "object" || Array.isArray(value) || value instanceof RawNumber) {
    throw new Error(`expected ${what} to be an object`);
  }
  return value;
}

export function asArray(value: JsonValue | undefined, what: string): JsonValue[] {
  if (!Array.isArray(value)) {
    throw new Error(`expected ${what} to be an array`);
  }
  return value;
}

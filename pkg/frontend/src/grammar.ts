/** Client-side validation of dictionary rule lines.
 *
 * Mirrors the server's file grammar so the workbench can flag mistakes
 * while typing, with a character position for the inline marker:
 *
 *     (fake | counterfeit) neural organization -> artificial neural network
 *
 * Parenthesized groups are slots with `|`-separated alternatives, bare
 * words are single-alternative slots, and a rule needs at least two
 * slots. Trailing `@id=` / `@note=` tags are lifted into the proposal
 * body; `@candidate` is redundant (proposals always start as
 * candidates) and `@confirmed` is rejected because promotion is a
 * separate, audited step. The server revalidates everything.
 */

export interface Proposal {
  pattern: string;
  expected: string;
  id: string;
  note: string;
}

export type GrammarCheck =
  | { ok: true; proposal: Proposal }
  | { ok: false; message: string; position: number };

function fail(message: string, position: number): GrammarCheck {
  return { ok: false, message, position };
}

/** True when the text still has a token after normalization (any letter or digit). */
function hasSubstance(text: string): boolean {
  return /[\p{L}\p{N}]/u.test(text);
}

interface SlotScan {
  count: number;
  error?: { message: string; position: number };
}

function scanSlots(pattern: string): SlotScan {
  let count = 0;
  let i = 0;
  while (i < pattern.length) {
    const ch = pattern[i]!;
    if (/\s/.test(ch)) {
      i += 1;
    } else if (ch === "(") {
      const close = pattern.indexOf(")", i);
      if (close < 0) {
        return { count, error: { message: "unbalanced parenthesis", position: i } };
      }
      let altStart = i + 1;
      for (const alt of pattern.slice(i + 1, close).split("|")) {
        if (!hasSubstance(alt)) {
          return { count, error: { message: "empty alternative", position: altStart } };
        }
        altStart += alt.length + 1;
      }
      count += 1;
      i = close + 1;
    } else if (ch === ")") {
      return { count, error: { message: "unbalanced parenthesis", position: i } };
    } else {
      let j = i;
      while (j < pattern.length && !/[\s()]/.test(pattern[j]!)) j += 1;
      if (!hasSubstance(pattern.slice(i, j))) {
        return { count, error: { message: "empty alternative", position: i } };
      }
      count += 1;
      i = j;
    }
  }
  return { count };
}

const TAG_START = /\s@(?=candidate\b|confirmed\b|id=|note=)/u;

export function validateRuleLine(line: string): GrammarCheck {
  const first = line.indexOf("->");
  if (first < 0) {
    return fail("expected a '->' separator between pattern and wording", line.length);
  }
  const second = line.indexOf("->", first + 2);
  if (second >= 0) {
    return fail("expected exactly one '->' separator", second);
  }

  const patternSrc = line.slice(0, first);
  const scan = scanSlots(patternSrc);
  if (scan.error) {
    return fail(scan.error.message, scan.error.position);
  }
  if (scan.count < 2) {
    return fail("pattern needs at least two slots", 0);
  }

  const rhs = line.slice(first + 2);
  const rhsBase = first + 2;
  const tagMatch = TAG_START.exec(rhs);
  const expected = (tagMatch ? rhs.slice(0, tagMatch.index) : rhs).trim();

  let id = "";
  let note = "";
  let tagSrc = tagMatch ? rhs.slice(tagMatch.index).trim() : "";
  let tagPos = tagMatch ? rhsBase + tagMatch.index + (rhs.slice(tagMatch.index).length - rhs.slice(tagMatch.index).trimStart().length) : 0;
  while (tagSrc) {
    if (tagSrc.startsWith("@note=")) {
      note = tagSrc.slice("@note=".length).trim();
      tagSrc = "";
    } else if (tagSrc.startsWith("@candidate")) {
      tagSrc = tagSrc.slice("@candidate".length).trimStart();
      tagPos = line.length - tagSrc.length;
    } else if (tagSrc.startsWith("@confirmed")) {
      return fail("proposals start as candidates; promote after review", tagPos);
    } else if (tagSrc.startsWith("@id=")) {
      const rest = tagSrc.slice("@id=".length);
      const idToken = rest.split(/\s+/, 1)[0] ?? "";
      if (!idToken) {
        return fail("empty @id tag", tagPos);
      }
      id = idToken;
      tagSrc = rest.slice(idToken.length).trimStart();
      tagPos = line.length - tagSrc.length;
    } else {
      return fail(`unknown tag near '${tagSrc.split(/\s/, 1)[0]}'`, tagPos);
    }
  }

  if (!expected) {
    return fail("missing expected wording", rhsBase);
  }
  for (const token of expected.split(/\s+/)) {
    if (token.startsWith("@")) {
      return fail(`unknown tag near '${token}'`, rhsBase + rhs.indexOf(token));
    }
  }

  return { ok: true, proposal: { pattern: patternSrc.trim(), expected, id, note } };
}

/** Tiny HTML-string helpers shared by the views. */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Context line with the matched span wrapped in <mark>. */
export function highlightContext(context: string, span: [number, number]): string {
  const [start, end] = span;
  if (start < 0 || end > context.length || start >= end) {
    return esc(context);
  }
  return (
    esc(context.slice(0, start)) +
    "<mark>" +
    esc(context.slice(start, end)) +
    "</mark>" +
    esc(context.slice(end))
  );
}

/** Numbers straight off the wire; the UI never reformats beyond String(). */
export function num(value: number | null | undefined): string {
  return value === null || value === undefined ? "" : String(value);
}

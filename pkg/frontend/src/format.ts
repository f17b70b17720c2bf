// Every number shown anywhere in the UI goes through display(): the server
// already serializes with six significant digits, so String(v) reproduces
// the wire value verbatim. No rounding, no abs, no arithmetic here.

export function display(v: number | null | undefined): string {
  if (v === null || v === undefined) return "--";
  return String(v);
}

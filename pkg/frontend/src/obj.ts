/** Wavefront OBJ export, byte-compatible with the reference exporter:
 * one ``v x y z`` line per node with %.9g coordinate formatting, then one
 * 1-indexed ``l i j`` line per bar, joined by \n with a trailing newline. */
import { Bar } from "./topology.js";
import { Vec3 } from "./types.js";

/**
 * printf %.9g for a finite double: 9 significant digits, trailing zeros
 * stripped, scientific notation when the decimal exponent is < -4 or >= 9
 * with a sign and at least two exponent digits.
 */
export function formatG9(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`cannot format non-finite value ${x}`);
  if (x === 0) return Object.is(x, -0) ? "-0" : "0";

  // toExponential(8) rounds the double to 9 significant decimal digits and
  // exposes the decimal exponent; build both layouts from its digits so the
  // value is rounded exactly once.
  const [mantissa, expText] = x.toExponential(8).split("e") as [string, string];
  const exp = parseInt(expText, 10);
  const negative = mantissa.startsWith("-");
  const digits = mantissa.replace("-", "").replace(".", ""); // 9 digits

  let body: string;
  if (exp < -4 || exp >= 9) {
    const trimmed = digits.replace(/0+$/, "");
    body = trimmed.length > 1 ? `${trimmed[0]}.${trimmed.slice(1)}` : trimmed;
    const sign = exp < 0 ? "-" : "+";
    body += `e${sign}${String(Math.abs(exp)).padStart(2, "0")}`;
  } else if (exp >= 0) {
    const whole = digits.slice(0, exp + 1);
    const frac = digits.slice(exp + 1).replace(/0+$/, "");
    body = frac.length > 0 ? `${whole}.${frac}` : whole;
  } else {
    const frac = `${"0".repeat(-exp - 1)}${digits}`.replace(/0+$/, "");
    body = `0.${frac}`;
  }
  return negative ? `-${body}` : body;
}

export function exportObj(positions: Vec3[], bars: Bar[]): string {
  const lines: string[] = [];
  for (const [x, y, z] of positions) {
    lines.push(`v ${formatG9(x)} ${formatG9(y)} ${formatG9(z)}`);
  }
  for (const [i, j] of bars) {
    lines.push(`l ${i + 1} ${j + 1}`);
  }
  return lines.join("\n") + "\n";
}

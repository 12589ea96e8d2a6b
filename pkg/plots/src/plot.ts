/**
 * Deterministic semilog-y SVG rendering of BER-vs-SNR curves.
 *
 * The y axis is clipped to [1e-6, 1]; points with BER <= 0 cannot be placed
 * on a log scale and are dropped from the drawn series (a fixed frame budget
 * that produced zero errors carries no curve information anyway).
 */

export type Role = "sim" | "num";

export interface Curve {
  label: string;
  role: Role;
  points: [number, number][]; // [snr_db, ber]
}

export const Y_MIN = 1e-6;
export const Y_MAX = 1.0;

const WIDTH = 640;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];

function clampBer(ber: number): number {
  return Math.min(Y_MAX, Math.max(Y_MIN, ber));
}

function fmt(x: number): string {
  return x.toFixed(2);
}

/**
 * Largest vertical distance, in decades of BER, between two curves at the
 * SNR points they share.  Returns null when they share no points.
 */
export function maxGapDecades(
  a: [number, number][],
  b: [number, number][],
): number | null {
  const bBySnr = new Map(b.map(([x, y]) => [x, y]));
  let worst: number | null = null;
  for (const [x, ya] of a) {
    const yb = bBySnr.get(x);
    if (yb === undefined || ya <= 0 || yb <= 0) {
      continue;
    }
    const gap = Math.abs(Math.log10(ya) - Math.log10(yb));
    if (worst === null || gap > worst) {
      worst = gap;
    }
  }
  return worst;
}

export function renderSvg(curves: Curve[], title: string): string {
  const drawable = curves
    .map((c) => ({
      ...c,
      points: c.points.filter(([, y]) => y > 0),
    }))
    .filter((c) => c.points.length > 0);

  const xs = drawable.flatMap((c) => c.points.map(([x]) => x));
  const xMin = xs.length ? Math.min(...xs) : 0;
  const xMax = xs.length ? Math.max(...xs) : 1;
  const xSpan = xMax > xMin ? xMax - xMin : 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const xPix = (x: number) => MARGIN.left + ((x - xMin) / xSpan) * plotW;
  const yPix = (y: number) =>
    MARGIN.top +
    (Math.log10(Y_MAX) - Math.log10(clampBer(y))) /
      (Math.log10(Y_MAX) - Math.log10(Y_MIN)) *
      plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${title}</text>`,
  );

  // y grid: one line per decade
  for (let exp = 0; exp >= Math.log10(Y_MIN); exp -= 1) {
    const y = yPix(10 ** exp);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(y)}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">1e${exp}</text>`,
    );
  }

  // x ticks at the data SNR points
  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  for (const tick of xTicks) {
    const x = xPix(tick);
    parts.push(
      `<line x1="${fmt(x)}" y1="${HEIGHT - MARGIN.bottom}" x2="${fmt(x)}" y2="${HEIGHT - MARGIN.bottom + 5}" stroke="#000"/>`,
      `<text x="${fmt(x)}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" font-size="11">${tick}</text>`,
    );
  }

  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#000"/>`,
    `<text x="${WIDTH / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">average SNR per bit (dB)</text>`,
    `<text x="18" y="${HEIGHT / 2}" text-anchor="middle" font-size="13" transform="rotate(-90 18 ${HEIGHT / 2})">BER</text>`,
  );

  drawable.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const dash = curve.role === "num" ? ' stroke-dasharray="6 3"' : "";
    const path = curve.points
      .map(([x, y], j) => `${j === 0 ? "M" : "L"}${fmt(xPix(x))} ${fmt(yPix(y))}`)
      .join(" ");
    parts.push(
      `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`,
    );
    if (curve.role === "sim") {
      for (const [x, y] of curve.points) {
        parts.push(
          `<circle cx="${fmt(xPix(x))}" cy="${fmt(yPix(y))}" r="3" fill="${color}"/>`,
        );
      }
    }
    const ly = MARGIN.top + 16 + i * 18;
    const lx = WIDTH - MARGIN.right - 190;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 28}" y2="${ly - 4}" stroke="${color}" stroke-width="1.5"${dash}/>`,
      `<text x="${lx + 34}" y="${ly}" font-size="12">${curve.label} (${curve.role}.)</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Minimal SVG document builder: elements in, serialized markup out. */

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeText(s: string): string {
  return s.replace(/[&<>"]/g, (c) => ESCAPES[c]);
}

export type Attrs = Record<string, string | number>;

function attrString(attrs: Attrs): string {
  return Object.entries(attrs)
    .map(([k, v]) => ` ${k}="${escapeText(String(v))}"`)
    .join("");
}

export class SvgDocument {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  element(tag: string, attrs: Attrs, text?: string): this {
    if (text === undefined) {
      this.parts.push(`<${tag}${attrString(attrs)}/>`);
    } else {
      this.parts.push(`<${tag}${attrString(attrs)}>${escapeText(text)}</${tag}>`);
    }
    return this;
  }

  path(d: string, attrs: Attrs): this {
    return this.element("path", { d, ...attrs });
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs): this {
    return this.element("line", { x1, y1, x2, y2, ...attrs });
  }

  circle(cx: number, cy: number, r: number, attrs: Attrs): this {
    return this.element("circle", { cx, cy, r, ...attrs });
  }

  text(x: number, y: number, content: string, attrs: Attrs = {}): this {
    return this.element(
      "text",
      { x, y, "font-family": "sans-serif", ...attrs },
      content,
    );
  }

  polyline(points: [number, number][], attrs: Attrs): this {
    const pts = points.map(([x, y]) => `${x},${y}`).join(" ");
    return this.element("polyline", { points: pts, fill: "none", ...attrs });
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">`,
      `<rect width="${this.width}" height="${this.height}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/** Simple linear scale from a data domain onto a pixel range. */
export function linearScale(
  [d0, d1]: [number, number],
  [r0, r1]: [number, number],
): (x: number) => number {
  const k = (r1 - r0) / (d1 - d0);
  return (x: number) => r0 + (x - d0) * k;
}

/** Log-10 scale from a positive data domain onto a pixel range. */
export function logScale(
  [d0, d1]: [number, number],
  [r0, r1]: [number, number],
): (x: number) => number {
  const lin = linearScale([Math.log10(d0), Math.log10(d1)], [r0, r1]);
  return (x: number) => lin(Math.log10(x));
}

/** Least-squares slope and intercept of y against x. */
export function fitSlope(x: number[], y: number[]): { slope: number; intercept: number } {
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) ** 2;
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}

// Inline LaTeX rendering for submissions and tutor answers. Uses a
// KaTeX-compatible renderer when one is available; any rendering failure
// falls back to the raw text so content is never lost.

export interface MathRenderer {
  renderToString(tex: string): string;
}

export interface TextSegment {
  kind: 'text' | 'math';
  content: string;
}

// split on $...$ delimiters; unbalanced delimiters are treated as plain text
export function segmentMath(text: string): TextSegment[] {
  const segments: TextSegment[] = [];
  let rest = text;
  for (;;) {
    const open = rest.indexOf('$');
    if (open < 0) break;
    const close = rest.indexOf('$', open + 1);
    if (close < 0) break;
    if (open > 0) segments.push({ kind: 'text', content: rest.slice(0, open) });
    segments.push({ kind: 'math', content: rest.slice(open + 1, close) });
    rest = rest.slice(close + 1);
  }
  if (rest) segments.push({ kind: 'text', content: rest });
  return segments;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;');
}

export function renderWithMath(text: string, renderer?: MathRenderer): string {
  const active = renderer ?? (globalThis as { katex?: MathRenderer }).katex;
  return segmentMath(text)
    .map((seg) => {
      if (seg.kind === 'text' || !active) {
        return escapeHtml(seg.kind === 'math' ? `$${seg.content}$` : seg.content);
      }
      try {
        return active.renderToString(seg.content);
      } catch {
        return escapeHtml(`$${seg.content}$`); // fall back to raw text
      }
    })
    .join('');
}

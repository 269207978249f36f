/** Renders the server's Dirac text with its position annotations as
 * nested clickable elements. The text itself is never re-derived or
 * edited here; spans arrive from the server and clicking the element
 * for position p reports exactly p. */

import type { Span } from "./api.js";

interface SpanNode {
  span: Span | null;
  start: number;
  end: number;
  children: SpanNode[];
}

function buildTree(length: number, spans: Span[]): SpanNode {
  const root: SpanNode = { span: null, start: 0, end: length, children: [] };
  const ordered = [...spans].sort(
    (a, b) =>
      a.start - b.start ||
      (b.end - b.start) - (a.end - a.start) ||
      a.position.length - b.position.length,
  );
  const stack: SpanNode[] = [root];
  for (const span of ordered) {
    const node: SpanNode = {
      span, start: span.start, end: span.end, children: [],
    };
    while (stack.length > 1) {
      const top = stack[stack.length - 1]!;
      if (top.start <= span.start && span.end <= top.end) {
        break;
      }
      stack.pop();
    }
    stack[stack.length - 1]!.children.push(node);
    stack.push(node);
  }
  return root;
}

function emit(
  doc: Document,
  text: string,
  node: SpanNode,
  selected: string | null,
  onSelect: (position: string) => void,
): HTMLElement | DocumentFragment {
  const el = node.span
    ? doc.createElement("span")
    : doc.createDocumentFragment();
  if (node.span && el instanceof HTMLElement) {
    el.className = "pos" + (node.span.position === selected ? " selected" : "");
    el.dataset.pos = node.span.position;
    el.addEventListener("click", (event) => {
      event.stopPropagation();
      onSelect(node.span!.position);
    });
  }
  let cursor = node.start;
  for (const child of node.children) {
    if (child.start > cursor) {
      el.appendChild(doc.createTextNode(text.slice(cursor, child.start)));
    }
    el.appendChild(emit(doc, text, child, selected, onSelect));
    cursor = child.end;
  }
  if (cursor < node.end) {
    el.appendChild(doc.createTextNode(text.slice(cursor, node.end)));
  }
  return el;
}

export function renderTerm(
  container: HTMLElement,
  dirac: string,
  spans: Span[],
  selected: string | null,
  onSelect: (position: string) => void,
): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  const tree = buildTree(dirac.length, spans);
  container.appendChild(emit(doc, dirac, tree, selected, onSelect));
}

/** Highlights a byte range of the offending input under a parse error. */
export function renderErrorText(
  container: HTMLElement,
  source: string,
  span: [number, number] | null,
): void {
  container.textContent = "";
  if (span === null || span[0] >= source.length) {
    container.textContent = source;
    return;
  }
  const doc = container.ownerDocument;
  const [start, rawEnd] = span;
  const end = Math.max(rawEnd, start + 1);
  container.appendChild(doc.createTextNode(source.slice(0, start)));
  const bad = doc.createElement("span");
  bad.className = "error-span";
  bad.textContent = source.slice(start, end);
  container.appendChild(bad);
  container.appendChild(doc.createTextNode(source.slice(end)));
}

import type { View, ViewCell } from './types.js';

export interface Handlers {
  onRun(label: string): void;
  onBack(): void;
  onReset(): void;
  onInsert(position: number, kind: 'code' | 'text'): void;
  onDelete(position: number): void;
  onJump(label: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function button(className: string, text: string, onClick: () => void): HTMLButtonElement {
  const b = el('button', className, text);
  b.type = 'button';
  b.addEventListener('click', onClick);
  return b;
}

function renderCell(cell: ViewCell, position: number, view: View, handlers: Handlers) {
  const root = el('article', `cell color-${cell.color} kind-${cell.kind}`);
  root.id = `cell-${cell.label}`;
  root.dataset.label = cell.label;
  root.dataset.color = cell.color;

  const head = el('header', 'cell-head');
  head.append(el('span', 'badge', cell.emoji), el('span', 'cell-label', cell.label));
  if (cell.kind === 'code') {
    head.append(button('run', 'Run', () => handlers.onRun(cell.label)));
  }
  head.append(
    button('insert-below', '+ cell', () => handlers.onInsert(position + 1, 'code')),
    button('delete', 'Delete', () => handlers.onDelete(position)),
  );
  root.append(head);

  const source = el('pre', 'source', cell.source);
  root.append(source);

  // Jump buttons live on the last executed cell so the next steps are
  // reachable without scrolling around.
  if (cell.is_last_executed && view.next_cells.length > 0) {
    const bar = el('nav', 'jump-bar');
    bar.append(el('span', 'jump-caption', 'next:'));
    for (const target of view.next_cells) {
      const jump = button('jump', target, () => handlers.onJump(target));
      jump.dataset.target = target;
      bar.append(jump);
    }
    root.append(bar);
  }
  return root;
}

/** Rebuild the notebook DOM from a view; the view is the single source of truth. */
export function render(root: HTMLElement, view: View, handlers: Handlers): void {
  root.textContent = '';

  const toolbar = el('div', 'toolbar');
  toolbar.append(
    button('back', 'Back', handlers.onBack),
    button('reset', 'Reset', handlers.onReset),
    el('span', 'version', `v${view.version}`),
  );
  root.append(toolbar);

  if (view.complete && view.next_cells.length === 0) {
    root.append(el('div', 'banner complete-banner', 'Scenario complete ✓'));
  }

  const notebook = el('section', 'notebook');
  view.cells.forEach((cell, position) => {
    notebook.append(renderCell(cell, position, view, handlers));
  });
  root.append(notebook);
}

const TOAST_MS = 4000;

/** Inline, transient error display (e.g. forbidden deletions). */
export function showError(root: HTMLElement, message: string): void {
  const toast = el('div', 'toast error-toast', message);
  root.append(toast);
  setTimeout(() => toast.remove(), TOAST_MS);
}

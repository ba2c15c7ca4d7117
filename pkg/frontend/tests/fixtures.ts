import type { Color, View, ViewCell } from '../src/types.js';

const EMOJI: Record<Color, string> = {
  green: '▶',
  orange: '✔',
  red: '⛔',
  white: '✏',
};

export function cell(
  label: string,
  color: Color,
  overrides: Partial<ViewCell> = {},
): ViewCell {
  return {
    label,
    kind: label.startsWith('C') ? 'code' : 'text',
    source: `source of ${label}`,
    color,
    emoji: EMOJI[color],
    is_last_executed: false,
    ...overrides,
  };
}

export function view(cells: ViewCell[], overrides: Partial<View> = {}): View {
  return {
    session_id: 'fixture-session',
    version: 1,
    complete: false,
    cells,
    next_cells: [],
    ...overrides,
  };
}

/** State of the screen right after the linear part of the walkthrough. */
export function walkthroughView(): View {
  return view(
    [
      cell('T0', 'orange'),
      cell('C1', 'orange'),
      cell('T2', 'white'),
      cell('C3', 'orange'),
      cell('C5', 'orange'),
      cell('C7', 'orange', { is_last_executed: true }),
      cell('T9', 'green'),
      cell('C10', 'green'),
      cell('C12', 'green'),
      cell('C14', 'red'),
      cell('C16', 'green'),
      cell('C18', 'red'),
    ],
    { version: 8, next_cells: ['C10', 'C12', 'C16'] },
  );
}

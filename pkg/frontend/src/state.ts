/** Viewport state and pure view derivation.
 *
 * The rendered grid is a pure function of (last window response, pending
 * edit); there is no client-side cell cache to diverge. Stale revisions
 * trigger a refetch.
 */

import type { CellView, OverlayEntry, WindowResponse } from "./api.js";

export interface ViewportState {
  top: number;
  left: number;
  rows: number;
  cols: number;
  revision: number;
  pendingEdit: { row: number; col: number; text: string } | null;
}

export interface WindowRequest {
  top: number;
  left: number;
  rows: number;
  cols: number;
}

export const ROW_HEIGHT = 24;
export const OVERSCAN = 5;

export function initialViewport(rows = 30, cols = 20): ViewportState {
  return { top: 1, left: 1, rows, cols, revision: -1, pendingEdit: null };
}

/** Window to request for a scroll offset, with overscan, clipped to the
 * sheet. Every fetch derives from the viewport through this function. */
export function windowRequest(
  state: ViewportState,
  sheetRows: number,
  sheetCols: number,
): WindowRequest {
  const top = Math.max(1, Math.min(state.top - OVERSCAN, Math.max(1, sheetRows - state.rows + 1)));
  const rows = Math.min(state.rows + 2 * OVERSCAN, Math.max(1, sheetRows - top + 1));
  const left = Math.max(1, Math.min(state.left, Math.max(1, sheetCols - state.cols + 1)));
  const cols = Math.min(state.cols, Math.max(1, sheetCols - left + 1));
  return { top, left, rows, cols };
}

export function topRowForScroll(scrollTop: number): number {
  return Math.floor(scrollTop / ROW_HEIGHT) + 1;
}

export function scrollForRow(row: number): number {
  return (row - 1) * ROW_HEIGHT;
}

export interface DerivedCell {
  display: string;
  formula: string | null;
  error: boolean;
  pending: boolean;
  kind: OverlayEntry["kind"] | null;
}

/** Owner lookup for overlay tinting. */
export function overlayKindAt(
  overlay: OverlayEntry[] | null,
  row: number,
  col: number,
): OverlayEntry["kind"] | null {
  if (!overlay) {
    return null;
  }
  for (const entry of overlay) {
    if (row >= entry.top && row <= entry.bottom && col >= entry.left && col <= entry.right) {
      return entry.kind;
    }
  }
  return null;
}

/** The visible grid, derived purely from the last response plus the pending
 * edit (echoed optimistically until the server confirms). */
export function deriveGrid(
  response: WindowResponse,
  pending: ViewportState["pendingEdit"],
  showOverlay: boolean,
): DerivedCell[][] {
  const out: DerivedCell[][] = [];
  for (let r = 0; r < response.rows; r += 1) {
    const row: DerivedCell[] = [];
    const displayRow = response.top + r;
    for (let c = 0; c < response.cols; c += 1) {
      const displayCol = response.left + c;
      const cell: CellView = response.cells[r][c];
      const isError =
        typeof cell.value === "object" && cell.value !== null && "error" in cell.value;
      const isPending =
        pending !== null && pending.row === displayRow && pending.col === displayCol;
      row.push({
        display: isPending ? pending.text : cell.display,
        formula: cell.formula ?? null,
        error: isError,
        pending: isPending,
        kind: showOverlay
          ? overlayKindAt(response.decomposition, displayRow, displayCol)
          : null,
      });
    }
    out.push(row);
  }
  return out;
}

export function needsRefetch(state: ViewportState, latestRevision: number): boolean {
  return latestRevision !== state.revision;
}

/** Clip a full decomposition to a window, for overlay comparison. */
export function clipOverlay(
  entries: OverlayEntry[],
  top: number,
  left: number,
  bottom: number,
  right: number,
): OverlayEntry[] {
  return entries.filter(
    (e) => !(e.bottom < top || e.top > bottom || e.right < left || e.left > right),
  );
}

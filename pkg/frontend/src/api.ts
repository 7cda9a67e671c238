/** Typed client for the gridstore HTTP API. */

export interface CellView {
  value: number | string | boolean | null | { error: string };
  display: string;
  formula?: string;
}

export interface OverlayEntry {
  top: number;
  left: number;
  bottom: number;
  right: number;
  kind: "ROM" | "COM" | "RCV" | "TOM";
  table: string | null;
}

export interface WindowResponse {
  top: number;
  left: number;
  rows: number;
  cols: number;
  cells: CellView[][];
  sheet_rows: number;
  sheet_cols: number;
  decomposition: OverlayEntry[];
  revision: number;
}

export interface SheetInfo {
  name: string;
  rows: number;
  cols: number;
  revision: number;
}

export interface OptimizeResult {
  entries: OverlayEntry[];
  cost: number;
  algorithm: string;
  elapsed_ms: number;
  migrated_cells: number;
  revision: number;
}

export interface ChangedCell {
  ref: string;
  value: CellView["value"];
  display: string;
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class GridApi {
  constructor(private base: string = "") {}

  listSheets(): Promise<SheetInfo[]> {
    return request(`${this.base}/sheets`);
  }

  createSheet(name: string, rows?: number, cols?: number): Promise<SheetInfo> {
    return request(`${this.base}/sheets`, {
      method: "POST",
      body: JSON.stringify({ name, rows, cols }),
    });
  }

  window(
    sheet: string,
    top: number,
    left: number,
    rows: number,
    cols: number,
  ): Promise<WindowResponse> {
    const params = new URLSearchParams({
      top: String(top),
      left: String(left),
      rows: String(rows),
      cols: String(cols),
    });
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/window?${params}`);
  }

  putCell(
    sheet: string,
    ref: string,
    content: string | number | boolean | null,
  ): Promise<{ changed: ChangedCell[]; revision: number }> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/cells/${ref}`, {
      method: "PUT",
      body: JSON.stringify({ content }),
    });
  }

  insertRowAfter(sheet: string, after: number): Promise<{ rows: number; revision: number }> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/rows`, {
      method: "POST",
      body: JSON.stringify({ after }),
    });
  }

  deleteRow(sheet: string, row: number): Promise<{ rows: number; revision: number }> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/rows/${row}`, {
      method: "DELETE",
    });
  }

  insertColumnAfter(sheet: string, after: number): Promise<{ cols: number; revision: number }> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/columns`, {
      method: "POST",
      body: JSON.stringify({ after }),
    });
  }

  deleteColumn(sheet: string, col: number): Promise<{ cols: number; revision: number }> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/columns/${col}`, {
      method: "DELETE",
    });
  }

  optimize(sheet: string, algorithm: string, eta?: number): Promise<OptimizeResult> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/optimize`, {
      method: "POST",
      body: JSON.stringify({ algorithm, eta: eta ?? null }),
    });
  }

  stats(sheet: string): Promise<Record<string, unknown>> {
    return request(`${this.base}/sheets/${encodeURIComponent(sheet)}/stats`);
  }
}

/** Bijective base-26 column label: 1 -> A, 27 -> AA. */
export function columnLabel(col: number): string {
  let label = "";
  while (col > 0) {
    const rem = (col - 1) % 26;
    label = String.fromCharCode(65 + rem) + label;
    col = Math.floor((col - 1) / 26);
  }
  return label;
}

export function cellRef(row: number, col: number): string {
  return `${columnLabel(col)}${row}`;
}

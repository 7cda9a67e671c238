/** Virtualized grid component: renders only the visible window, maps the
 * scrollbar to the full row space, edits in place, and tints cells by their
 * owning table model when the overlay is on. */

import { ApiError, GridApi, WindowResponse, cellRef, columnLabel } from "./api.js";
import {
  ROW_HEIGHT,
  ViewportState,
  deriveGrid,
  initialViewport,
  scrollForRow,
  topRowForScroll,
  windowRequest,
} from "./state.js";

const KIND_CLASS: Record<string, string> = {
  ROM: "kind-rom",
  COM: "kind-com",
  RCV: "kind-rcv",
  TOM: "kind-tom",
};

export class GridView {
  readonly root: HTMLElement;
  state: ViewportState;
  sheetRows = 1;
  sheetCols = 1;
  lastResponse: WindowResponse | null = null;
  showOverlay = false;
  cursor = { row: 1, col: 1 };
  private scroller!: HTMLDivElement;
  private spacer!: HTMLDivElement;
  private windowEl!: HTMLDivElement;
  private statusEl!: HTMLSpanElement;
  private editor: HTMLInputElement | null = null;
  private inflight = 0;
  private mutationBusy = false;

  constructor(
    private api: GridApi,
    public sheet: string,
    container: HTMLElement,
    visibleRows = 30,
    visibleCols = 20,
  ) {
    this.state = initialViewport(visibleRows, visibleCols);
    this.root = container;
    this.buildChrome();
  }

  private buildChrome(): void {
    this.root.classList.add("gridstore");
    this.root.innerHTML = "";

    const toolbar = document.createElement("div");
    toolbar.className = "toolbar";
    toolbar.append(
      this.button("insert-row", "+Row", () => this.mutate(() =>
        this.api.insertRowAfter(this.sheet, this.cursor.row),
      )),
      this.button("delete-row", "-Row", () => this.mutate(() =>
        this.api.deleteRow(this.sheet, this.cursor.row),
      )),
      this.button("insert-col", "+Col", () => this.mutate(() =>
        this.api.insertColumnAfter(this.sheet, this.cursor.col),
      )),
      this.button("delete-col", "-Col", () => this.mutate(() =>
        this.api.deleteColumn(this.sheet, this.cursor.col),
      )),
    );

    const jump = document.createElement("input");
    jump.className = "jump";
    jump.placeholder = "go to row";
    jump.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        const row = parseInt(jump.value, 10);
        if (Number.isFinite(row) && row >= 1) {
          void this.jumpToRow(Math.min(row, this.sheetRows));
        }
      }
    });
    toolbar.append(jump);

    const overlayToggle = document.createElement("label");
    overlayToggle.className = "overlay-toggle";
    const check = document.createElement("input");
    check.type = "checkbox";
    check.addEventListener("change", () => {
      this.showOverlay = check.checked;
      this.render();
    });
    overlayToggle.append(check, document.createTextNode(" layout overlay"));
    toolbar.append(overlayToggle);

    const algorithm = document.createElement("select");
    algorithm.className = "algorithm";
    for (const name of ["aggressive", "greedy", "weighted", "incremental"]) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      algorithm.append(option);
    }
    const eta = document.createElement("input");
    eta.className = "eta";
    eta.type = "range";
    eta.min = "0";
    eta.max = "200";
    eta.value = "1";
    eta.title = "migration weight (eta); max keeps the current layout";
    toolbar.append(
      algorithm,
      eta,
      this.button("optimize", "Optimize", async () => {
        const etaValue = algorithm.value === "incremental"
          ? (eta.value === "200" ? 1e18 : Number(eta.value))
          : undefined;
        await this.mutate(async () => {
          const result = await this.api.optimize(this.sheet, algorithm.value, etaValue);
          this.toast(
            `${result.algorithm}: cost ${Math.round(result.cost)}, ` +
              `${result.migrated_cells} cells migrated`,
          );
          return result;
        });
      }),
    );

    this.statusEl = document.createElement("span");
    this.statusEl.className = "status";
    toolbar.append(this.statusEl);
    this.root.append(toolbar);

    this.scroller = document.createElement("div");
    this.scroller.className = "scroller";
    this.scroller.style.height = `${this.state.rows * ROW_HEIGHT}px`;
    this.spacer = document.createElement("div");
    this.spacer.className = "spacer";
    this.windowEl = document.createElement("div");
    this.windowEl.className = "window";
    this.spacer.append(this.windowEl);
    this.scroller.append(this.spacer);
    this.scroller.addEventListener("scroll", () => {
      const top = topRowForScroll(this.scroller.scrollTop);
      if (top !== this.state.top) {
        this.state = { ...this.state, top };
        void this.refresh();
      }
    });
    this.root.append(this.scroller);

    this.root.addEventListener("keydown", (event) => this.onKey(event));
  }

  private button(cls: string, label: string, onClick: () => unknown): HTMLButtonElement {
    const b = document.createElement("button");
    b.className = cls;
    b.textContent = label;
    b.addEventListener("click", () => void onClick());
    return b;
  }

  async start(): Promise<void> {
    // Learn the sheet's extents before the first window request so the
    // initial fetch is not clipped to a 1x1 guess.
    const info = (await this.api.listSheets()).find((s) => s.name === this.sheet);
    if (info) {
      this.sheetRows = info.rows;
      this.sheetCols = info.cols;
    }
    await this.refresh();
  }

  async jumpToRow(row: number): Promise<void> {
    this.state = { ...this.state, top: row };
    this.scroller.scrollTop = scrollForRow(row);
    await this.refresh();
  }

  /** Fetch the current window and re-render. Stale responses (an older
   * request finishing late) are dropped. */
  async refresh(): Promise<WindowResponse | null> {
    const ticket = ++this.inflight;
    const req = windowRequest(this.state, this.sheetRows || 1, this.sheetCols || 1);
    const response = await this.api.window(this.sheet, req.top, req.left, req.rows, req.cols);
    if (ticket !== this.inflight) {
      return null;
    }
    this.lastResponse = response;
    this.sheetRows = response.sheet_rows;
    this.sheetCols = response.sheet_cols;
    this.state = { ...this.state, revision: response.revision };
    this.spacer.style.height = `${this.sheetRows * ROW_HEIGHT}px`;
    this.render();
    return response;
  }

  /** Re-render from the last response; pure view of response + pending edit. */
  render(): void {
    const response = this.lastResponse;
    if (!response) {
      return;
    }
    const grid = deriveGrid(response, this.state.pendingEdit, this.showOverlay);
    this.windowEl.style.transform = `translateY(${(response.top - 1) * ROW_HEIGHT}px)`;
    const table = document.createElement("table");
    const head = document.createElement("tr");
    head.append(document.createElement("th"));
    for (let c = 0; c < response.cols; c += 1) {
      const th = document.createElement("th");
      th.textContent = columnLabel(response.left + c);
      head.append(th);
    }
    table.append(head);
    for (let r = 0; r < response.rows; r += 1) {
      const tr = document.createElement("tr");
      const rowHeader = document.createElement("th");
      rowHeader.textContent = String(response.top + r);
      tr.append(rowHeader);
      for (let c = 0; c < response.cols; c += 1) {
        const td = document.createElement("td");
        const cell = grid[r][c];
        const displayRow = response.top + r;
        const displayCol = response.left + c;
        td.dataset.row = String(displayRow);
        td.dataset.col = String(displayCol);
        td.textContent = cell.display;
        if (cell.error) {
          td.classList.add("error");
        }
        if (cell.pending) {
          td.classList.add("pending");
        }
        if (cell.kind) {
          td.classList.add(KIND_CLASS[cell.kind]);
        }
        if (displayRow === this.cursor.row && displayCol === this.cursor.col) {
          td.classList.add("cursor");
        }
        td.addEventListener("click", () => {
          this.cursor = { row: displayRow, col: displayCol };
          this.render();
        });
        td.addEventListener("dblclick", () => {
          this.cursor = { row: displayRow, col: displayCol };
          this.openEditor(cell.formula ?? cell.display);
        });
        tr.append(td);
      }
      table.append(tr);
    }
    this.windowEl.innerHTML = "";
    this.windowEl.append(table);
    this.statusEl.textContent =
      `${cellRef(this.cursor.row, this.cursor.col)} | ` +
      `${this.sheetRows.toLocaleString()} x ${this.sheetCols} | rev ${this.state.revision}`;
  }

  private onKey(event: KeyboardEvent): void {
    if (this.editor) {
      return;
    }
    const { row, col } = this.cursor;
    if (event.key === "ArrowDown") {
      this.moveCursor(Math.min(row + 1, this.sheetRows), col);
    } else if (event.key === "ArrowUp") {
      this.moveCursor(Math.max(1, row - 1), col);
    } else if (event.key === "ArrowRight") {
      this.moveCursor(row, Math.min(col + 1, this.sheetCols));
    } else if (event.key === "ArrowLeft") {
      this.moveCursor(row, Math.max(1, col - 1));
    } else if (event.key === "Enter" || event.key === "F2") {
      this.openEditor();
    } else if (event.key === "Delete") {
      void this.commitEdit("");
    } else {
      return;
    }
    event.preventDefault();
  }

  private moveCursor(row: number, col: number): void {
    this.cursor = { row, col };
    const response = this.lastResponse;
    if (
      !response ||
      row < response.top ||
      row >= response.top + response.rows ||
      col < response.left ||
      col >= response.left + response.cols
    ) {
      this.state = { ...this.state, top: Math.max(1, row - Math.floor(this.state.rows / 2)) };
      void this.refresh();
      return;
    }
    this.render();
  }

  openEditor(initial?: string): void {
    const td = this.windowEl.querySelector<HTMLTableCellElement>(
      `td[data-row="${this.cursor.row}"][data-col="${this.cursor.col}"]`,
    );
    if (!td) {
      return;
    }
    const input = document.createElement("input");
    input.className = "editor";
    input.value = initial ?? td.textContent ?? "";
    this.editor = input;
    td.textContent = "";
    td.append(input);
    input.focus();
    input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        void this.commitEdit(input.value);
        event.preventDefault();
      } else if (event.key === "Escape") {
        this.closeEditor();
      }
      event.stopPropagation();
    });
  }

  private closeEditor(): void {
    this.editor = null;
    this.render();
  }

  async commitEdit(text: string): Promise<void> {
    const { row, col } = this.cursor;
    this.state = { ...this.state, pendingEdit: { row, col, text } };
    this.editor = null;
    this.render();
    try {
      await this.api.putCell(this.sheet, cellRef(row, col), text === "" ? null : text);
    } catch (err) {
      if (err instanceof ApiError) {
        this.toast(`edit rejected: ${err.detail}`, true);
      } else {
        throw err;
      }
    } finally {
      // Refetch renders the authoritative state (or restores the old cell
      // after a rejected edit); the optimistic echo is dropped either way.
      this.state = { ...this.state, pendingEdit: null };
      await this.refresh();
    }
  }

  private async mutate<T>(action: () => Promise<T>): Promise<T | null> {
    if (this.mutationBusy) {
      return null; // one in-flight mutation at a time
    }
    this.mutationBusy = true;
    try {
      return await action();
    } catch (err) {
      if (err instanceof ApiError) {
        this.toast(err.detail, true);
        return null;
      }
      throw err;
    } finally {
      this.mutationBusy = false;
      await this.refresh();
    }
  }

  toast(message: string, isError = false): void {
    const el = document.createElement("div");
    el.className = isError ? "toast toast-error" : "toast";
    el.textContent = message;
    this.root.append(el);
    setTimeout(() => el.remove(), 4000);
  }
}

// @vitest-environment jsdom
/** End-to-end against a live `gridstore serve` process on a million-row
 * workbook: jump-to-row latency, edit round-trip with dependent recompute,
 * insert-row shift, and overlay-vs-optimize agreement.
 *
 * Requires the Python package installed; run via `npm run test:e2e` (the
 * suite is skipped unless RUN_E2E=1).
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GridApi } from "../src/api.js";
import { GridView } from "../src/grid.js";
import { clipOverlay } from "../src/state.js";

const RUN = process.env.RUN_E2E === "1";
const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

let serverProc: ChildProcess | null = null;
let workdir = "";

const SETUP_SCRIPT = `
import sys
from gridstore.core import CellAddress, Formula, Number
from gridstore.engine import Workbook
from gridstore.formula import parse_formula
from gridstore.store import save

wb = Workbook()
sheet = wb.create_sheet("big", rows=10**6, cols=100)
for i, value in enumerate((10.0, 20.0, 30.0), start=1):
    sheet.update_cell(CellAddress(i, 2), Number(value))
src = "=SUM(B1:B3)"
sheet.update_cell(CellAddress(1, 1), Formula(src, parse_formula(src)))
sheet.update_cell(CellAddress(10**6, 1), Number(999999.0))
for r in range(100, 160):
    for c in range(5, 15):
        sheet.update_cell(CellAddress(r, c), Number(float(r + c)))
save(wb, sys.argv[1])
print("ready")
`;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/sheets`);
      if (response.ok) {
        return;
      }
    } catch {
      /* not up yet */
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  if (!RUN) {
    return;
  }
  workdir = mkdtempSync(join(tmpdir(), "gridstore-e2e-"));
  const setup = spawnSync("python3", ["-c", SETUP_SCRIPT, join(workdir, "wb")], {
    encoding: "utf-8",
  });
  if (!setup.stdout.includes("ready")) {
    throw new Error(`workbook setup failed: ${setup.stderr}`);
  }
  serverProc = spawn(
    "python3",
    ["-m", "gridstore.bench.cli", "serve", "--wb", join(workdir, "wb"), "--listen", `127.0.0.1:${PORT}`],
    { stdio: "ignore" },
  );
  await waitForServer();
}, 120_000);

afterAll(() => {
  serverProc?.kill();
  if (workdir) {
    rmSync(workdir, { recursive: true, force: true });
  }
});

describe.skipIf(!RUN)("live grid over a million-row workbook", () => {
  function freshView(): GridView {
    document.body.innerHTML = '<div id="grid" tabindex="0"></div>';
    return new GridView(new GridApi(BASE), "big", document.getElementById("grid")!, 30, 20);
  }

  it("jumps to row 1e6 and renders it within a second", async () => {
    const view = freshView();
    await view.start();
    const started = performance.now();
    await view.jumpToRow(1_000_000);
    const elapsed = performance.now() - started;
    expect(elapsed).toBeLessThan(1000);
    const cell = document.querySelector('td[data-row="1000000"][data-col="1"]');
    expect(cell?.textContent).toBe("999999");
  }, 30_000);

  it("edits a precedent and re-renders the dependent formula cell", async () => {
    const view = freshView();
    await view.start();
    expect(document.querySelector('td[data-row="1"][data-col="1"]')!.textContent).toBe("60");
    view.cursor = { row: 2, col: 2 };
    await view.commitEdit("25");
    expect(document.querySelector('td[data-row="2"][data-col="2"]')!.textContent).toBe("25");
    expect(document.querySelector('td[data-row="1"][data-col="1"]')!.textContent).toBe("65");
    await view.commitEdit("20"); // restore
  }, 30_000);

  it("insert-row shifts visible content down", async () => {
    const view = freshView();
    await view.start();
    const before = document.querySelector('td[data-row="3"][data-col="2"]')!.textContent;
    expect(before).toBe("30");
    view.cursor = { row: 2, col: 1 };
    document.querySelector<HTMLButtonElement>("button.insert-row")!.click();
    await new Promise((resolve) => setTimeout(resolve, 500));
    await view.refresh();
    expect(document.querySelector('td[data-row="4"][data-col="2"]')!.textContent).toBe("30");
    expect(document.querySelector('td[data-row="3"][data-col="2"]')!.textContent).toBe("");
    // put the sheet back for other tests
    await new GridApi(BASE).deleteRow("big", 3);
  }, 30_000);

  it("overlay matches the optimize response region for region", async () => {
    const api = new GridApi(BASE);
    const optimized = await api.optimize("big", "aggressive");
    const view = freshView();
    await view.start();
    await view.jumpToRow(100);
    const response = view.lastResponse!;
    const expected = clipOverlay(
      optimized.entries,
      response.top,
      response.left,
      response.top + response.rows - 1,
      response.left + response.cols - 1,
    );
    const got = response.decomposition;
    const key = (e: { top: number; left: number; bottom: number; right: number; kind: string }) =>
      `${e.kind}@${e.top},${e.left},${e.bottom},${e.right}`;
    expect(new Set(got.map(key))).toEqual(new Set(expected.map(key)));
    // and the visible tint agrees with the owning entry
    const toggle = document.querySelector<HTMLInputElement>(".overlay-toggle input")!;
    toggle.checked = true;
    toggle.dispatchEvent(new Event("change"));
    const inside = expected.find((e) => e.kind === "ROM" || e.kind === "COM");
    if (inside) {
      const cell = document.querySelector(
        `td[data-row="${inside.top}"][data-col="${inside.left}"]`,
      )!;
      expect(cell.className).toContain(`kind-${inside.kind.toLowerCase()}`);
    }
  }, 60_000);
});

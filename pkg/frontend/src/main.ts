import { GridApi } from "./api.js";
import { GridView } from "./grid.js";

async function boot(): Promise<void> {
  const api = new GridApi("");
  let sheets = await api.listSheets();
  if (sheets.length === 0) {
    await api.createSheet("Sheet1", 1000, 26);
    sheets = await api.listSheets();
  }
  const container = document.getElementById("grid");
  if (!container) {
    throw new Error("missing #grid container");
  }
  const view = new GridView(api, sheets[0].name, container);
  await view.start();

  // Idle revision polling: refetch only when another writer moved the sheet.
  setInterval(async () => {
    const latest = (await api.listSheets()).find((s) => s.name === view.sheet);
    if (latest && latest.revision !== view.state.revision) {
      await view.refresh();
    }
  }, 3000);
}

void boot();

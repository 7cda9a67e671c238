"""Regenerate docs/api-golden.md by replaying the documented calls against a
fresh in-process app."""

import json
import os

from fastapi.testclient import TestClient

from gridstore.api import create_app
from gridstore.engine import Workbook


def main() -> None:
    client = TestClient(create_app(Workbook()))
    pairs = []

    def record(title, method, path, body, response):
        pairs.append((title, method, path, body, response.status_code, response.json()))

    r = client.post("/sheets", json={"name": "demo", "rows": 100, "cols": 10})
    record("Create a sheet", "POST", "/sheets", {"name": "demo", "rows": 100, "cols": 10}, r)
    for i, v in enumerate((10, 20, 30), start=1):
        client.put(f"/sheets/demo/cells/B{i}", json={"content": v})
    r = client.put("/sheets/demo/cells/A1", json={"content": "=SUM(B1:B3)"})
    record("Write a formula", "PUT", "/sheets/demo/cells/A1", {"content": "=SUM(B1:B3)"}, r)
    r = client.get("/sheets/demo/window?top=1&left=1&rows=3&cols=2")
    record("Windowed read", "GET", "/sheets/demo/window?top=1&left=1&rows=3&cols=2", None, r)
    r = client.post("/sheets/demo/rows", json={"after": 1})
    record("Insert a row", "POST", "/sheets/demo/rows", {"after": 1}, r)
    r = client.post("/sheets/demo/optimize", json={"algorithm": "aggressive"})
    record("Optimize the layout", "POST", "/sheets/demo/optimize", {"algorithm": "aggressive"}, r)
    r = client.put("/sheets/demo/cells/C1", json={"content": 1}, headers={"If-Match": "0"})
    record("Revision conflict", "PUT", "/sheets/demo/cells/C1 (If-Match: 0)", {"content": 1}, r)
    client.put("/sheets/demo/cells/D1", json={"content": "=E1"})
    r = client.put("/sheets/demo/cells/E1", json={"content": "=D1"})
    record("Cycle rejected", "PUT", "/sheets/demo/cells/E1", {"content": "=D1"}, r)

    lines = [
        "# API golden request/response pairs",
        "",
        "Captured from a live app instance; regenerate with `python3 docs/gen_api_golden.py`.",
        "",
    ]
    for title, method, path, body, status, payload in pairs:
        lines.append(f"## {title}")
        lines.append("")
        lines.append("```")
        lines.append(f"{method} {path}")
        if body is not None:
            lines.append(json.dumps(body))
        lines.append(f"-> {status}")
        lines.append(json.dumps(payload, indent=2)[:1200])
        lines.append("```")
        lines.append("")
    target = os.path.join(os.path.dirname(__file__), "api-golden.md")
    with open(target, "w") as fh:
        fh.write("\n".join(lines))
    print(f"wrote {target}")


if __name__ == "__main__":
    main()

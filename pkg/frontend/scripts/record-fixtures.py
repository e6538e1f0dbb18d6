#!/usr/bin/env python3
"""Record the customization walkthrough against the real service.

Starts the famvar HTTP service in-process, drives the scenario the
frontend walkthrough test replays (upload the Hall Booking model, open
an Academic session pinning the printed-paper value, preview and apply
the multiple-time answer, finalize), and saves every exchange to
tests/fixtures/walkthrough.json with the opaque session id normalized
to the literal "SID".

Rerun after changing service responses:  python3 scripts/record-fixtures.py
"""

import json
import threading
import urllib.request
from pathlib import Path

from famvar.service import make_server

HERE = Path(__file__).resolve().parent
PKG_ROOT = HERE.parent.parent
FIXTURES = HERE.parent / "tests" / "fixtures"


def main() -> None:
    model_xml = (PKG_ROOT / "tests" / "data" / "hall_model.xml").read_bytes()
    server = make_server(0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    recorded = []

    def call(method: str, path: str, body: bytes | None = None, content_type: str = "application/json"):
        request = urllib.request.Request(base + path, data=body, method=method)
        if body is not None:
            request.add_header("Content-Type", content_type)
        try:
            with urllib.request.urlopen(request) as response:
                status, payload = response.status, response.read()
        except urllib.error.HTTPError as error:  # recorded like any reply
            status, payload = error.code, error.read()
        recorded.append(
            {
                "method": method,
                "path": path,
                "status": status,
                "body": json.loads(payload.decode("utf-8")),
            }
        )
        return recorded[-1]["body"]

    def body_of(action: str, ref: str) -> bytes:
        return json.dumps({"action": action, "ref": ref}).encode()

    uploaded = call("POST", "/models", model_xml, "application/xml")
    model_id = uploaded["modelId"]
    call("GET", f"/models/{model_id}")
    opened = call(
        "POST",
        "/sessions",
        json.dumps({"modelId": model_id, "area": "Academic", "pins": ["V4.3"], "excludes": []}).encode(),
    )
    sid = opened["sessionId"]
    call("POST", f"/sessions/{sid}/preview", body_of("include", "V3.2"))
    call("POST", f"/sessions/{sid}/decisions", body_of("include", "V3.2"))
    call("DELETE", f"/sessions/{sid}/decisions/V3.2")
    call("POST", f"/sessions/{sid}/decisions", body_of("include", "V3.2"))
    call("POST", f"/sessions/{sid}/preview", body_of("include", "V1.1"))  # conflict preview
    call("POST", f"/sessions/{sid}/decisions", body_of("include", "V1.1"))  # 409 conflict
    call("POST", f"/sessions/{sid}/finalize")
    server.shutdown()

    text = json.dumps(recorded, indent=2)
    text = text.replace(sid, "SID")
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "walkthrough.json").write_text(text + "\n", encoding="utf-8")
    print(f"recorded {len(recorded)} exchanges -> {FIXTURES / 'walkthrough.json'}")


if __name__ == "__main__":
    main()

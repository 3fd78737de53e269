"""Record real service responses for the client test suite.

Drives the session service through the same request sequence the client
issues and stores every response verbatim in test/fixtures.json, keyed by
"METHOD path".  Regenerate after changing the service:

    python3 scripts/capture_fixtures.py
"""

import json
from pathlib import Path
from urllib.parse import quote

from fastapi.testclient import TestClient

from cautiousbp import network_from_document
from cautiousbp.service import create_app

CHAIN3 = {
    "variables": [
        {"name": "A", "states": ["t", "f"]},
        {"name": "B", "states": ["t", "f"]},
        {"name": "C", "states": ["t", "f"]},
    ],
    "cpds": [
        {"variable": "A", "parents": [], "values": [0.4, 0.6]},
        {"variable": "B", "parents": ["A"], "values": [0.9, 0.2, 0.1, 0.8]},
        {"variable": "C", "parents": ["B"], "values": [0.7, 0.1, 0.3, 0.9]},
    ],
}


def main() -> None:
    app = create_app(models={"chain3": network_from_document(CHAIN3)})
    recorded: dict[str, list[dict]] = {}

    with TestClient(app) as client:
        sid = None

        def call(method: str, path: str, body=None):
            nonlocal sid
            response = client.request(method, path, json=body)
            payload = response.json()
            if sid is None and isinstance(payload, dict) and "session_id" in payload:
                sid = payload["session_id"]
            generic = path if sid is None else path.replace(sid, "{sid}")
            recorded.setdefault(f"{method} {generic}", []).append(
                {"status": response.status_code, "body": payload}
            )
            return payload

        view = call("POST", "/sessions", {"model": "chain3"})
        sid = view["session_id"]
        call("GET", f"/sessions/{sid}/tree")

        # toggle B=t on
        call("POST", f"/sessions/{sid}/findings", {"id": "B=t", "variable": "B", "state": "t"})

        # hypothesis A=t, then the sensitivity panel for that revision
        call("PUT", f"/sessions/{sid}/hypothesis", {"assignments": {"A": "t"}})
        call("GET", f"/sessions/{sid}/sensitivity")

        # toggle C=t on
        call("POST", f"/sessions/{sid}/findings", {"id": "C=t", "variable": "C", "state": "t"})
        call("GET", f"/sessions/{sid}/sensitivity")

        # what-if: C=t swapped to f
        call("POST", f"/sessions/{sid}/whatif", {"finding_id": "C=t", "state": "f"})

        # toggle B=t off (retract), then back on
        call("DELETE", f"/sessions/{sid}/findings/{quote('B=t', safe='')}")
        call("GET", f"/sessions/{sid}/sensitivity")
        call("POST", f"/sessions/{sid}/findings", {"id": "B=t", "variable": "B", "state": "t"})
        call("GET", f"/sessions/{sid}/sensitivity")

        # contradictory finding must be rejected without changing the session
        call("POST", f"/sessions/{sid}/findings", {"id": "B=f", "variable": "B", "state": "f"})
        call("GET", f"/sessions/{sid}")

    out = Path(__file__).resolve().parent.parent / "test" / "fixtures.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(recorded, indent=2))
    print(f"wrote {out} ({sum(len(v) for v in recorded.values())} responses)")


if __name__ == "__main__":
    main()

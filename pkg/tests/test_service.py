"""HTTP service: the wizard walkthrough, error statuses, and replayability."""

import threading

import pytest
import requests

from famvar.service import make_server


@pytest.fixture()
def base_url():
    server = make_server(0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join(timeout=5)


@pytest.fixture()
def model_id(base_url, hall_xml):
    response = requests.post(f"{base_url}/models", data=hall_xml)
    assert response.status_code == 200
    return response.json()["modelId"]


def open_session(base_url, model_id, **payload):
    payload.setdefault("modelId", model_id)
    payload.setdefault("area", "Academic")
    response = requests.post(f"{base_url}/sessions", json=payload)
    assert response.status_code == 200, response.text
    return response.json()


class TestModels:
    def test_upload_reports_id_and_empty_diagnostics(self, base_url, hall_xml):
        body = requests.post(f"{base_url}/models", data=hall_xml).json()
        assert body["diagnostics"] == []
        assert len(body["modelId"]) == 12

    def test_upload_is_idempotent(self, base_url, hall_xml):
        first = requests.post(f"{base_url}/models", data=hall_xml).json()["modelId"]
        second = requests.post(f"{base_url}/models", data=hall_xml).json()["modelId"]
        assert first == second

    def test_invalid_model_is_422(self, base_url, hall_xml):
        bad = hall_xml.replace(b'ref="V1.2"', b'ref="V9.9"', 1)
        response = requests.post(f"{base_url}/models", data=bad)
        assert response.status_code == 422
        assert any(d["code"] == "DANGLING_DEPENDENCY" for d in response.json()["diagnostics"])

    def test_model_view_carries_areas_and_values(self, base_url, model_id):
        body = requests.get(f"{base_url}/models/{model_id}").json()["model"]
        assert body["areas"] == ["Academic", "NonAcademic"]
        v4 = next(v for v in body["variants"] if v["id"] == "V4")
        assert [val["name"] for val in v4["values"]] == ["Fax", "Email", "Printed Paper"]

    def test_derived_views(self, base_url, model_id):
        features = requests.get(f"{base_url}/models/{model_id}/features").json()["features"]
        assert features["name"] == "Hall Booking System"
        table = requests.get(f"{base_url}/models/{model_id}/table").json()["entries"]
        assert [e["variant"] for e in table] == ["V1", "V2", "V4"]

    def test_unknown_model_is_404(self, base_url):
        assert requests.get(f"{base_url}/models/zzz/features").status_code == 404


class TestSessions:
    def test_academic_walkthrough(self, base_url, model_id, golden_reduced_model):
        body = open_session(base_url, model_id, pins=["V4.3"])
        assert body["reducedModel"] == golden_reduced_model.decode("utf-8")
        assert [e["variant"] for e in body["openDecisions"]] == ["V1"]
        assert [c["variant"] for c in body["openDecisions"][0]["children"]] == ["V3"]
        assert body["configuration"]["states"]["V4"]["selected"] == ["V4.3"]

        sid = body["sessionId"]
        decide = requests.post(
            f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": "V3.2"}
        ).json()
        assert {(c["kind"], c["subject"]) for c in decide["consequences"]} == {
            ("FORCES_VARIANT", "V3"),
            ("FORCES_VALUE", "V1.2"),
            ("FORCES_VARIANT", "V1"),
        }
        assert decide["openDecisions"] == []

        conflict = requests.post(
            f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": "V1.1"}
        )
        assert conflict.status_code == 409
        assert conflict.json()["consequences"] == [
            {"kind": "CONFLICT", "subject": "V1.1", "cause": "V1.2"}
        ]

        final = requests.post(f"{base_url}/sessions/{sid}/finalize")
        assert final.status_code == 200
        assert '<value ref="V1.2"/>' in final.json()["configurationXml"]
        # the downloadable customized model is the reduced (reduced)
        # variant model; the decisions travel in the configuration
        assert final.json()["customizedModelXml"] == golden_reduced_model.decode("utf-8")

    def test_preview_never_mutates(self, base_url, model_id):
        body = open_session(base_url, model_id)
        sid = body["sessionId"]
        url = f"{base_url}/sessions/{sid}/preview"
        first = requests.post(url, json={"action": "include", "ref": "V3.2"}).json()
        second = requests.post(url, json={"action": "include", "ref": "V3.2"}).json()
        assert first == second
        decisions = requests.get(f"{base_url}/sessions/{sid}/decisions").json()
        assert [e["variant"] for e in decisions["openDecisions"]] == ["V1", "V4"]

    def test_retract_replays(self, base_url, model_id):
        sid = open_session(base_url, model_id)["sessionId"]
        requests.post(f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": "V3.2"})
        undone = requests.delete(f"{base_url}/sessions/{sid}/decisions/V3.2")
        assert undone.status_code == 200
        states = undone.json()["configuration"]["states"]
        assert states["V1"]["kind"] == "UNDECIDED"
        assert states["V3"]["kind"] == "UNDECIDED"

    def test_retract_unknown_ref_is_404(self, base_url, model_id):
        sid = open_session(base_url, model_id)["sessionId"]
        assert requests.delete(f"{base_url}/sessions/{sid}/decisions/V3.2").status_code == 404

    def test_finalize_incomplete_is_409(self, base_url, model_id):
        sid = open_session(base_url, model_id)["sessionId"]
        response = requests.post(f"{base_url}/sessions/{sid}/finalize")
        assert response.status_code == 409
        assert [e["variant"] for e in response.json()["openDecisions"]] == ["V1", "V4"]

    def test_finalize_customizes_documents(self, base_url, model_id, hall_xml):
        doc_xml = (
            b'<modelDoc name="notify" kind="activity">'
            b'<element id="n1" kind="action" label="Send Fax" tag="V4.1"/>'
            b'<element id="n2" kind="action" label="Print Notice" tag="V4.3"/>'
            b"</modelDoc>"
        )
        assert (
            requests.post(f"{base_url}/models/{model_id}/documents", data=doc_xml).status_code
            == 200
        )
        sid = open_session(base_url, model_id, pins=["V4.3"])["sessionId"]
        requests.post(f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": "V1.1"})
        requests.post(f"{base_url}/sessions/{sid}/decisions", json={"action": "exclude", "ref": "V3"})
        final = requests.post(f"{base_url}/sessions/{sid}/finalize")
        assert final.status_code == 200, final.text
        docs = final.json()["customizedDocuments"]
        assert len(docs) == 1
        assert "Print Notice" in docs[0]["xml"]
        assert "Send Fax" not in docs[0]["xml"]

    def test_pin_conflict_is_422(self, base_url, model_id):
        response = requests.post(
            f"{base_url}/sessions", json={"modelId": model_id, "area": "Academic", "pins": ["V5.1"]}
        )
        assert response.status_code == 422
        assert response.json()["diagnostics"][0]["code"] == "PIN_CONFLICT"

    def test_unknown_session_is_404(self, base_url):
        assert requests.get(f"{base_url}/sessions/nope/decisions").status_code == 404

    def test_malformed_json_is_400(self, base_url, model_id):
        response = requests.post(
            f"{base_url}/sessions",
            data=b"{not json",
            headers={"Content-Type": "application/json"},
        )
        assert response.status_code == 400


class TestConcurrency:
    def test_independent_sessions_run_in_parallel(self, base_url, model_id):
        session_ids = [open_session(base_url, model_id)["sessionId"] for _ in range(4)]
        errors: list[str] = []

        def worker(sid: str, ref: str) -> None:
            response = requests.post(
                f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": ref}
            )
            if response.status_code != 200:
                errors.append(f"{sid}: {response.status_code}")

        threads = [
            threading.Thread(target=worker, args=(sid, ref))
            for sid, ref in zip(session_ids, ["V3.1", "V3.2", "V4.1", "V1.1"])
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=10)
        assert errors == []

        def flatten(entries):
            out = []
            for e in entries:
                out.append(e["variant"])
                out.extend(flatten(e["children"]))
            return out

        states = [
            requests.get(f"{base_url}/sessions/{sid}/decisions").json() for sid in session_ids
        ]
        assert [flatten(s["openDecisions"]) for s in states] == [
            ["V4"],          # V3.1 forced V1=Block, only notification left
            ["V4"],          # same for V3.2
            ["V1", "V3"],    # V4.1 decided, the reservation questions remain
            ["V3", "V4"],    # V1.1 decided, block type and notification remain
        ]

    def test_racing_decisions_on_one_session_stay_consistent(self, base_url, model_id):
        sid = open_session(base_url, model_id)["sessionId"]
        statuses: list[int] = []

        def worker(ref: str) -> None:
            response = requests.post(
                f"{base_url}/sessions/{sid}/decisions", json={"action": "include", "ref": ref}
            )
            statuses.append(response.status_code)

        threads = [
            threading.Thread(target=worker, args=(ref,))
            for ref in ["V3.1", "V3.2", "V4.1", "V4.2", "V4.3"]
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=10)
        assert statuses.count(200) == 5  # all compatible decisions succeed
        body = requests.post(f"{base_url}/sessions/{sid}/finalize")
        assert body.status_code == 200
        config = body.json()["configurationXml"]
        for ref in ("V3.1", "V3.2", "V4.1", "V4.2", "V4.3", "V1.2"):
            assert f'<value ref="{ref}"/>' in config


class TestStaticUi:
    def test_serves_frontend_shell_when_configured(self, tmp_path, hall_xml):
        (tmp_path / "index.html").write_text("<!doctype html><title>shell</title>")
        server = make_server(0, ui_dir=str(tmp_path))
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{server.server_address[1]}"
        try:
            page = requests.get(f"{base}/")
            assert page.status_code == 200
            assert "shell" in page.text
            # API routes still win over static files
            assert requests.post(f"{base}/models", data=hall_xml).status_code == 200
            assert requests.get(f"{base}/nonexistent.js").status_code == 404
        finally:
            server.shutdown()
            thread.join(timeout=5)


class TestDeterminism:
    def test_replaying_requests_reproduces_bodies(self, hall_xml):
        def record():
            server = make_server(0)
            thread = threading.Thread(target=server.serve_forever, daemon=True)
            thread.start()
            base = f"http://127.0.0.1:{server.server_address[1]}"
            try:
                mid = requests.post(f"{base}/models", data=hall_xml).json()["modelId"]
                opened = requests.post(
                    f"{base}/sessions",
                    json={"modelId": mid, "area": "Academic", "pins": ["V4.3"]},
                ).json()
                sid = opened.pop("sessionId")
                bodies = [opened]
                for payload in ({"action": "include", "ref": "V3.2"},):
                    bodies.append(
                        requests.post(f"{base}/sessions/{sid}/decisions", json=payload).json()
                    )
                bodies.append(requests.post(f"{base}/sessions/{sid}/finalize").json())
                return bodies
            finally:
                server.shutdown()

        assert record() == record()

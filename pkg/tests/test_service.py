import json
import threading
import time

import pytest
import requests

from twinflex.meshio import dump_payload, object_payload
from twinflex.catalog import catalog
from twinflex.service import make_server, run_flex_request


@pytest.fixture(scope="module")
def base_url():
    server = make_server(port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    server.server_close()


def wait_for_job(base_url, job, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        rec = requests.get(f"{base_url}/jobs/{job}").json()
        if rec["status"] in ("done", "failed"):
            return rec
        time.sleep(0.05)
    raise TimeoutError(f"job {job} did not finish")


class TestModels:
    def test_catalog_listing(self, base_url):
        r = requests.get(base_url + "/models")
        assert r.status_code == 200
        names = [m["name"] for m in r.json()["models"]]
        for expected in ("bricard1", "bricard2", "twinned_anticupola",
                         "star_dodecahedron", "pentagonal_crinkle", "foxtrot_template"):
            assert expected in names
        schema = [m for m in r.json()["models"] if m["name"] == "bricard1"][0]
        assert {p["name"] for p in schema["params"]} >= {"ax", "cz"}


class TestBuild:
    def test_build_twin(self, base_url):
        r = requests.post(base_url + "/build", json={"model": "bricard1"})
        assert r.status_code == 200
        d = r.json()
        assert d["kind"] == "twin" and len(d["faces"]) == 8

    def test_unknown_model_404(self, base_url):
        r = requests.post(base_url + "/build", json={"model": "zork"})
        assert r.status_code == 404
        assert r.json()["error"]["reason"] == "unknown_model"

    def test_malformed_body_400(self, base_url):
        r = requests.post(base_url + "/build", data=b"{oops",
                          headers={"Content-Type": "application/json"})
        assert r.status_code == 400

    def test_bad_params_400(self, base_url):
        r = requests.post(base_url + "/build", json={"model": "bricard1", "params": {"cz": 1e9}})
        assert r.status_code == 400


class TestFlexJobs:
    def test_flex_roundtrip(self, base_url):
        r = requests.post(base_url + "/flex", json={"model": "bricard1", "frames": 100})
        assert r.status_code == 202
        job = r.json()["job"]
        rec = wait_for_job(base_url, job)
        assert rec["status"] == "done"
        frames = requests.get(f"{base_url}/jobs/{job}/frames").json()
        assert len(frames["frames"]) == 100
        assert all(f["diag"]["edge_err"] < 1e-8 for f in frames["frames"])
        assert "mesh" in frames

    def test_unknown_job_404(self, base_url):
        r = requests.get(base_url + "/jobs/job-9999")
        assert r.status_code == 404

    def test_frames_before_done_404(self, base_url):
        r = requests.post(base_url + "/flex", json={"model": "twinned_anticupola", "frames": 40})
        job = r.json()["job"]
        # poll /frames immediately; it must 404 until done, never 500
        resp = requests.get(f"{base_url}/jobs/{job}/frames")
        assert resp.status_code in (200, 404)
        wait_for_job(base_url, job)

    def test_solver_failure_flagged(self, base_url):
        mesh = object_payload(catalog("pyramid"))
        r = requests.post(base_url + "/flex",
                          json={"mesh": mesh, "driver": [0, 1], "range": [1.0, 2.0], "frames": 4})
        assert r.status_code == 202
        rec = wait_for_job(base_url, r.json()["job"])
        assert rec["status"] == "failed"
        assert rec["error"]["reason"]


class TestCheck:
    def test_check_mesh(self, base_url):
        mesh = object_payload(catalog("bricard1"))
        r = requests.post(base_url + "/check", json={"mesh": mesh})
        assert r.status_code == 200
        d = r.json()
        assert d["flex_modes"] == 1
        assert d["embedded"] is False
        assert abs(d["volume"]) < 1e-10

    def test_check_star_frame_not_embedded(self, base_url):
        tw = catalog("star_dodecahedron")
        mesh = object_payload(tw)
        r = requests.post(base_url + "/check",
                          json={"mesh": mesh, "coordinates": tw.mesh.vertices.tolist()})
        assert r.json()["embedded"] is False

    def test_check_frames(self, base_url):
        result = run_flex_request({"model": "bricard1", "frames": 5})
        r = requests.post(base_url + "/check",
                          json={"mesh": result["mesh"], "frames": result["frames"]})
        assert r.status_code == 200
        assert len(r.json()["frames"]) == 5


class TestNet:
    def test_net_svg(self, base_url):
        r = requests.post(base_url + "/net", json={"model": "bricard_crinkle"})
        assert r.status_code == 200
        assert r.headers["Content-Type"] == "image/svg+xml"
        assert r.text.startswith("<svg")


class TestSharedCore:
    def test_cli_and_http_build_payloads_identical(self, base_url, tmp_path, capsys):
        from twinflex.cli import main

        out = tmp_path / "m.json"
        main(["build", "bricard1", "-o", str(out)])
        capsys.readouterr()
        http = requests.post(base_url + "/build", json={"model": "bricard1", "params": {}})
        assert out.read_text() == dump_payload(http.json())

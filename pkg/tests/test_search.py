import json

import pytest

from twinflex.errors import CatalogError
from twinflex.search import evaluate_sample, search_embedding


class TestDeterminism:
    def test_identical_scan_tables_for_same_seed(self):
        box = {"cz": (1.6, 2.4), "by": (1.2, 1.8)}
        one = search_embedding("bricard1", box, budget=4, seed=7, frames=7)
        two = search_embedding("bricard1", box, budget=4, seed=7, frames=7)
        assert json.dumps(one.to_dict(), sort_keys=True) == json.dumps(two.to_dict(), sort_keys=True)

    def test_different_seed_changes_samples(self):
        box = {"cz": (1.6, 2.4)}
        one = search_embedding("bricard1", box, budget=4, seed=1, frames=5)
        two = search_embedding("bricard1", box, budget=4, seed=2, frames=5)
        p1 = [s.params for s in one.samples[1:]]
        p2 = [s.params for s in two.samples[1:]]
        assert p1 != p2


class TestScoring:
    def test_twins_never_embed(self):
        scan = search_embedding("bricard1", {"cz": (1.8, 2.2)}, budget=3, seed=0, frames=7)
        for s in scan.samples:
            if s.status == "ok":
                assert s.embedded_range == 0.0
                assert s.embedded_fraction == 0.0

    def test_center_build_failure_short_circuits(self):
        # the resolver rejects out-of-box parameter values
        scan = search_embedding("anticupola", {"h1": (50.0, 60.0)}, budget=5, seed=0)
        assert scan.best_index is None
        assert scan.samples[0].status == "build_failed"
        assert len(scan.samples) == 1

    def test_unknown_template(self):
        with pytest.raises(CatalogError):
            search_embedding("nope", {"a": (0, 1)}, budget=2)

    def test_steffen_scan_structure(self):
        box = {"theta1": (0.5, 1.3), "theta2": (-1.3, -0.5)}
        scan = search_embedding("steffen_style", box, budget=3, seed=3, frames=7)
        assert len(scan.samples) == 3
        assert {s.status for s in scan.samples} <= {"ok", "build_failed", "trace_failed"}
        d = scan.to_dict()
        assert d["template"] == "steffen_style"
        assert [list(v) for v in sorted(box.values())] == sorted(d["box"].values())


class TestPersistence:
    def test_out_dir_files(self, tmp_path):
        scan = search_embedding("bricard1", {"cz": (1.9, 2.1)}, budget=2, seed=0,
                                frames=5, out_dir=tmp_path)
        assert scan.best_index is not None
        assert (tmp_path / "best_mesh.json").exists()
        assert (tmp_path / "best_path.json").exists()
        assert (tmp_path / "scan.json").exists()
        table = json.loads((tmp_path / "scan.json").read_text())
        assert table["seed"] == 0


class TestEvaluateSample:
    def test_ok_sample(self):
        res = evaluate_sample("bricard1", {}, frames=5)
        assert res.status == "ok"
        assert res.driver_range is not None

    def test_build_failure_detail(self):
        res = evaluate_sample("bricard1", {"cz": -100.0})
        assert res.status == "build_failed"
        assert "cz" in res.detail

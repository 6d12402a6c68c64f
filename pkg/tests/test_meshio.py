import numpy as np
import pytest

from twinflex.catalog import catalog
from twinflex.errors import MeshError
from twinflex.meshio import (
    dump_payload,
    load_mesh,
    load_mesh_json,
    load_obj,
    mesh_from_dict,
    mesh_to_dict,
    object_from_payload,
    object_payload,
    save_mesh_json,
    save_obj,
)
from twinflex.twinning import Crinkle, Twin


class TestJsonRoundTrip:
    def test_mesh_schema(self, unit_tetrahedron):
        d = mesh_to_dict(unit_tetrahedron)
        assert set(d) == {"vertices", "faces"}
        back = mesh_from_dict(d)
        np.testing.assert_array_equal(back.vertices, unit_tetrahedron.vertices)
        np.testing.assert_array_equal(back.faces, unit_tetrahedron.faces)

    def test_labels_preserved(self, tmp_path):
        tw = catalog("bricard1")
        p = tmp_path / "m.json"
        save_mesh_json(tw.mesh, p)
        back = load_mesh_json(p)
        assert back.labels == tw.mesh.labels

    def test_missing_keys_rejected(self):
        with pytest.raises(MeshError, match="vertices"):
            mesh_from_dict({"faces": []})

    def test_full_precision(self, tmp_path):
        tw = catalog("bricard2")
        p = tmp_path / "m.json"
        save_mesh_json(tw.mesh, p)
        back = load_mesh_json(p)
        assert back.vertices.tolist() == tw.mesh.vertices.tolist()


class TestObj:
    def test_round_trip(self, tmp_path, cube2):
        p = tmp_path / "cube.obj"
        save_obj(cube2, p)
        back = load_obj(p)
        np.testing.assert_allclose(back.vertices, cube2.vertices)
        np.testing.assert_array_equal(back.faces, cube2.faces)

    def test_one_based_indices(self, tmp_path, unit_tetrahedron):
        p = tmp_path / "t.obj"
        save_obj(unit_tetrahedron, p)
        face_lines = [ln for ln in p.read_text().splitlines() if ln.startswith("f ")]
        assert len(face_lines) == 4
        indices = [int(tok) for ln in face_lines for tok in ln.split()[1:]]
        assert min(indices) == 1 and max(indices) == 4

    def test_dispatch_by_extension(self, tmp_path, cube2):
        save_obj(cube2, tmp_path / "c.obj")
        save_mesh_json(cube2, tmp_path / "c.json")
        assert load_mesh(tmp_path / "c.obj").faces.shape == cube2.faces.shape
        assert load_mesh(tmp_path / "c.json").faces.shape == cube2.faces.shape

    def test_non_triangle_rejected(self, tmp_path):
        p = tmp_path / "quad.obj"
        p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
        with pytest.raises(MeshError, match="triangular"):
            load_obj(p)


class TestObjectPayload:
    def test_twin_round_trip(self):
        tw = catalog("bricard1")
        d = object_payload(tw, model="bricard1", params={"cz": 2.0})
        assert d["kind"] == "twin" and d["twin_type"] == "I"
        back = object_from_payload(d)
        assert isinstance(back, Twin)
        assert back.equator == tw.equator
        assert back.pairing == tw.pairing

    def test_crinkle_round_trip(self):
        cr = catalog("pentagonal_crinkle")
        back = object_from_payload(object_payload(cr))
        assert isinstance(back, Crinkle)
        assert back.phantom_pairs == cr.phantom_pairs
        assert back.boundary == cr.boundary

    def test_plain_mesh_payload(self, cube2):
        d = object_payload(cube2)
        assert d["kind"] == "mesh"
        back = object_from_payload(d)
        assert back.faces.shape == cube2.faces.shape

    def test_dump_payload_is_canonical(self):
        a = dump_payload({"b": 1, "a": [1.5, 2]})
        assert a == '{"a":[1.5,2],"b":1}'

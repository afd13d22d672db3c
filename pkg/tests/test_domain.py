import json

import numpy as np
import pytest

from sharpspec.domain import (DomainError, DomainSpec, VoxelDomain, parse_length, read_voxel_file,
                              voxelize, write_voxel_file)


def test_parse_length_fraction():
    assert parse_length("1/24") == pytest.approx(1 / 24)
    assert parse_length(0.5) == 0.5
    with pytest.raises(DomainError):
        parse_length("abc")


def test_ball_voxel_count():
    assert voxelize(DomainSpec("ball", 0.5, (1.0,))).n_cells == 32


def test_box_voxel_count_and_volume():
    v = voxelize(DomainSpec("box", 0.25, extent=((0, 1),) * 3))
    assert v.n_cells == 64
    assert v.volume == pytest.approx(1.0)


def test_centers_inside_ball():
    v = voxelize(DomainSpec("ball", 1 / 6, (1.0,)))
    assert np.all(np.linalg.norm(v.centers(), axis=1) < 1.0)


def test_unknown_field_rejected(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps({"shape": "ball", "h": 0.25, "colour": "red"}))
    with pytest.raises(DomainError, match="unknown field"):
        DomainSpec.load(p)


def test_load_roundtrip(tmp_path):
    p = tmp_path / "d.json"
    p.write_text(json.dumps({"shape": "shell", "h": "1/8", "radius": [0.5, 1.0], "seed": 7}))
    spec = DomainSpec.load(p)
    assert spec.h == pytest.approx(0.125) and spec.seed == 7
    assert DomainSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("bad", [
    {"shape": "ball", "h": -1},
    {"shape": "cone", "h": 0.1},
    {"shape": "box", "h": 0.1},
    {"shape": "shell", "h": 0.1, "radius": [1.0, 0.5]},
    {"h": 0.1},
])
def test_invalid_specs(bad):
    with pytest.raises(DomainError):
        DomainSpec.from_dict(bad)


def test_voxel_file_roundtrip(tmp_path):
    cells = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0]])
    p = tmp_path / "v.txt"
    write_voxel_file(p, cells)
    spec = DomainSpec("voxels", 0.5, voxels_path=str(p))
    assert voxelize(spec).n_cells == 3
    np.testing.assert_array_equal(read_voxel_file(p), cells)


def test_empty_voxel_domain_rejected():
    with pytest.raises(DomainError):
        VoxelDomain(np.zeros((0, 3), dtype=int), 1.0)

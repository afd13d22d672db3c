import numpy as np
import pytest

from sharpspec.cubical import (betti, boundary_closure_violations, build_complex, dd_residual,
                               duality_residual, euler_characteristic, intertwining_residual,
                               mimetic_pair, to_dense_pair)
from sharpspec.domain import DomainSpec, VoxelDomain, voxelize


def test_single_cube_counts():
    c = build_complex(VoxelDomain(np.zeros((1, 3), dtype=int), 1.0))
    assert c.counts() == (8, 12, 6, 1)
    assert euler_characteristic(c) == 1


@pytest.mark.parametrize("spec", [
    DomainSpec("ball", 0.25, (1.0,)),
    DomainSpec("shell", 0.25, (0.5, 1.0)),
    DomainSpec("box", 1 / 5, extent=((0, 1), (0, 1))),
])
def test_exact_sequence_and_closed_boundary(spec):
    c = build_complex(voxelize(spec))
    assert dd_residual(c) == 0
    assert boundary_closure_violations(c) == 0


@pytest.mark.parametrize("spec, expected", [
    (DomainSpec("ball", 0.25, (1.0,)), (1, 0, 0, 0)),
    (DomainSpec("solid-torus", 0.25, (1.0, 0.5)), (1, 1, 0, 0)),
    (DomainSpec("shell", 0.25, (0.5, 1.0)), (1, 0, 1, 0)),
    (DomainSpec("solid-torus", 1 / 6, (1.0, 0.5)), (1, 1, 0, 0)),
])
def test_betti_numbers(spec, expected):
    assert tuple(betti(build_complex(voxelize(spec)))) == expected


def test_betti_methods_agree_on_small_shell():
    c = build_complex(voxelize(DomainSpec("shell", 0.25, (0.5, 1.0))))
    assert betti(c, "rank") == betti(c, "topological")


def test_mimetic_pair_identities(rng):
    c = build_complex(voxelize(DomainSpec("box", 1 / 3, extent=((0, 1),) * 3)))
    for k in range(3):
        m = mimetic_pair(c, k)
        assert intertwining_residual(m) == 0
        assert duality_residual(m, rng) <= 1e-13


def test_dense_pair_is_nested():
    c = build_complex(voxelize(DomainSpec("box", 1 / 4, extent=((0, 1),) * 2)))
    pair = to_dense_pair(mimetic_pair(c, 0))
    assert pair.inclusion_gap() < 1e-10


def test_l_shape_is_simply_connected():
    cells = np.array([[i, j] for i in range(4) for j in range(4) if i < 2 or j < 2])
    assert tuple(betti(build_complex(VoxelDomain(cells, 0.25)))) == (1, 0, 0)

import numpy as np
import pytest

from sharpspec.cubical import build_complex
from sharpspec.domain import DomainSpec, voxelize
from sharpspec.projector import ProjectorChain, embed, intertwining_defect


@pytest.fixture(scope="module")
def torus_complex():
    return build_complex(voxelize(DomainSpec("solid-torus", 0.25, (1.0, 0.5))))


def test_embedding_intertwines_exactly(torus_complex):
    emb = embed(torus_complex)
    assert intertwining_defect(emb) == 0
    assert all(n % 2 == 1 for n in emb.grid.n)


def test_extend_restrict_roundtrip(torus_complex, rng):
    emb = embed(torus_complex)
    x = rng.standard_normal(emb.n_edges)
    np.testing.assert_array_equal(emb.restrict(emb.extend(x)), x)


def test_projector_checks_with_harmonic_field(torus_complex, rng):
    P = ProjectorChain(torus_complex, cg_tol=1e-10)
    rep = P.check(rng)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert rep.info["harmonic dimension"] == 1


def test_projector_output_is_coclosed(rng):
    c = build_complex(voxelize(DomainSpec("ball", 0.25, (1.0,))))
    P = ProjectorChain(c)
    y = P(rng.standard_normal(P.n))
    assert np.linalg.norm(P.d0.T @ y) < 1e-8 * np.linalg.norm(y)
    assert P.harmonic.shape[1] == 0


def test_two_dimensional_complex_rejected():
    c = build_complex(voxelize(DomainSpec("box", 0.25, extent=((0, 1), (0, 1)))))
    with pytest.raises(ValueError):
        ProjectorChain(c)

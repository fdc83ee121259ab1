import numpy as np
import pytest

from cutcelldg import mesh as meshmod
from cutcelldg.problems import solid_body_rotation
from cutcelldg.solver import DGContext


@pytest.fixture(scope="session")
def sbr_problem():
    return solid_body_rotation()


@pytest.fixture(scope="session")
def annulus_mesh_25(sbr_problem):
    return meshmod.generate_mesh(sbr_problem.boundary, sbr_problem.domain,
                                 25, 25, q=2)


@pytest.fixture(scope="session")
def annulus_mesh_50(sbr_problem):
    return meshmod.generate_mesh(sbr_problem.boundary, sbr_problem.domain,
                                 50, 50, q=2)


@pytest.fixture(scope="session")
def annulus_ctx_p2(annulus_mesh_50, sbr_problem):
    return DGContext(annulus_mesh_50, 2, sbr_problem.bcs)


@pytest.fixture(scope="session")
def cartesian_ctx_p1():
    """4x4 all-fluid periodic grid, p=1 (advection-ready)."""
    from cutcelldg.problems import manufactured_advection
    prob = manufactured_advection()
    m = meshmod.generate_mesh(None, prob.domain, 4, 4, q=2,
                              periodic_x=True, periodic_y=True)
    return DGContext(m, 1, prob.bcs), prob


def random_polynomial(rng, p, m=1):
    """Callable evaluating a random 2D polynomial of total degree <= p."""
    terms = [(a, b) for a in range(p + 1) for b in range(p + 1 - a)]
    coef = rng.normal(size=(len(terms), m))

    def fn(pts):
        out = np.zeros(pts.shape[:-1] + (m,))
        for (a, b), c in zip(terms, coef):
            out += (pts[..., 0] ** a * pts[..., 1] ** b)[..., None] * c
        return out

    return fn

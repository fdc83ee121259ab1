import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutcelldg import euler
from cutcelldg import mesh as meshmod
from cutcelldg.errors import MaxStepsExceeded, SolverBlowup
from cutcelldg.io_out import load_checkpoint, save_checkpoint
from cutcelldg.problems import manufactured_advection, solid_body_rotation
from cutcelldg.solver import (
    AdvectionLaw,
    BCSpec,
    DGContext,
    EulerLaw,
    compute_rhs,
    quiescent_bc,
    run,
    scheme_for_p,
    stable_dt,
    step,
)
from cutcelldg.srd import apply_srd

GAMMA = 1.4


def random_states(rng, n):
    return euler.conserved(rng.uniform(0.3, 6, n), rng.normal(0, 3, n),
                           rng.normal(0, 3, n), rng.uniform(0.2, 60, n),
                           GAMMA)


class TestFluxes:
    def test_roe_consistency(self):
        rng = np.random.default_rng(0)
        U = random_states(rng, 200)
        th = rng.uniform(0, 2 * np.pi, 200)
        n = np.stack([np.cos(th), np.sin(th)], axis=-1)
        law = EulerLaw(GAMMA)
        F = law.num_flux("roe", U, U.copy(), n, None)
        Fexact = euler.normal_flux(U, n, GAMMA)
        assert np.abs(F - Fexact).max() < 1e-13 * np.abs(Fexact).max()

    def test_llf_consistency(self):
        rng = np.random.default_rng(1)
        U = random_states(rng, 100)
        n = np.stack([np.ones(100), np.zeros(100)], axis=-1)
        F = euler.llf_flux(U, U.copy(), n, GAMMA)
        assert np.allclose(F, euler.normal_flux(U, n, GAMMA), atol=1e-13)

    def test_llf_matches_reference_formula(self):
        """Independent oracle: 0.5(F-+F+).n - 0.5 lambda_max (U+ - U-)."""
        rng = np.random.default_rng(2)
        Um = random_states(rng, 60)
        Up = random_states(rng, 60)
        th = rng.uniform(0, 2 * np.pi, 60)
        n = np.stack([np.cos(th), np.sin(th)], axis=-1)
        got = euler.llf_flux(Um, Up, n, GAMMA)
        for k in range(60):
            rho, u, v, P = euler.primitives(Um[k], GAMMA)
            cm = np.sqrt(GAMMA * P / rho)
            vm = u * n[k, 0] + v * n[k, 1]
            rho, u, v, P = euler.primitives(Up[k], GAMMA)
            cp = np.sqrt(GAMMA * P / rho)
            vp = u * n[k, 0] + v * n[k, 1]
            lam = max(abs(vm) + cm, abs(vp) + cp)
            want = 0.5 * (euler.normal_flux(Um[k], n[k], GAMMA)
                          + euler.normal_flux(Up[k], n[k], GAMMA)) \
                - 0.5 * lam * (Up[k] - Um[k])
            assert np.abs(got[k] - want).max() < 1e-13 * max(
                1.0, np.abs(want).max())

    def test_upwind_definition(self):
        law = AdvectionLaw(lambda pts: np.broadcast_to(
            np.array([2.0, 0.0]), pts.shape[:-1] + (2,)))
        n = np.array([[1.0, 0.0], [-1.0, 0.0]])
        pts = np.zeros((2, 2))
        Um = np.array([[3.0], [3.0]])
        Up = np.array([[5.0], [5.0]])
        F = law.num_flux("upwind", Um, Up, n, pts)
        assert np.isclose(F[0, 0], 2.0 * 3.0)    # a.n > 0: upwind from minus
        assert np.isclose(F[1, 0], -2.0 * 5.0)   # a.n < 0: from plus side

    def test_wall_flux_formula(self):
        U = euler.conserved(1.2, 0.4, -0.3, 2.0, GAMMA)
        n = np.array([0.6, 0.8])
        F = euler.wall_flux(U, n, GAMMA)
        P = euler.pressure(U, GAMMA)
        assert np.allclose(F, [0.0, P * 0.6, P * 0.8, 0.0], atol=1e-14)

    def test_roe_fallback_counts(self):
        law = EulerLaw(GAMMA)
        Um = euler.conserved(1.0, 0.0, 0.0, 1.0, GAMMA)[None, :]
        bad = Um.copy()
        bad[0, 0] = -1.0          # negative density triggers the LLF path
        n = np.array([[1.0, 0.0]])
        law.num_flux("roe", Um, bad, n, None)
        assert law.roe_fallbacks[0] >= 1

    @settings(max_examples=60, deadline=None)
    @given(rho=st.floats(0.1, 10), u=st.floats(-5, 5), v=st.floats(-5, 5),
           P=st.floats(0.1, 100), th=st.floats(0, 6.28))
    def test_roe_consistency_property(self, rho, u, v, P, th):
        U = euler.conserved(rho, u, v, P, GAMMA)[None, :]
        n = np.array([[np.cos(th), np.sin(th)]])
        F = euler.roe_flux(U, U.copy(), n, GAMMA)
        Fx = euler.normal_flux(U, n, GAMMA)
        assert np.abs(F - Fx).max() <= 1e-12 * max(1.0, np.abs(Fx).max())


class TestEigen:
    def test_right_left_inverse(self):
        rng = np.random.default_rng(3)
        U = random_states(rng, 80)
        th = rng.uniform(0, 2 * np.pi, 80)
        d = np.stack([np.cos(th), np.sin(th)], axis=-1)
        R, L = euler.eigenvectors(U, d, GAMMA)
        eye = np.einsum("cij,cjk->cik", R, L)
        assert np.abs(eye - np.eye(4)).max() < 1e-10

    def test_jacobian_reconstruction(self):
        rng = np.random.default_rng(4)
        U = random_states(rng, 20)
        d = np.tile(np.array([0.8, 0.6]), (20, 1))
        A = euler.flux_jacobian(U, d, GAMMA)
        eps = 1e-7
        for k in range(0, 20, 5):
            Afd = np.empty((4, 4))
            for j in range(4):
                dU = np.zeros(4)
                dU[j] = eps * max(1.0, abs(U[k, j]))
                Fp = euler.normal_flux(U[k] + dU, d[k], GAMMA)
                Fm = euler.normal_flux(U[k] - dU, d[k], GAMMA)
                Afd[:, j] = (Fp - Fm) / (2 * dU[j])
            assert np.abs(A[k] - Afd).max() < 1e-5


class TestStableDt:
    def test_formula(self):
        assert np.isclose(stable_dt(1, 1.0, 0.0, 0.01, 1.0, cfl=0.9), 0.003)

    def test_p0_reduction(self):
        assert np.isclose(stable_dt(0, 2.0, 1.0, 0.1, 0.1, cfl=0.5),
                          0.5 / (2.0 / 0.1 + 1.0 / 0.1))

    def test_euler_wavespeeds_from_averages(self, annulus_mesh_25):
        bcs = {"boundary:outer": BCSpec("reflect"),
               "boundary:inner": BCSpec("reflect")}
        ctx = DGContext(annulus_mesh_25, 1, bcs)
        law = EulerLaw(GAMMA)
        rng = np.random.default_rng(5)
        C = np.zeros((ctx.mesh.n_cells, ctx.n_modes, 4))
        C[:, 0, :] = random_states(rng, ctx.mesh.n_cells)
        ax, ay = law.wavespeeds(ctx, C)
        rho, u, v, P = euler.primitives(C[:, 0, :], GAMMA)
        c = np.sqrt(GAMMA * P / rho)
        assert np.isclose(ax, np.max(np.abs(u) + c))
        assert np.isclose(ay, np.max(np.abs(v) + c))


class TestFreeStream:
    """A constant admissible state is an exact steady solution of step();
    the raw per-cell rhs sees eps/|K| roundoff amplification on sliver
    cells, but the stabilized step leaves the state unchanged to 1e-11."""

    @pytest.mark.parametrize("p", [1, 2])
    def test_euler_quiescent_on_annulus(self, annulus_mesh_50, p):
        bcs = {"boundary:outer": BCSpec("reflect"),
               "boundary:inner": BCSpec("reflect")}
        ctx = DGContext(annulus_mesh_50, p, bcs)
        law = EulerLaw(GAMMA)
        state = euler.conserved(1.0, 0.0, 0.0, 1.0 / GAMMA, GAMMA)
        C = ctx.project(lambda pts: np.broadcast_to(
            state, pts.shape[:-1] + (4,)).copy())
        post = lambda X: apply_srd(ctx.plan, X)
        dt = stable_dt(p, 1.0, 1.0, ctx.mesh.dx, ctx.mesh.dy)
        for flux in ("roe", "llf"):
            out = step(ctx, law, flux, C, 0.0, dt, post,
                       scheme_for_p(p))
            assert np.abs(out - C).max() < 1e-11

    @pytest.mark.parametrize("p", [1, 2])
    def test_constant_advection_on_annulus(self, annulus_mesh_50, p):
        const = np.array([0.7, -0.4])
        law = AdvectionLaw(lambda pts: np.broadcast_to(
            const, pts.shape[:-1] + (2,)))
        exact = lambda pts, t: np.ones(pts.shape[:-1] + (1,)) * 2.5
        bcs = {"boundary:outer": BCSpec("exact", fn=exact),
               "boundary:inner": BCSpec("exact", fn=exact)}
        ctx = DGContext(annulus_mesh_50, p, bcs)
        C = ctx.project(lambda pts: np.full(pts.shape[:-1] + (1,), 2.5))
        post = lambda X: apply_srd(ctx.plan, X)
        dt = stable_dt(p, 0.7, 0.4, ctx.mesh.dx, ctx.mesh.dy)
        out = step(ctx, law, "upwind", C, 0.0, dt, post, scheme_for_p(p))
        assert np.abs(out - C).max() < 1e-11

    def test_constant_state_is_steady_under_step(self, cartesian_ctx_p1):
        ctx, prob = cartesian_ctx_p1
        C = ctx.project(lambda pts: np.full(pts.shape[:-1] + (1,), 1.3))
        post = lambda X: apply_srd(ctx.plan, X)
        out = step(ctx, prob.law, "upwind", C, 0.0, 0.01, post, "ssp2")
        assert np.abs(out - C).max() < 1e-13


class TestStepping:
    def test_zero_velocity_keeps_field(self, cartesian_ctx_p1):
        ctx, _ = cartesian_ctx_p1
        law = AdvectionLaw(lambda pts: np.zeros(pts.shape[:-1] + (2,)))
        rng = np.random.default_rng(6)
        C = rng.normal(size=(ctx.mesh.n_cells, ctx.n_modes, 1))
        post = lambda X: apply_srd(ctx.plan, X)
        out = step(ctx, law, "upwind", C, 0.0, 0.05, post, "ssp2")
        assert np.abs(out - C).max() < 1e-14

    def test_t_final_zero_identity(self, cartesian_ctx_p1):
        ctx, prob = cartesian_ctx_p1
        C = ctx.project(prob.ic)
        res = run(ctx, prob.law, prob.flux, C, t_final=0.0)
        assert res.steps == 0
        assert np.array_equal(res.C, C)

    def test_mass_conservation_two_steps(self, annulus_mesh_50, sbr_problem):
        ctx = DGContext(annulus_mesh_50, 1, sbr_problem.bcs)
        C0 = ctx.project(sbr_problem.ic)
        ax, ay = sbr_problem.law.wavespeeds(ctx, C0)
        dt = stable_dt(1, ax, ay, ctx.mesh.dx, ctx.mesh.dy)
        res = run(ctx, sbr_problem.law, "upwind", C0, t_final=2 * dt)
        m0, m1 = ctx.mass(C0), ctx.mass(res.C)
        assert np.abs(m1 - m0).max() < 1e-12 * np.abs(m0).max()

    def test_steady_residual_of_steady_field(self):
        """a . grad u = 0 manufactured: rhs residual decays at order p+1.

        The profile rides on y - x with a = (1, 1), so it is steady but not
        grid aligned (a grid-aligned profile has machine-zero residual)."""
        p = 1
        law = AdvectionLaw(lambda pts: np.broadcast_to(
            np.array([1.0, 1.0]), pts.shape[:-1] + (2,)))
        exact = lambda pts, t: np.sin(
            2 * np.pi * (pts[..., 1] - pts[..., 0]))[..., None]
        norms = []
        for N in (8, 16):
            m = meshmod.generate_mesh(None, (0, 0, 1, 1), N, N, q=2,
                                      periodic_x=True, periodic_y=True)
            ctx = DGContext(m, p, {})
            C = ctx.project(lambda pts: exact(pts, 0.0))
            r = compute_rhs(ctx, law, "upwind", C, 0.0)
            # the cell-average residual superconverges; the raw coefficient
            # residual of the projection is only O(h^p)
            norms.append(np.abs(r[:, 0, 0]).max())
        rate = np.log(norms[0] / norms[1]) / np.log(2)
        assert rate >= p + 0.7, (norms, rate)

    def test_blowup_detection(self, cartesian_ctx_p1):
        ctx, prob = cartesian_ctx_p1
        C = ctx.project(prob.ic)
        C[0, 0, 0] = np.nan
        with pytest.raises(SolverBlowup):
            run(ctx, prob.law, prob.flux, C, t_final=1.0)

    def test_max_steps_guard(self, cartesian_ctx_p1):
        ctx, prob = cartesian_ctx_p1
        C = ctx.project(prob.ic)
        with pytest.raises(MaxStepsExceeded):
            run(ctx, prob.law, prob.flux, C, t_final=10.0, max_steps=3)

    def test_final_time_hit_exactly(self, cartesian_ctx_p1):
        ctx, prob = cartesian_ctx_p1
        C = ctx.project(prob.ic)
        res = run(ctx, prob.law, prob.flux, C, t_final=0.0321)
        assert np.isclose(res.t, 0.0321, rtol=0, atol=1e-15)

    def test_scheme_pairing(self):
        assert scheme_for_p(1) == "ssp2"
        assert scheme_for_p(2) == "ssp3"
        assert scheme_for_p(3) == "rk4"
        assert scheme_for_p(4) == "lsrk4"
        assert scheme_for_p(6) == "lsrk4"

    @pytest.mark.parametrize("p,scheme", [(3, "rk4"), (4, "lsrk4")])
    def test_higher_order_schemes_advance(self, p, scheme):
        prob = manufactured_advection(direction=(1.0, 0.0))
        m = meshmod.generate_mesh(None, prob.domain, 8, 8, q=2,
                                  periodic_x=True, periodic_y=True)
        ctx = DGContext(m, p, prob.bcs)
        C0 = ctx.project(prob.ic)
        res = run(ctx, prob.law, prob.flux, C0, t_final=0.05)
        assert np.all(np.isfinite(res.C))
        m0, m1 = ctx.mass(C0), ctx.mass(res.C)
        assert np.abs(m1 - m0).max() < 1e-12 * max(np.abs(m0).max(), 1e-3)


def test_checkpoint_round_trip(tmp_path, cartesian_ctx_p1):
    ctx, prob = cartesian_ctx_p1
    C = ctx.project(prob.ic)
    path = tmp_path / "chk.npz"
    save_checkpoint(path, C, 0.25, 1, {"note": "x"})
    C2, t, p, meta = load_checkpoint(path)
    assert np.array_equal(C, C2)
    assert t == 0.25 and p == 1 and meta == {"note": "x"}

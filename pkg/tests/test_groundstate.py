import os

import numpy as np
import pytest

from magzak import (
    BoundaryContamination,
    DomainError,
    GroundState,
    TorusGrid,
    best_constant,
    petviashvili,
    sharp_inequality_check,
    shooting_mass,
)
from magzak import groundstate as gst

RUN_SLOW = os.environ.get("MAGZAK_SLOW_TESTS") == "1"


@pytest.fixture(scope="module")
def gs2():
    return petviashvili(2)


@pytest.fixture(scope="module")
def oracle2():
    return shooting_mass(2)


class TestShootingOracle:
    def test_townes_mass_and_peak(self, oracle2):
        mass, q0 = oracle2
        assert abs(mass - 11.70) < 0.01
        assert abs(q0 - 2.2062) < 1e-3

    def test_d3_values_consistent_with_rescaling(self):
        # the d = 3 profile is the standard cubic soliton scaled by
        # Q(x) = S(x / sqrt(3)) / sqrt(2), so mass = 3^{3/2}/2 * ||S||^2
        mass3, q0_3 = shooting_mass(3)
        assert 40.0 < mass3 < 60.0
        assert 2.5 < q0_3 < 3.5

    def test_bad_bracket_rejected(self):
        with pytest.raises(DomainError):
            shooting_mass(2, bracket=(3.0, 4.0))


class TestPetviashvili2D:
    def test_residual_below_tolerance(self, gs2):
        assert gs2.residual < 1e-10

    def test_stabilizer_converges_to_one(self, gs2):
        assert abs(gs2.stabilizer - 1.0) < 1e-10

    def test_mass_matches_oracle(self, gs2, oracle2):
        mass_oracle, _ = oracle2
        assert abs(gs2.mass - mass_oracle) / mass_oracle < 5e-3

    def test_profile_positive_and_monotone(self, gs2):
        N = gs2.grid.N
        assert np.all(gs2.Q > -1e-12)
        row = gs2.Q[N // 2, N // 2:]
        assert np.all(np.diff(row) <= 1e-12)
        col = gs2.Q[N // 2:, N // 2]
        assert np.all(np.diff(col) <= 1e-12)

    def test_mass_grid_converged_under_doubling(self, gs2):
        finer = petviashvili(2, TorusGrid(2, 1024, 56.0))
        assert abs(finer.mass - gs2.mass) / gs2.mass < 1e-6

    def test_boundary_contamination_raised_for_small_period(self):
        with pytest.raises(BoundaryContamination):
            petviashvili(2, TorusGrid(2, 256, 24.0))

    def test_residual_decreases_after_warmup(self):
        # track the residual sequence on a modest grid
        g = TorusGrid(2, 256, 48.0)
        a, b = gst.equation_coefficients(2)
        inv_op = 1.0 / (b + a * g.ksq)
        center = g.P / 2.0
        Q = np.exp(-np.sum((g.x - center) ** 2, axis=0))
        residuals = []
        for _ in range(30):
            Q3 = Q**3
            lhs = g.to_physical((b + a * g.ksq) * g.to_spectral(Q)).real
            S = float(np.sum(lhs * Q)) / float(np.sum(Q3 * Q))
            Q = S**1.5 * g.to_physical(inv_op * g.to_spectral(Q3)).real
            residuals.append(gst._residual_norm(g, Q, a, b))
        tail = residuals[5:]
        assert all(b <= a * (1.0 + 1e-12) for a, b in zip(tail, tail[1:]))


class TestBestConstant:
    def test_formula(self, gs2):
        k4 = best_constant(gs2)
        assert abs(k4 - 2.0 / gs2.mass) < 1e-15
        assert abs(gs2.k8 - k4**2) < 1e-15

    def test_known_2d_value(self, gs2):
        assert abs(best_constant(gs2) - 0.1709) < 1e-3

    def test_monotone_in_mass(self, gs2):
        heavier = GroundState(
            d=2, grid=gs2.grid, Q=gs2.Q, mass=2.0 * gs2.mass, residual=gs2.residual,
            tol=gs2.tol, stabilizer=1.0,
        )
        assert best_constant(heavier) < best_constant(gs2)

    def test_zero_mass_rejected(self, gs2):
        broken = GroundState(
            d=2, grid=gs2.grid, Q=gs2.Q, mass=0.0, residual=0.0, tol=1e-10, stabilizer=1.0
        )
        with pytest.raises(DomainError):
            best_constant(broken)


class TestSharpInequality:
    def test_optimizer_achieves_equality(self, gs2):
        ratio = gst.sharp_ratio(gs2.grid, gs2.Q, gs2.k4, 2)
        assert abs(ratio - 1.0) < 1e-6

    def test_gaussian_is_suboptimal(self, gs2):
        g = gs2.grid
        trial = np.exp(-np.sum((g.x - g.P / 2.0) ** 2, axis=0) / 4.0)
        ratio = gst.sharp_ratio(g, trial, gs2.k4, 2)
        assert ratio < 1.0

    def test_scale_invariances(self, gs2):
        g = gs2.grid
        base = gst.sharp_ratio(g, gs2.Q, gs2.k4, 2)
        # amplitude scaling
        assert abs(gst.sharp_ratio(g, 3.7 * gs2.Q, gs2.k4, 2) - base) < 1e-10
        # spatial dilation (trials stay localized within the torus)
        center = g.P / 2.0
        r_sq = np.sum((g.x - center) ** 2, axis=0)
        a = gst.sharp_ratio(g, np.exp(-r_sq), gs2.k4, 2)
        b = gst.sharp_ratio(g, np.exp(-r_sq / 4.0), gs2.k4, 2)  # dilated by 2
        assert abs(a - b) < 1e-8

    def test_max_over_trials(self, gs2):
        g = gs2.grid
        trial = np.exp(-np.sum((g.x - g.P / 2.0) ** 2, axis=0))
        assert sharp_inequality_check(gs2, [gs2.Q, trial]) == pytest.approx(1.0, abs=1e-6)

    def test_zero_trial_rejected(self, gs2):
        with pytest.raises(DomainError):
            gst.sharp_ratio(gs2.grid, np.zeros(gs2.grid.shape), gs2.k4, 2)


class TestCache:
    def test_round_trip(self, tmp_path, gs2):
        path = tmp_path / "gs.mzk"
        gst.write_groundstate(path, gs2)
        back = gst.read_groundstate(path)
        assert back.d == 2
        assert back.grid.same_as(gs2.grid)
        assert back.mass == gs2.mass
        assert back.residual == gs2.residual
        assert np.array_equal(back.Q, gs2.Q)

    def test_record_type_enforced(self, tmp_path, gs2, grid2, params):
        from magzak import SnapshotVersionMismatch, write_state_snapshot, zero_state

        path = tmp_path / "state.mzk"
        write_state_snapshot(path, zero_state(grid2, params))
        with pytest.raises(SnapshotVersionMismatch):
            gst.read_groundstate(path)


class TestPetviashvili3DMechanics:
    def test_small_grid_structural(self):
        # mechanics only: a coarse torus cannot meet the production boundary
        # bound, so it is relaxed here; the full-resolution run is opt-in below
        gs = petviashvili(3, TorusGrid(3, 64, 48.0), tol=3e-5, max_iter=300, boundary_tol=1e-3)
        assert gs.d == 3
        assert gs.mass > 0
        assert abs(gs.stabilizer - 1.0) < 1e-3
        N = gs.grid.N
        row = gs.Q[N // 2, N // 2, N // 2:]
        bulk = row > 1e-3 * row[0]  # below that the coarse grid's ringing dominates
        assert np.all(np.diff(row[bulk]) <= 1e-10)

    @pytest.mark.skipif(not RUN_SLOW, reason="several minutes of 256^3 FFTs; set MAGZAK_SLOW_TESTS=1")
    def test_full_resolution_matches_oracle(self):
        gs = petviashvili(3)
        mass_oracle, _ = shooting_mass(3)
        assert gs.residual < 1e-10
        assert abs(gs.mass - mass_oracle) / mass_oracle < 5e-3

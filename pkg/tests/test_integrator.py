import numpy as np
import pytest

from magzak import (
    BlowUp,
    DomainError,
    IntegratorConfig,
    LowFrequencyData,
    MaxIterExceeded,
    Params,
    from_modified,
    picard_window,
    rhs_modified,
    rhs_regularized,
    run,
    strang_step,
    to_modified,
    zero_state,
)
from magzak import fields as fs
from magzak import initial_data as idata
from magzak import integrate as it
from magzak import propagators as pr
from magzak import studies as st


@pytest.fixture
def small_state(sim_grid, params):
    return idata.gaussian_packet(
        sim_grid, params, e_norm=0.05, width=4.0, carrier=1.0, n_amp=0.1, n1_amp=0.02,
        b_amp=0.05, b1_amp=0.02,
    )


class TestConfig:
    def test_domains(self):
        IntegratorConfig()
        with pytest.raises(DomainError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(DomainError):
            IntegratorConfig(tol_fp=0.0)
        with pytest.raises(DomainError):
            IntegratorConfig(dt=0.1, t_win=0.05)
        with pytest.raises(DomainError):
            IntegratorConfig(scheme="leapfrog")


class TestRhsRegularized:
    def test_zero_E_gives_free_linear_rates(self, sim_grid, params, rng):
        stt = zero_state(sim_grid, params)
        stt.n = sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        stt.n_t = fs.project_zero_mean(
            sim_grid, sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        )
        dE, dn, dn_t, dB, dB_t = rhs_regularized(stt)
        assert np.max(np.abs(dE)) == 0
        assert np.array_equal(dn, stt.n_t)
        resid = dn_t - (-sim_grid.ksq * stt.n)
        assert np.max(np.abs(resid)) < 1e-12 * max(np.max(np.abs(dn_t)), 1.0)

    def test_single_transverse_mode_symbol(self, sim_grid):
        p = Params(alpha=1.5, epsilon=0.2, s=2.0)
        stt = zero_state(sim_grid, p)
        k1 = 2.0 * np.pi / sim_grid.P  # fundamental mode k = (2 pi / P, 0)
        stt.E[1] = sim_grid.to_spectral(np.exp(1j * k1 * sim_grid.x[0]))
        dE = rhs_regularized(stt)[0]
        expected_rate = -1j * p.alpha * k1**2 / (1.0 + p.epsilon**2 * k1**4)
        resid = dE[1] - expected_rate * stt.E[1]
        assert np.max(np.abs(resid)) < 1e-12 * np.max(np.abs(stt.E[1]))

    def test_source_means_vanish(self, small_state):
        _, _, dn_t, _, dB_t = rhs_regularized(small_state)
        g = small_state.grid
        zero = (0,) * g.d
        assert abs(dn_t[zero]) == 0
        assert np.max(np.abs(dB_t[(slice(None),) + zero])) == 0


class TestStrangStep:
    def test_linear_data_exact_any_dt(self, sim_grid, params, rng):
        stt = zero_state(sim_grid, params)
        stt.n = sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        stt.n_t = fs.project_zero_mean(
            sim_grid, sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        )
        stt.B = fs.project_zero_mean(
            sim_grid, sim_grid.to_spectral(rng.standard_normal((3,) + sim_grid.shape))
        )
        stt.B_t = fs.project_zero_mean(
            sim_grid, sim_grid.to_spectral(rng.standard_normal((3,) + sim_grid.shape))
        )
        dt = 0.3  # huge step: linear flows are exact
        out = strang_step(stt, dt)
        n_ref, nt_ref = pr.wave_free(sim_grid, stt.n, stt.n_t, dt)
        B_ref, Bt_ref = pr.plate_free(sim_grid, stt.B, stt.B_t, dt)
        scale = np.max(np.abs(stt.n))
        assert np.max(np.abs(out.n - n_ref)) < 1e-12 * scale
        assert np.max(np.abs(out.B - B_ref)) < 1e-12 * scale
        assert out.time == dt

    def test_plane_restriction_preserved(self, small_state):
        out = small_state
        for _ in range(5):
            out = strang_step(out, 5e-3)
        assert out.embedding_residue() < 1e-13

    def test_self_convergence_order_two(self, sim_grid, params):
        stt = idata.gaussian_packet(
            sim_grid, params, e_norm=0.3, width=2.5, carrier=2.0, n_amp=0.8, n1_amp=0.2,
            b_amp=0.4, b1_amp=0.1,
        )

        def evolve(dt, T=0.25):
            cfg = IntegratorConfig(scheme="strang", dt=dt, t_end=T, diag_interval=10.0)
            return run(stt, cfg).state

        dt = 1e-2
        u1, u2, uref = evolve(dt), evolve(dt / 2), evolve(dt / 8)
        g = sim_grid
        e1 = fs.sobolev_norm(g, u1.E - uref.E, 1.0) + fs.l2_norm(g, u1.n - uref.n)
        e2 = fs.sobolev_norm(g, u2.E - uref.E, 1.0) + fs.l2_norm(g, u2.n - uref.n)
        assert 3.6 <= e1 / e2 <= 4.4

    def test_reality_preserved(self, small_state):
        out = small_state
        for _ in range(20):
            out = strang_step(out, 2e-3)
        assert out.imag_residue() < 1e-10
        assert out.mean_residue() < 1e-12


class TestPicardWindow:
    def test_zero_data_single_sweep(self, sim_grid, params):
        stats = {}
        out = picard_window(zero_state(sim_grid, params), 0.05, 1e-10, 60, dt=5e-3, stats=stats)
        assert np.max(np.abs(out.E)) == 0
        assert stats["sweeps"] == 1
        assert out.time == 0.05

    def test_zero_E_pure_free_flight(self, sim_grid, params, rng):
        stt = zero_state(sim_grid, params)
        stt.n = sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        stt.n_t = fs.project_zero_mean(
            sim_grid, sim_grid.to_spectral(rng.standard_normal(sim_grid.shape))
        )
        out = picard_window(stt, 0.04, 1e-12, 60, dt=4e-3)
        n_ref, nt_ref = pr.wave_free(sim_grid, stt.n, stt.n_t, 0.04)
        assert np.max(np.abs(out.n - n_ref)) < 1e-11 * max(np.max(np.abs(n_ref)), 1.0)
        assert np.max(np.abs(out.E)) == 0

    def test_tolerance_halving_contracts(self, small_state):
        coarse = picard_window(small_state, 0.05, 1e-6, 80, dt=5e-3)
        fine = picard_window(small_state, 0.05, 5e-7, 80, dt=5e-3)
        diff = fs.sobolev_norm(small_state.grid, coarse.E - fine.E, 1.0)
        assert diff < 1e-6

    def test_window_split_consistency(self, small_state):
        tol = 1e-11
        one = picard_window(small_state, 0.05, tol, 80, dt=2.5e-3)
        half = picard_window(small_state, 0.025, tol, 80, dt=2.5e-3)
        two = picard_window(half, 0.025, tol, 80, dt=2.5e-3)
        diff = fs.sobolev_norm(small_state.grid, one.E - two.E, 1.0)
        assert diff < 2.0 * tol

    def test_max_iter_exceeded(self, small_state):
        with pytest.raises(MaxIterExceeded):
            picard_window(small_state, 0.05, 1e-14, 1, dt=5e-3)

    def test_non_contraction_on_long_window(self, sim_grid):
        from magzak import NonContraction

        p = Params(alpha=1.0, epsilon=0.1, s=2.0)
        strong = idata.gaussian_packet(
            sim_grid, p, e_norm=3.0, width=3.0, carrier=1.0, n_amp=9.0, b_amp=3.0
        )
        with pytest.raises(NonContraction):
            picard_window(strong, 0.4, 1e-8, 40, dt=0.1)

    def test_run_recovers_by_window_halving(self, sim_grid):
        p = Params(alpha=1.0, epsilon=0.1, s=2.0)
        strong = idata.gaussian_packet(
            sim_grid, p, e_norm=3.0, width=3.0, carrier=1.0, n_amp=9.0, b_amp=3.0
        )
        cfg = IntegratorConfig(
            scheme="picard", dt=5e-3, t_win=0.16, t_end=0.16, tol_fp=1e-8, max_iter=40,
            diag_interval=10.0,
        )
        res = run(strong, cfg)
        assert abs(res.state.time - 0.16) < 1e-9
        cfg_ref = IntegratorConfig(scheme="strang", dt=1e-3, t_end=0.16, diag_interval=10.0)
        ref = run(strong, cfg_ref).state
        assert fs.sobolev_norm(sim_grid, res.state.E - ref.E, 1.0) < 1e-4


class TestRun:
    def test_t_end_zero_single_record(self, small_state):
        cfg = IntegratorConfig(t_end=0.0)
        result = run(small_state, cfg)
        assert len(result.records) == 1
        assert result.state.time == 0.0

    def test_timestamps_strictly_increasing(self, small_state):
        cfg = IntegratorConfig(scheme="strang", dt=5e-3, t_end=0.1, diag_interval=0.02)
        result = run(small_state, cfg)
        times = [r.time for r in result.records]
        assert all(b > a for a, b in zip(times, times[1:]))
        assert abs(times[-1] - 0.1) < 1e-9

    def test_cross_scheme_consistency(self, small_state):
        dt = 5e-3
        cfg_s = IntegratorConfig(scheme="strang", dt=dt, t_end=0.1, diag_interval=10.0)
        cfg_p = IntegratorConfig(
            scheme="picard", dt=dt, t_end=0.1, t_win=0.05, tol_fp=1e-10, max_iter=80,
            diag_interval=10.0,
        )
        s_final = run(small_state, cfg_s).state
        p_final = run(small_state, cfg_p).state
        diff = fs.sobolev_norm(small_state.grid, s_final.E - p_final.E, 1.0)
        assert diff < max(1e-10, 10.0 * dt**2)

    def test_blowup_detected(self, sim_grid):
        p = Params(alpha=1.0, epsilon=0.1, s=2.0)
        stt = idata.gaussian_packet(sim_grid, p, e_norm=0.05)
        cfg = IntegratorConfig(
            scheme="strang", dt=1e-3, t_end=0.05, diag_interval=0.01, blowup_threshold=1e-6
        )
        with pytest.raises(BlowUp):
            run(stt, cfg)

    def test_phi_psi_drift_short_run(self, small_state):
        from magzak import diagnostics as dg

        cfg = IntegratorConfig(scheme="strang", dt=1e-3, t_end=0.2, diag_interval=0.05)
        result = run(small_state, cfg)
        assert all(r.drift_phi < 1e-10 for r in result.records)
        assert all(r.drift_psi < 1e-8 for r in result.records)

    def test_mean_conservation(self, small_state):
        cfg = IntegratorConfig(scheme="strang", dt=2e-3, t_end=0.1, diag_interval=10.0)
        final = run(small_state, cfg).state
        assert final.mean_residue() < 1e-12


class TestModifiedSystem:
    def test_round_trip_exact(self, small_state, rng):
        g = small_state.grid
        lfd = LowFrequencyData(
            n_1L=st.lowpass_symbol(g) * small_state.n_t,
            B_0L=st.lowpass_symbol(g) * small_state.B,
            B_1L=st.lowpass_symbol(g) * small_state.B_t,
        )
        stt = small_state.copy()
        stt.time = 0.37
        back = from_modified(to_modified(stt, lfd), lfd)
        for a, b in zip(back.fields(), stt.fields()):
            assert np.max(np.abs(a - b)) < 1e-15 or np.allclose(a, b, atol=1e-18)

    def test_zero_lfd_identity_any_time(self, small_state):
        lfd = LowFrequencyData.zero(small_state.grid)
        stt = small_state.copy()
        stt.time = 1.7
        out = to_modified(stt, lfd)
        for a, b in zip(out.fields(), stt.fields()):
            assert np.array_equal(a, b)

    def test_t_zero_mapping(self, small_state):
        g = small_state.grid
        lfd = LowFrequencyData(
            n_1L=st.lowpass_symbol(g) * small_state.n_t,
            B_0L=st.lowpass_symbol(g) * small_state.B,
            B_1L=st.lowpass_symbol(g) * small_state.B_t,
        )
        out = to_modified(small_state, lfd, t=0.0)
        assert np.array_equal(out.n, small_state.n)
        assert np.max(np.abs(out.B - (small_state.B - lfd.B_0L))) == 0

    def test_rhs_modified_reduces_to_regularized(self, small_state):
        lfd = LowFrequencyData.zero(small_state.grid)
        a = rhs_modified(small_state, lfd)
        b = rhs_regularized(small_state)
        for x, y in zip(a, b):
            assert np.max(np.abs(x - y)) < 1e-14 * max(np.max(np.abs(y)), 1.0)

    def test_modified_sources_vanish_above_cutoff(self, small_state):
        g = small_state.grid
        modified, lfd = st.split_initial_data(small_state)
        dn_t_mod = rhs_modified(modified, lfd)[2]
        dn_t_reg = rhs_regularized(modified)[2]
        source = dn_t_mod - dn_t_reg  # only the explicit low-frequency terms
        outside = g.kabs > 2.0
        assert np.max(np.abs(source * outside)) < 1e-12 * max(np.max(np.abs(source)), 1e-300)

    def test_lfd_support_validation(self, sim_grid, rng):
        bad = np.zeros(sim_grid.shape, dtype=complex)
        # place content at |k| > 2 (physical): index 32 -> k = 4 on P = 16 pi
        bad[32, 0] = 1.0
        lfd = LowFrequencyData(
            n_1L=bad,
            B_0L=np.zeros((3,) + sim_grid.shape, complex),
            B_1L=np.zeros((3,) + sim_grid.shape, complex),
        )
        with pytest.raises(DomainError):
            lfd.validate(sim_grid)

    def test_equivalence_with_direct_evolution(self, sim_grid):
        p = Params(alpha=1.0, epsilon=0.1, s=2.0)
        stt = idata.random_smooth(
            sim_grid, p, seed=3, decay=4.0, kcut=2.0, e_amp=0.15, n_amp=0.3, n1_amp=0.2,
            b_amp=0.25, b1_amp=0.15,
        )
        modified, lfd = st.split_initial_data(stt)
        dt = 5e-3
        cfg = IntegratorConfig(scheme="strang", dt=dt, t_end=0.1, diag_interval=10.0)
        cfg_mod = IntegratorConfig(
            scheme="strang", dt=dt, t_end=0.1, diag_interval=10.0, modified_mode=True
        )
        direct = run(stt, cfg).state
        reconstructed = from_modified(run(modified, cfg_mod, lfd=lfd).state, lfd)
        diff = fs.sobolev_norm(sim_grid, reconstructed.E - direct.E, 1.0)
        assert diff < 10.0 * dt**2

    def test_picard_handles_modified_mode(self, sim_grid):
        p = Params(alpha=1.0, epsilon=0.1, s=2.0)
        stt = idata.random_smooth(
            sim_grid, p, seed=5, decay=4.0, kcut=2.0, e_amp=0.1, n_amp=0.2, n1_amp=0.1,
            b_amp=0.1, b1_amp=0.1,
        )
        modified, lfd = st.split_initial_data(stt)
        cfg_mod = IntegratorConfig(
            scheme="picard", dt=5e-3, t_win=0.05, t_end=0.05, tol_fp=1e-10, max_iter=80,
            diag_interval=10.0, modified_mode=True,
        )
        cfg_strang = IntegratorConfig(
            scheme="strang", dt=2.5e-3, t_end=0.05, diag_interval=10.0, modified_mode=True
        )
        a = run(modified, cfg_mod, lfd=lfd).state
        b = run(modified, cfg_strang, lfd=lfd).state
        diff = fs.sobolev_norm(sim_grid, a.E - b.E, 1.0)
        assert diff < 1e-4

    def test_run_requires_lfd_in_modified_mode(self, small_state):
        cfg = IntegratorConfig(modified_mode=True, t_end=0.01)
        with pytest.raises(DomainError):
            run(small_state, cfg)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from delayed_choice import eraser
from delayed_choice.eraser import EraserConfig
from delayed_choice.errors import ConfigError, DarkBinError
from delayed_choice.qcore import is_isometry, is_unitary
from delayed_choice.wheeler import H, X, Y

UNIFORM = EraserConfig(N=4, envelope="uniform")


def closed_form_state(pt_r, pt_l, k, N):
    """(1/2)((p̃_R + p̃_L)|1⟩_D + (p̃_R − p̃_L)|2⟩_D)|x_k⟩ on D1 ⊗ D2 ⊗ screen."""
    det = np.zeros(4, dtype=complex)
    det[0b10] = 0.5 * (pt_r + pt_l)  # click D1, no click D2
    det[0b01] = 0.5 * (pt_r - pt_l)  # no click D1, click D2
    rec = np.zeros(N, dtype=complex)
    rec[k] = 1
    return np.kron(det, rec)


class TestConfig:
    @pytest.mark.parametrize(
        "field,value",
        [("N", 0), ("N", 1), ("wavelength", -1.0), ("slit_width", 0.0), ("envelope", "box"),
         ("aperture", 1.5), ("screen_distance", math.nan)],
    )
    def test_invalid_field_named(self, field, value):
        with pytest.raises(ConfigError) as exc:
            EraserConfig().replace(**{field: value})
        assert exc.value.field == field

    def test_defaults_geometry(self):
        cfg = EraserConfig()
        assert cfg.slit_separation == 20 * cfg.wavelength
        assert cfg.slit_width == 4 * cfg.wavelength
        assert np.all(np.abs(cfg.sin_angles) <= cfg.aperture)
        assert np.all(np.diff(cfg.positions) > 0)


class TestAmplitudes:
    @pytest.mark.parametrize("env", eraser.ENVELOPES)
    def test_normalized(self, env):
        amps = eraser.slit_amplitudes(EraserConfig(N=64, envelope=env))
        assert np.sum(np.abs(amps.p_R) ** 2) == pytest.approx(1, abs=1e-12)
        assert np.sum(np.abs(amps.p_L) ** 2) == pytest.approx(1, abs=1e-12)

    def test_uniform_moduli(self):
        amps = eraser.slit_amplitudes(UNIFORM)
        np.testing.assert_allclose(np.abs(amps.p_R), 0.5, atol=1e-15)
        np.testing.assert_allclose(np.abs(amps.p_L), 0.5, atol=1e-15)

    def test_zero_phase_at_center(self):
        amps = eraser.slit_amplitudes(UNIFORM)
        centre = int(np.argmin(np.abs(UNIFORM.sin_angles)))
        assert UNIFORM.sin_angles[centre] == 0
        assert np.angle(amps.p_R[centre] * np.conj(amps.p_L[centre])) == pytest.approx(0, abs=1e-15)

    def test_conditional_uniform(self):
        amps = eraser.slit_amplitudes(UNIFORM)
        for k in range(UNIFORM.N):
            c = eraser.conditional_amplitudes(amps, k)
            assert abs(c.p_R) == pytest.approx(1 / math.sqrt(2), abs=1e-15)
            assert abs(c.p_L) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    @pytest.mark.parametrize("env", eraser.ENVELOPES)
    def test_conditional_matches_oracle(self, env):
        amps = eraser.slit_amplitudes(EraserConfig(N=32, envelope=env))
        for k in range(32):
            c = eraser.conditional_amplitudes(amps, k)
            r, l = oracles.conditional_pair(amps.p_R[k], amps.p_L[k])
            assert abs(c.p_R - r) <= 1e-14 and abs(c.p_L - l) <= 1e-14

    def test_conditional_errors(self):
        amps = eraser.slit_amplitudes(UNIFORM)
        with pytest.raises(IndexError):
            eraser.conditional_amplitudes(amps, 4)
        dark = eraser.SlitAmplitudes(np.zeros(2, complex), np.zeros(2, complex), np.zeros(2))
        with pytest.raises(DarkBinError):
            eraser.conditional_amplitudes(dark, 0)


class TestOperators:
    def test_crystal_action(self):
        N = 4
        c = eraser.build_crystal(UNIFORM).toarray()
        assert c.shape == (4 * N * N, 2 * N)
        for slit in range(2):
            for n in range(N):
                single = np.zeros(2 * N)
                single[slit * N + n] = 1
                expected = np.kron(single, single)
                np.testing.assert_array_equal(c[:, slit * N + n], expected)
        assert is_isometry(eraser.build_crystal(UNIFORM))

    def test_screen_action(self):
        N = 4
        s = eraser.build_screen(UNIFORM).toarray()
        amps = eraser.slit_amplitudes(UNIFORM)
        pt = amps.conditional()
        for slit in range(2):
            for n in range(N):
                single = np.zeros(2 * N)
                single[slit * N + n] = 1
                out = s @ np.kron(single, single)
                expected = np.zeros(2 * N, complex)
                expected[slit * N:(slit + 1) * N] = pt[slit] / math.sqrt(N)
                np.testing.assert_allclose(out, expected, atol=1e-15)

    def test_screen_kills_unmatched_pairs(self):
        N = 4
        s = eraser.build_screen(UNIFORM).toarray()
        for a in range(2 * N):
            for b in range(2 * N):
                if a != b:
                    assert np.all(s[:, a * 2 * N + b] == 0)

    def test_screen_is_not_unitary(self):
        sc = (eraser.build_screen(UNIFORM) @ eraser.build_crystal(UNIFORM)).toarray()
        assert not is_unitary(sc, 1e-12)
        assert not is_isometry(eraser.build_screen(UNIFORM))

    @pytest.mark.parametrize("N", [2, 8, 64])
    def test_intertwining(self, N):
        for env in eraser.ENVELOPES:
            assert eraser.screen_intertwining_residual(EraserConfig(N=N, envelope=env)) <= 1e-12

    def test_lifted_operator_shape(self):
        op = eraser.lifted_idler_operator(H, 2)
        assert op.shape == (16, 16)
        assert is_unitary(op.toarray(), 1e-12)

    @pytest.mark.parametrize("N", [2, 8, 64])
    @pytest.mark.parametrize("env", eraser.ENVELOPES)
    def test_identity(self, N, env):
        rep = eraser.verify_eraser_identity(EraserConfig(N=N, envelope=env))
        assert rep.holds(1e-12)

    def test_delayed_is_y_form(self):
        cfg = EraserConfig(N=8)
        hxh = eraser.slit_operator(H @ X @ H, 8)
        np.testing.assert_allclose(hxh, eraser.slit_operator(Y, 8), atol=1e-15)
        a = eraser.compose_delayed_eraser(cfg)
        sc = (eraser.build_screen(cfg) @ eraser.build_crystal(cfg)).toarray()
        np.testing.assert_allclose(a, eraser.slit_operator(Y, 8) @ sc, atol=1e-12)


class TestOptics:
    @pytest.mark.parametrize("experiment", [1, 2, 3])
    def test_isometry(self, experiment):
        assert is_isometry(eraser.build_idler_optics(experiment).scattering)

    def test_experiment3_ports_equally_likely(self):
        scat = eraser.build_idler_optics(3).scattering
        # each slit label spreads as 1/4, 1/4, 1/2 over D1, D2 and its own which-path port
        np.testing.assert_allclose(np.abs(scat) ** 2 @ [0.5, 0.5], 0.25, atol=1e-15)

    def test_unknown(self):
        with pytest.raises(ValueError):
            eraser.build_idler_optics(4)


class TestJointDistribution:
    @pytest.mark.parametrize("experiment", [1, 2, 3])
    @pytest.mark.parametrize("env", eraser.ENVELOPES)
    def test_no_signaling(self, experiment, env):
        cfg = EraserConfig(N=64, envelope=env)
        joint = eraser.joint_distribution(cfg, experiment)
        ref = eraser.slit_amplitudes(cfg).screen_marginal
        np.testing.assert_allclose(joint.screen_marginal, ref, atol=1e-12, rtol=0)
        assert joint.probs.sum() == pytest.approx(1, abs=1e-12)

    def test_matches_conditional_formula(self):
        cfg = EraserConfig(N=32)
        joint = eraser.joint_distribution(cfg, 2)
        amps = eraser.slit_amplitudes(cfg)
        for k in range(cfg.N):
            r, l = oracles.conditional_pair(amps.p_R[k], amps.p_L[k])
            plus, minus = oracles.detection_branch_weights(r, l)
            px = amps.screen_marginal[k]
            # P(x_k, D) = P(x_k) · 2 · branch weight (the branch weights sum to 1/2)
            assert joint.probs[k, 0] == pytest.approx(2 * px * plus, abs=1e-14)
            assert joint.probs[k, 1] == pytest.approx(2 * px * minus, abs=1e-14)

    def test_cos_sin_squared(self):
        cfg = EraserConfig(N=64, envelope="uniform")
        cond = eraser.joint_distribution(cfg, 2).conditional_on_screen()
        half = cfg.relative_phase / 2
        np.testing.assert_allclose(cond[:, 0], np.cos(half) ** 2, atol=1e-10)
        np.testing.assert_allclose(cond[:, 1], np.sin(half) ** 2, atol=1e-10)

    def test_d2_dark_at_zero_phase(self):
        cfg = EraserConfig(N=64)
        joint = eraser.joint_distribution(cfg, 2)
        centre = int(np.argmin(np.abs(cfg.sin_angles)))
        assert joint.probs[centre, 1] == pytest.approx(0, abs=1e-15)

    def test_experiment1_has_no_cross_term(self):
        cfg = EraserConfig(N=64)
        np.testing.assert_allclose(
            eraser.joint_distribution(cfg, 1).probs,
            eraser.incoherent_envelope(cfg, 1).probs,
            atol=1e-15,
        )

    def test_uniform_d1_total_half(self):
        totals = eraser.joint_distribution(EraserConfig(N=256, envelope="uniform"), 2).detector_totals()
        assert totals["D1"] == pytest.approx(0.5, abs=1e-12)

    def test_experiment3_quarter_shares(self):
        totals = eraser.joint_distribution(EraserConfig(), 3).detector_totals()
        for det in ("D1", "D2", "D3", "D4"):
            assert abs(totals[det] - 0.25) <= 0.02

    def test_experiment3_which_path_ports_follow_envelope(self):
        cfg = EraserConfig(N=64)
        joint = eraser.joint_distribution(cfg, 3)
        env = eraser.incoherent_envelope(cfg, 3)
        np.testing.assert_allclose(joint.probs[:, 2:], env.probs[:, 2:], atol=1e-15)

    def test_as_map_keys(self):
        joint = eraser.joint_distribution(UNIFORM, 3)
        m = joint.as_map()
        assert len(m) == 16 and (0, "D4") in m
        assert sum(p for _, _, p in joint.triples()) == pytest.approx(1, abs=1e-12)


class TestReducedStates:
    def test_detection_state_weight(self):
        state = eraser.detection_state(EraserConfig(N=8), 3)
        assert state.norm_sq == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("k", [0, 3, 5])
    def test_matches_closed_form_state(self, k):
        cfg = EraserConfig(N=8)
        c = eraser.conditional_amplitudes(eraser.slit_amplitudes(cfg), k)
        ours = eraser.detection_state(cfg, k).amplitudes
        np.testing.assert_allclose(ours, closed_form_state(c.p_R, c.p_L, k, 8), atol=1e-14)

    @pytest.mark.parametrize("trace_out,pos", [("D2", 1), ("D1", 0)])
    def test_single_detector_traced(self, trace_out, pos):
        cfg = EraserConfig(N=8)
        k = 5
        c = eraser.conditional_amplitudes(eraser.slit_amplitudes(cfg), k)
        vec = closed_form_state(c.p_R, c.p_L, k, 8)
        ref = oracles.partial_trace_by_summation(np.outer(vec, vec.conj()), [2, 2, 8], pos)
        rho = eraser.reduced_detection_state(cfg, k, trace_out, normalize=False)
        np.testing.assert_allclose(rho.matrix, ref, atol=1e-12)
        plus, minus = oracles.detection_branch_weights(c.p_R, c.p_L)
        # D2 traced: D1 click carries the + branch; D1 traced: D2 no-click carries it
        click_weight = rho.matrix[8 + k, 8 + k].real
        idle_weight = rho.matrix[k, k].real
        if trace_out == "D2":
            assert (click_weight, idle_weight) == pytest.approx((plus, minus), abs=1e-12)
        else:
            assert (idle_weight, click_weight) == pytest.approx((plus, minus), abs=1e-12)

    def test_cross_terms_opposite(self):
        cfg = EraserConfig(N=16)
        amps = eraser.slit_amplitudes(cfg)
        for k in range(16):
            c = eraser.conditional_amplitudes(amps, k)
            plus, minus = oracles.detection_branch_weights(c.p_R, c.p_L)
            cross = (c.p_R * np.conj(c.p_L)).real
            assert plus - minus == pytest.approx(cross, abs=1e-14)

    def test_both_traced_is_record(self):
        cfg = EraserConfig(N=8)
        rho = eraser.reduced_detection_state(cfg, 2, "both")
        expected = np.zeros((8, 8))
        expected[2, 2] = 1
        np.testing.assert_allclose(rho.matrix, expected, atol=1e-12)
        assert rho.weight == pytest.approx(0.5, abs=1e-12)
        raw = eraser.reduced_detection_state(cfg, 2, "both", normalize=False)
        np.testing.assert_allclose(raw.matrix, 0.5 * expected, atol=1e-12)

    def test_errors(self):
        cfg = EraserConfig(N=8)
        with pytest.raises(ValueError):
            eraser.reduced_detection_state(cfg, 0, "D3")
        with pytest.raises(IndexError):
            eraser.reduced_detection_state(cfg, 8, "D1")

    @settings(max_examples=30, deadline=None)
    @given(
        N=st.sampled_from([2, 4, 8]),
        env=st.sampled_from(eraser.ENVELOPES),
        k=st.integers(0, 7),
        target=st.sampled_from(eraser.TRACE_TARGETS),
    )
    def test_reduced_state_valid(self, N, env, k, target):
        rho = eraser.reduced_detection_state(EraserConfig(N=N, envelope=env), k % N, target)
        assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-10)
        assert np.min(np.linalg.eigvalsh(rho.matrix)) >= -1e-10

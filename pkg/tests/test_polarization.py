import cmath
import math

import numpy as np
import pytest

from qiopa.polarization import (BlochPath, PolarizationUnitary, Qubit, apply,
                                babinet, su2_rotation, waveplate)

from conftest import random_qubit


class TestQubit:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            Qubit(0.9, 0.9)

    def test_negative_amplitudes_rejected(self):
        with pytest.raises(ValueError):
            Qubit(-1.0, 0.0)

    def test_phase_gauge_fixed_when_beta_zero(self):
        q = Qubit(1.0, 0.0, phi=2.3)
        assert q.phi == 0.0

    def test_phi_wrapped_to_half_open_interval(self):
        q = Qubit(2 ** -0.5, 2 ** -0.5, phi=3 * math.pi)
        assert q.phi == pytest.approx(math.pi)
        assert -math.pi < q.phi <= math.pi


class TestSu2Rotation:
    @pytest.mark.parametrize("axis", ["x", "y", "z"])
    def test_unitarity(self, axis, rng):
        for angle in rng.uniform(-10, 10, size=5):
            u = su2_rotation(axis, angle).matrix
            assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12

    def test_zero_angle_is_identity(self):
        assert np.allclose(su2_rotation("z", 0.0).matrix, np.eye(2))

    def test_y_pi_flips_poles(self):
        q = apply(su2_rotation("y", math.pi), Qubit(1.0, 0.0))
        assert q.alpha == pytest.approx(0.0, abs=1e-15)
        assert q.beta == pytest.approx(1.0)

    @pytest.mark.parametrize("axis", ["x", "y", "z"])
    def test_full_turn_is_minus_identity(self, axis):
        assert np.allclose(su2_rotation(axis, 2 * math.pi).matrix, -np.eye(2),
                           atol=1e-15)

    def test_bad_axis_rejected(self):
        with pytest.raises(ValueError):
            su2_rotation("w", 1.0)


class TestWaveplate:
    def test_half_wave_at_zero(self):
        assert np.allclose(waveplate("half", 0.0).matrix, np.diag([1, -1]),
                           atol=1e-15)

    def test_half_wave_at_22p5_degrees(self):
        q = apply(waveplate("half", math.radians(22.5)), Qubit(1.0, 0.0))
        assert q.alpha == pytest.approx(2 ** -0.5)
        assert q.beta == pytest.approx(2 ** -0.5)
        assert q.phi == pytest.approx(0.0, abs=1e-12)

    def test_quarter_wave_at_45_degrees_makes_circular(self):
        q = apply(waveplate("quarter", math.pi / 4), Qubit(1.0, 0.0))
        assert q.alpha == pytest.approx(2 ** -0.5)
        assert q.beta == pytest.approx(2 ** -0.5)
        assert abs(q.phi) == pytest.approx(math.pi / 2)

    def test_unitarity_and_determinant(self, rng):
        for kind in ("half", "quarter"):
            for theta in rng.uniform(0, math.pi, size=4):
                u = waveplate(kind, theta).matrix
                assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-12
                assert abs(abs(np.linalg.det(u)) - 1.0) < 1e-12

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            waveplate("third", 0.0)


class TestBabinet:
    def test_zero_is_identity(self):
        assert np.allclose(babinet(0.0).matrix, np.eye(2))

    def test_shifts_relative_phase(self):
        q = apply(babinet(math.pi), Qubit(2 ** -0.5, 2 ** -0.5, 0.0))
        assert q.phi == pytest.approx(math.pi)

    def test_composition_is_additive(self, rng):
        d1, d2 = rng.uniform(-math.pi, math.pi, size=2)
        composed = (babinet(d1) @ babinet(d2)).matrix
        assert np.allclose(composed, babinet(d1 + d2).matrix, atol=1e-14)


class TestApply:
    def test_identity_returns_same_qubit(self):
        q = Qubit(0.6, 0.8, 0.4)
        out = apply(PolarizationUnitary(np.eye(2)), q)
        assert out.alpha == pytest.approx(q.alpha)
        assert out.beta == pytest.approx(q.beta)
        assert out.phi == pytest.approx(q.phi)

    def test_y_half_turn_balances_pole(self):
        out = apply(su2_rotation("y", math.pi / 2), Qubit(1.0, 0.0))
        assert out.alpha == pytest.approx(2 ** -0.5)
        assert out.beta == pytest.approx(2 ** -0.5)

    def test_norm_preserved_for_random_inputs(self, rng):
        for _ in range(20):
            q = random_qubit(rng)
            u = (su2_rotation("x", rng.uniform(-3, 3))
                 @ su2_rotation("z", rng.uniform(-3, 3)))
            out = apply(u, q)
            assert out.alpha ** 2 + out.beta ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_global_phase_recorded_not_lost(self):
        # -identity from a full turn lands entirely in the recorded phase
        out = apply(su2_rotation("z", 2 * math.pi), Qubit(1.0, 0.0))
        assert out.alpha == pytest.approx(1.0)
        assert abs(out.global_phase) == pytest.approx(math.pi)


class TestBlochPath:
    def test_requires_increasing_angles(self):
        with pytest.raises(ValueError):
            BlochPath("z", (0.0, 0.0, 1.0), Qubit(1.0, 0.0))

    def test_requires_two_points(self):
        with pytest.raises(ValueError):
            BlochPath("z", (0.0,), Qubit(1.0, 0.0))

    def test_qubits_follow_rotation(self):
        path = BlochPath("z", (0.0, 1.0, 2.0), Qubit(2 ** -0.5, 2 ** -0.5, 0.0))
        phis = [q.phi for q in path.qubits()]
        assert phis == pytest.approx([0.0, 1.0, 2.0])

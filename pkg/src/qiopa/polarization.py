"""Injected-qubit algebra: SU(2) rotations, waveplates, Bloch paths.

The qubit is kept in canonical form (alpha, beta real non-negative, explicit
relative phase); the global phase is recorded for bookkeeping but never
enters an observable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

UNITARITY_TOL = 1e-12
NORM_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _wrap_phase(phi: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    phi = math.remainder(phi, 2 * math.pi)
    if phi <= -math.pi:
        phi += 2 * math.pi
    return phi


@dataclass(frozen=True)
class Qubit:
    alpha: float
    beta: float
    phi: float = 0.0
    global_phase: float = 0.0   # recorded but never observable

    def __post_init__(self):
        for name in ("alpha", "beta", "phi", "global_phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("canonical form requires alpha, beta >= 0")
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > NORM_TOL:
            raise ValueError("qubit must be normalized: alpha^2 + beta^2 = 1")
        # beta = 0 leaves the relative phase unconstrained; fix the gauge
        object.__setattr__(self, "phi", 0.0 if self.beta == 0.0 else _wrap_phase(self.phi))
        object.__setattr__(self, "global_phase", _wrap_phase(self.global_phase))

    def vector(self) -> np.ndarray:
        """Amplitudes (alpha, beta e^{i phi}) including the recorded global phase."""
        return cmath.exp(1j * self.global_phase) * np.array(
            [self.alpha, self.beta * cmath.exp(1j * self.phi)])


@dataclass(frozen=True)
class PolarizationUnitary:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if np.abs(m.conj().T @ m - np.eye(2)).max() > UNITARITY_TOL:
            raise ValueError("matrix is not unitary")
        if abs(abs(np.linalg.det(m)) - 1.0) > UNITARITY_TOL:
            raise ValueError("determinant magnitude must be 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "PolarizationUnitary") -> "PolarizationUnitary":
        return PolarizationUnitary(self.matrix @ other.matrix)


def su2_rotation(axis: str, angle: float) -> PolarizationUnitary:
    """exp(-i sigma_axis angle / 2) for axis in {x, y, z}."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    half = angle / 2
    return PolarizationUnitary(
        math.cos(half) * np.eye(2) - 1j * math.sin(half) * _PAULI[axis])


def waveplate(kind: str, theta: float) -> PolarizationUnitary:
    """Jones matrix of an ideal half- or quarter-wave retarder at angle theta."""
    retardance = {"half": math.pi, "quarter": math.pi / 2}
    if kind not in retardance:
        raise ValueError(f"kind must be 'half' or 'quarter', got {kind!r}")
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, s], [-s, c]])
    return PolarizationUnitary(
        rot.T @ np.diag([1.0, cmath.exp(1j * retardance[kind])]) @ rot)


def babinet(delta: float) -> PolarizationUnitary:
    """Adjustable compensator diag(1, e^{i delta}); shifts the relative phase by delta."""
    if not math.isfinite(delta):
        raise ValueError("delta must be finite")
    return PolarizationUnitary(np.diag([1.0, cmath.exp(1j * delta)]))


def apply(u: PolarizationUnitary, q: Qubit) -> Qubit:
    """Apply a polarization unitary and re-canonicalize the result."""
    w = u.matrix @ q.vector()
    norm = math.hypot(abs(w[0]), abs(w[1]))
    alpha, beta = abs(w[0]) / norm, abs(w[1]) / norm
    if alpha > 0:
        gp = cmath.phase(w[0])
        phi = cmath.phase(w[1]) - gp if beta > 0 else 0.0
    else:
        gp = cmath.phase(w[1])
        phi = 0.0
    return Qubit(alpha, beta, phi, global_phase=gp)


@dataclass(frozen=True)
class BlochPath:
    """An axis sweep on the Bloch sphere starting from a given qubit."""

    axis: str
    angles: tuple
    start: Qubit

    def __post_init__(self):
        if self.axis not in _PAULI:
            raise ValueError(f"axis must be one of x, y, z, got {self.axis!r}")
        angles = tuple(float(a) for a in self.angles)
        if len(angles) < 2:
            raise ValueError("a path needs at least 2 points")
        if any(b <= a for a, b in zip(angles, angles[1:])):
            raise ValueError("path angles must be strictly increasing")
        object.__setattr__(self, "angles", angles)

    def qubits(self) -> list:
        return [apply(su2_rotation(self.axis, a), self.start) for a in self.angles]

"""Detected-field correlation functions, fringe patterns and visibility."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplifier import AmplifierConfig, amplify
from .fock import GainParams, number_expectation, rotate_mode_pair
from .polarization import BlochPath, Qubit, apply, su2_rotation

# 45-degree analyzer mapping the {h, v} basis of a mode pair onto the
# detected fields {H, V}.  The sign convention is fixed once against the
# closed forms: the H output carries the +cos(phi) interference term.
DETECTED_FIELD_UNITARY = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class G1Pair:
    """Mean detected photon numbers on the two anticloning-mode outputs."""

    g2h: float
    g2v: float
    nbar: float

    @property
    def difference(self) -> float:
        return self.g2h - self.g2v


def g1_closed_form(q: Qubit, gain: GainParams) -> G1Pair:
    """First-order correlations nbar(3/2 +- alpha beta cos phi)."""
    interference = q.alpha * q.beta * math.cos(q.phi)
    return G1Pair(g2h=gain.nbar * (1.5 + interference),
                  g2v=gain.nbar * (1.5 - interference),
                  nbar=gain.nbar)


def g1_oracle(q: Qubit, cfg: AmplifierConfig) -> G1Pair:
    """Brute-force number expectations on the rotated amplifier output."""
    state = rotate_mode_pair(amplify(q, cfg), "mode2", DETECTED_FIELD_UNITARY)
    return G1Pair(g2h=number_expectation(state, "2h"),
                  g2v=number_expectation(state, "2v"),
                  nbar=cfg.gain.nbar)


def visibility(q: Qubit) -> float:
    """Ideal fringe visibility 2 alpha beta / 3 (extrema of the closed forms over phi).

    Evaluated as (1 - (alpha - beta)^2) / 3, identical under the unit-norm
    invariant and exact in the symmetric case alpha = beta.
    """
    return (1.0 - (q.alpha - q.beta) ** 2) / 3


def signal_to_noise(q: Qubit, gain: GainParams) -> float:
    """H-channel mean over the squeezed-vacuum floor nbar."""
    if gain.nbar == 0.0:
        raise ValueError("signal-to-noise undefined at zero gain (nbar = 0)")
    return g1_closed_form(q, gain).g2h / gain.nbar


@dataclass(frozen=True)
class FringeTable:
    """Rows of (sweep angle, dG, g2H, g2V) for one Bloch path and gain."""

    rows: tuple
    gain: GainParams
    path: BlochPath


def fringe_sweep(path: BlochPath, gain: GainParams) -> FringeTable:
    rows = []
    for angle, qubit in zip(path.angles, path.qubits()):
        pair = g1_closed_form(qubit, gain)
        rows.append((angle, pair.difference, pair.g2h, pair.g2v))
    return FringeTable(rows=tuple(rows), gain=gain, path=path)

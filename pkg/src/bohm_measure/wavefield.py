"""Entangled particle-pointer wave fields for impulsive measurement couplings.

An impulsive momentum measurement couples a particle coordinate ``q`` to a
pointer coordinate ``r``.  Starting from a discrete momentum superposition and
a Gaussian pointer packet ``K``, the joint wave field at coupling strength
``lam`` and particle mass ``m`` is

    psi(q, r, t) = sum_i A_i K(r - lam p_i t) exp(i (p_i q - p_i^2 t / (2 m)))

with

    K(x) = (2 pi)^(-1/4) sigma^(-1/2) exp(-x^2 / (4 sigma^2)),  int K^2 dr = 1.

Each momentum branch drags its own pointer packet at speed ``lam p_i``; the
branches stay phase-coherent until the packets separate.  The joint density

    rho(q, r, t) = sum_ij A_i A_j K_i K_j cos(alpha_ij)

carries the interference through the pairwise correlation phases

    alpha_ij = (p_i - p_j) q + (p_j^2 - p_i^2) t / (2 m).

This module evaluates the wave field, its density, and the packet factors.
Guidance velocities derived from these fields live in ``guidance``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhysicalParams",
    "GaussianDevicePacket",
    "MomentumSuperposition",
    "ConfigPoint",
    "BeableState",
    "packet_eval",
    "packet_log_deriv",
    "correlation_phase",
    "eval_psi_momentum",
    "eval_density",
    "density_peak",
    "regularized_delta_spectrum",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Particle mass ``m > 0`` and measurement coupling strength ``lam > 0``."""

    mass: float
    coupling: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.coupling > 0:
            raise ValueError(f"coupling must be positive, got {self.coupling}")


@dataclass(frozen=True)
class GaussianDevicePacket:
    """Pointer ground packet of width ``sigma > 0``, unit-normalized in r."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class ConfigPoint:
    """Configuration-space point: particle coordinate ``q``, pointer
    coordinate ``r``, time ``t``.  Fields may be scalars or broadcastable
    arrays."""

    q: float
    r: float
    t: float


# A trajectory's instantaneous configuration is the same object.
BeableState = ConfigPoint


class MomentumSuperposition:
    """Discrete momentum superposition entangled with a pointer packet.

    Parameters
    ----------
    momenta : array_like
        Branch momenta ``p_1 < p_2 < ... < p_n``, strictly increasing.
    amplitudes : array_like
        Real positive branch weights ``A_i``.  They are normalized so that
        ``sum A_i^2 = 1``; ``A_i^2`` is the Born probability of branch ``i``.
    params : PhysicalParams
        Mass and coupling entering the branch phases and packet drift.
    packet : GaussianDevicePacket
        Pointer packet shared by all branches at ``t = 0``.
    """

    def __init__(self, momenta, amplitudes, params: PhysicalParams,
                 packet: GaussianDevicePacket):
        momenta = np.asarray(momenta, dtype=float)
        amplitudes = np.asarray(amplitudes, dtype=float)
        if momenta.ndim != 1 or momenta.size == 0:
            raise ValueError("momenta must be a non-empty 1-D sequence")
        if amplitudes.shape != momenta.shape:
            raise ValueError("amplitudes and momenta must have equal length")
        if momenta.size > 1 and not np.all(np.diff(momenta) > 0):
            raise ValueError("momenta must be strictly increasing")
        if not np.all(amplitudes > 0):
            raise ValueError("amplitudes must be strictly positive")
        norm = np.sqrt(np.sum(amplitudes**2))
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("amplitudes must have finite, nonzero norm")
        self.momenta = momenta
        self.amplitudes = amplitudes / norm
        self.params = params
        self.packet = packet

    @property
    def n_branches(self) -> int:
        return self.momenta.size

    @property
    def born_probabilities(self):
        """Branch weights ``A_i^2`` (sum to one by construction)."""
        return self.amplitudes**2

    def __repr__(self):
        return (f"MomentumSuperposition(momenta={self.momenta.tolist()}, "
                f"weights={np.round(self.born_probabilities, 6).tolist()}, "
                f"m={self.params.mass}, lam={self.params.coupling}, "
                f"sigma={self.packet.sigma})")


def packet_eval(packet: GaussianDevicePacket, x):
    """Pointer packet K(x) = (2 pi)^(-1/4) sigma^(-1/2) exp(-x^2/(4 sigma^2))."""
    s = packet.sigma
    return (2.0 * np.pi) ** (-0.25) * s ** (-0.5) * np.exp(-np.square(x) / (4.0 * s * s))


def packet_log_deriv(packet: GaussianDevicePacket, x):
    """Logarithmic derivative K'(x)/K(x) = -x / (2 sigma^2)."""
    return -np.asarray(x, dtype=float) / (2.0 * packet.sigma**2)


def correlation_phase(model: MomentumSuperposition, i: int, j: int, q, t):
    """Relative phase alpha_ij between branches ``i`` and ``j`` at (q, t).

    alpha_ij = (p_i - p_j) q + (p_j^2 - p_i^2) t / (2 m).  Antisymmetric in
    (i, j); zero on the diagonal.
    """
    p = model.momenta
    m = model.params.mass
    return (p[i] - p[j]) * np.asarray(q) + (p[j]**2 - p[i]**2) * np.asarray(t) / (2.0 * m)


def _branch_values(model: MomentumSuperposition, q, r, t):
    """Per-branch complex values A_i K_i exp(i phi_i), shape (n,) + broadcast."""
    q, r, t = np.broadcast_arrays(np.asarray(q, float), np.asarray(r, float),
                                  np.asarray(t, float))
    shape = (model.n_branches,) + (1,) * q.ndim
    p = model.momenta.reshape(shape)
    amp = model.amplitudes.reshape(shape)
    lam = model.params.coupling
    m = model.params.mass
    K = packet_eval(model.packet, r[None] - lam * p * t[None])
    phi = p * q[None] - p**2 * t[None] / (2.0 * m)
    return amp * K * np.exp(1j * phi)


def eval_psi_momentum(model: MomentumSuperposition, point: ConfigPoint):
    """Complex wave field psi(q, r, t) of the momentum-measurement coupling.

    Sums the branch packets with their free-evolution phases:
    ``sum_i A_i K(r - lam p_i t) exp(i (p_i q - p_i^2 t / (2 m)))``.
    Scalar in, complex scalar out; array fields broadcast.

    The plane-wave factors are unnormalized in ``q``, so psi is normalized per
    unit q-interval rather than globally.
    """
    out = _branch_values(model, point.q, point.r, point.t).sum(axis=0)
    return out if out.ndim else complex(out)


def eval_density(model: MomentumSuperposition, point: ConfigPoint):
    """Joint density rho(q, r, t) via the pairwise correlation-phase sum.

    rho = sum_ij A_i A_j K_i K_j cos(alpha_ij).  Computed from the real
    pairwise expansion rather than |psi|^2 so the two routes cross-check each
    other; they agree to rounding.
    """
    q = np.asarray(point.q, float)
    r = np.asarray(point.r, float)
    t = np.asarray(point.t, float)
    lam = model.params.coupling
    p = model.momenta
    A = model.amplitudes
    K = [packet_eval(model.packet, r - lam * p[i] * t) for i in range(model.n_branches)]
    rho = np.zeros(np.broadcast(q, r, t).shape)
    for i in range(model.n_branches):
        rho = rho + (A[i] * K[i]) ** 2
        for j in range(i + 1, model.n_branches):
            alpha = correlation_phase(model, i, j, q, t)
            rho = rho + 2.0 * A[i] * A[j] * K[i] * K[j] * np.cos(alpha)
    return rho if rho.ndim else float(rho)


def density_peak(model: MomentumSuperposition) -> float:
    """Density scale max_i A_i^2 K(0)^2 of a fully separated branch peak.

    Node thresholds are expressed relative to this scale."""
    k0 = packet_eval(model.packet, 0.0)
    return float(np.max(model.amplitudes**2) * k0 * k0)


def regularized_delta_spectrum(N: int, dp: float, params: PhysicalParams,
                               packet: GaussianDevicePacket) -> MomentumSuperposition:
    """Equal-weight momentum comb p_n = n dp, n = -N..N, regularizing a
    position eigenstate at q = 0.

    The particle factor at t = 0 is the periodized sinc profile
    ``g(q) = |sum_n exp(i p_n q)|^2 / (2N+1)`` with central peak
    ``g(0) = 2N+1`` and first zero at ``2 pi / ((2N+1) dp)``: the sharper the
    comb, the tighter the position localization.

    Returns a MomentumSuperposition with 2N+1 branches of equal weight.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if not dp > 0:
        raise ValueError(f"dp must be positive, got {dp}")
    n = np.arange(-N, N + 1, dtype=float)
    momenta = n * dp
    amplitudes = np.full(momenta.shape, 1.0 / np.sqrt(2 * N + 1.0))
    return MomentumSuperposition(momenta, amplitudes, params, packet)

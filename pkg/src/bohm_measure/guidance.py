"""Guidance velocities: configuration-space flow carried by the wave field.

The particle-pointer configuration (q, r) moves with the ratio of probability
current to density.  For the momentum-measurement field psi(q, r, t) this is

    v_r = lam Im(d_q psi / psi)
    v_q = lam Im(d_r psi / psi) + (1/m) Im(d_q psi / psi)
        = v_r / (lam m) + lam Im(d_r psi / psi)

where the q-derivative enters v_r because the coupling exchanges the roles of
the two coordinates.  Expanded over branches the same ratio reads

    v_r = (lam/2) sum_ij w_ij (p_i + p_j) cos(alpha_ij) / sum_ij w_ij cos(alpha_ij)

with w_ij = A_i A_j K_i K_j, and the v_q cross term carries
(K_i'/K_i - K_j'/K_j) sin(alpha_ij): pure interference, vanishing once the
pointer packets separate.  A single branch gives the uncoupled drift
(v_q, v_r) = (p/m, lam p) exactly.

For an ideal coordinate measurement the pointer is dragged at the particle
position while the particle stands still: (v_q, v_r) = (0, lam q).

The fields are undefined at density nodes; evaluations below a density floor
raise NodeError (scalar form) or return a validity mask (batch form).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavefield import (
    ConfigPoint,
    GaussianDevicePacket,
    MomentumSuperposition,
    PhysicalParams,
    density_peak,
    eval_psi_momentum,
    packet_eval,
    packet_log_deriv,
)

__all__ = [
    "VelocityPair",
    "NodeError",
    "default_node_threshold",
    "default_fd_step",
    "velocity_momentum",
    "velocity_coordinate",
    "velocity_fd_oracle",
    "momentum_field",
    "coordinate_field",
    "quantum_potential",
    "classical_velocity",
]


@dataclass(frozen=True)
class VelocityPair:
    """Guidance velocity components (v_q, v_r) at one configuration point."""

    v_q: float
    v_r: float


class NodeError(ArithmeticError):
    """Velocity requested where the density is below the node floor."""


def default_node_threshold(model: MomentumSuperposition) -> float:
    """Density floor 1e-10 of a separated branch peak."""
    return 1e-10 * density_peak(model)


def default_fd_step(model: MomentumSuperposition) -> float:
    """Oracle step 1e-5 max(sigma, 1/p_max): resolves both the packet width
    and the shortest phase wavelength."""
    p_max = float(np.max(np.abs(model.momenta)))
    scale = max(model.packet.sigma, 1.0 / p_max) if p_max > 0 else model.packet.sigma
    return 1e-5 * scale


def _field_terms(model: MomentumSuperposition, t, q, r):
    """psi and its analytic partials d_q psi, d_r psi, branch-summed."""
    q, r = np.broadcast_arrays(np.asarray(q, float), np.asarray(r, float))
    shape = (model.n_branches,) + (1,) * q.ndim
    p = model.momenta.reshape(shape)
    amp = model.amplitudes.reshape(shape)
    lam = model.params.coupling
    m = model.params.mass
    x = r[None] - lam * p * t
    branch = amp * packet_eval(model.packet, x) * np.exp(
        1j * (p * q[None] - p * p * t / (2.0 * m)))
    psi = branch.sum(axis=0)
    dpsi_dq = (1j * p * branch).sum(axis=0)
    dpsi_dr = (packet_log_deriv(model.packet, x) * branch).sum(axis=0)
    return psi, dpsi_dq, dpsi_dr


def _momentum_velocities(model: MomentumSuperposition, t, q, r):
    """Raw batch evaluation: arrays (v_q, v_r, rho) with no node handling."""
    psi, dpsi_dq, dpsi_dr = _field_terms(model, t, q, r)
    rho = psi.real**2 + psi.imag**2
    lam = model.params.coupling
    m = model.params.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        v_r = lam * (dpsi_dq * psi.conj()).imag / rho
        v_q = v_r / (lam * m) + lam * (dpsi_dr * psi.conj()).imag / rho
    return v_q, v_r, rho


def velocity_momentum(model: MomentumSuperposition, point: ConfigPoint,
                      rho_min: float | None = None) -> VelocityPair:
    """Guidance velocity of the momentum-measurement field at one point.

    Parameters
    ----------
    model : MomentumSuperposition
    point : ConfigPoint
    rho_min : float, optional
        Absolute density floor below which the flow is treated as undefined.
        Defaults to ``default_node_threshold(model)``.

    Returns
    -------
    VelocityPair

    Raises
    ------
    NodeError
        If the density at ``point`` falls below ``rho_min``.
    """
    if rho_min is None:
        rho_min = default_node_threshold(model)
    v_q, v_r, rho = _momentum_velocities(model, point.t, point.q, point.r)
    if rho < rho_min:
        raise NodeError(f"density {float(rho):.3e} below node floor "
                        f"{rho_min:.3e} at q={point.q:.6g}, r={point.r:.6g}, "
                        f"t={point.t:.6g}")
    return VelocityPair(float(v_q), float(v_r))


def velocity_coordinate(params: PhysicalParams, point: ConfigPoint) -> VelocityPair:
    """Ideal coordinate-measurement flow: pointer dragged at lam q, particle
    frozen.  Defined everywhere; no node handling needed."""
    return VelocityPair(0.0, params.coupling * point.q)


def velocity_fd_oracle(model: MomentumSuperposition, point: ConfigPoint,
                       h: float | None = None,
                       rho_min: float | None = None) -> VelocityPair:
    """Current-to-density ratio by central differences of the wave field.

    Independent route for cross-checking ``velocity_momentum``: only
    ``eval_psi_momentum`` values enter, never analytic derivatives.
    """
    if h is None:
        h = default_fd_step(model)
    if rho_min is None:
        rho_min = default_node_threshold(model)
    q, r, t = point.q, point.r, point.t
    psi = eval_psi_momentum(model, ConfigPoint(q, r, t))
    rho = abs(psi) ** 2
    if rho < rho_min:
        raise NodeError(f"density {rho:.3e} below node floor {rho_min:.3e}")
    dq = (eval_psi_momentum(model, ConfigPoint(q + h, r, t))
          - eval_psi_momentum(model, ConfigPoint(q - h, r, t))) / (2.0 * h)
    dr = (eval_psi_momentum(model, ConfigPoint(q, r + h, t))
          - eval_psi_momentum(model, ConfigPoint(q, r - h, t))) / (2.0 * h)
    lam = model.params.coupling
    m = model.params.mass
    im_q = (dq / psi).imag
    im_r = (dr / psi).imag
    return VelocityPair(lam * im_r + im_q / m, lam * im_q)


def momentum_field(model: MomentumSuperposition, rho_min: float | None = None):
    """Batch velocity field for ensemble integration.

    Returns ``field(t, q, r) -> (v_q, v_r, valid)`` over arrays of
    configurations; ``valid`` is False where the density is below the floor
    (those velocity entries are zeroed, not trusted).
    """
    if rho_min is None:
        rho_min = default_node_threshold(model)

    def field(t, q, r):
        v_q, v_r, rho = _momentum_velocities(model, t, q, r)
        valid = rho >= rho_min
        v_q = np.where(valid, v_q, 0.0)
        v_r = np.where(valid, v_r, 0.0)
        return v_q, v_r, valid

    return field


def coordinate_field(params: PhysicalParams):
    """Batch form of the coordinate-measurement flow; valid everywhere."""
    lam = params.coupling

    def field(t, q, r):
        q = np.asarray(q, float)
        return np.zeros_like(q), lam * q, np.ones(q.shape, dtype=bool)

    return field


def quantum_potential(model: MomentumSuperposition, point: ConfigPoint,
                      h: float | None = None) -> float:
    """Quantum contribution -lam A_qr / A - A_qq / (2 m A) to the flow's
    Hamilton-Jacobi balance, with A = |psi|.

    Central second differences at step ``h`` (default 1e-3 sigma).  Exactly
    zero for a single branch, whose amplitude factorizes in q and r.
    """
    if h is None:
        h = 1e-3 * model.packet.sigma
    q, r, t = point.q, point.r, point.t

    def amp(qq, rr):
        return abs(eval_psi_momentum(model, ConfigPoint(qq, rr, t)))

    a0 = amp(q, r)
    if a0 == 0.0:
        raise NodeError(f"amplitude zero at q={q:.6g}, r={r:.6g}, t={t:.6g}")
    a_qq = (amp(q + h, r) - 2.0 * a0 + amp(q - h, r)) / (h * h)
    a_qr = (amp(q + h, r + h) - amp(q + h, r - h)
            - amp(q - h, r + h) + amp(q - h, r - h)) / (4.0 * h * h)
    lam = model.params.coupling
    m = model.params.mass
    return float(-lam * a_qr / a0 - a_qq / (2.0 * m * a0))


def classical_velocity(model: MomentumSuperposition) -> VelocityPair:
    """Born-weighted mean drift: the flow with all interference terms dropped.

    (v_q, v_r) = (sum_i A_i^2 p_i / m, lam sum_i A_i^2 p_i); time independent.
    Reference line for comparing individual trajectories against the
    classical pointer response.
    """
    p_mean = float(np.sum(model.amplitudes**2 * model.momenta))
    return VelocityPair(p_mean / model.params.mass,
                        model.params.coupling * p_mean)

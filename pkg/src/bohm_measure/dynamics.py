"""Trajectory integration, outcome detection, and measurement time scales.

Configurations follow the guidance flow dx/dt = v(x, t) with classical
fixed-step RK4.  The flow is undefined at density nodes: when a stage
evaluation lands below the node floor the step is retried at half the step
size, recursively, up to a halving budget; a trajectory that cannot get past
a node is marked ``node_excluded`` and truncated, never silently dropped.

A momentum measurement resolves once the pointer packets separate.  The
separation time scale for branch readings f1, f2 is

    T = 6 sigma / (lam |f2 - f1|)

(three packet widths of drift between the branch pointers).  A pointer locked
to branch i drifts at lam p_i; ``detect_outcome`` reads the branch off the
trailing time average of v_r.  The impulsive (projective) description needs
T lam << 1; ``projective_validity`` reports the ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .guidance import NodeError, VelocityPair
from .wavefield import ConfigPoint, MomentumSuperposition

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "InvalidStartError",
    "DegenerateValuesError",
    "ProjectiveValidity",
    "integrate_trajectory",
    "integrate_ensemble",
    "detect_outcome",
    "decoherence_time",
    "projective_validity",
    "momentum_gap",
    "default_config",
]


class InvalidStartError(ValueError):
    """Initial configuration sits below the density floor at t = 0."""


class DegenerateValuesError(ValueError):
    """Measured readings coincide; no separation time scale exists."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    Attributes
    ----------
    dt : float
        Base time step.
    t_end : float
        Final time (integration runs from the initial time to here).
    rho_min : float
        Node floor relative to a separated branch peak density.
    max_substep_halvings : int
        Recursion depth for halving a step that hits a node.
    stationary_window : float
        Trailing window over which outcome detection averages v_r.
    stationary_tol : float
        Outcome acceptance: residual below ``stationary_tol * lam * gap``.
    store_every : int
        Keep every k-th step in the output (the final step is always kept).
    """

    dt: float
    t_end: float
    rho_min: float = 1e-10
    max_substep_halvings: int = 8
    stationary_window: float = 0.0
    stationary_tol: float = 0.05
    store_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > self.dt:
            raise ValueError("t_end must exceed dt")
        if not self.rho_min > 0:
            raise ValueError("rho_min must be positive")
        if self.max_substep_halvings < 0:
            raise ValueError("max_substep_halvings must be >= 0")
        if self.stationary_window and not 0 < self.stationary_window < self.t_end:
            raise ValueError("stationary_window must lie inside (0, t_end)")
        if not 0 < self.stationary_tol:
            raise ValueError("stationary_tol must be positive")
        if self.store_every < 1:
            raise ValueError("store_every must be >= 1")


@dataclass
class Trajectory:
    """One integrated configuration history on the stored time grid."""

    times: np.ndarray
    q: np.ndarray
    r: np.ndarray
    v_q: np.ndarray
    v_r: np.ndarray
    node_excluded: bool = False
    outcome: int | None = None

    def __len__(self):
        return self.times.size

    def point(self, k: int) -> ConfigPoint:
        return ConfigPoint(float(self.q[k]), float(self.r[k]), float(self.times[k]))

    def velocity(self, k: int) -> VelocityPair:
        return VelocityPair(float(self.v_q[k]), float(self.v_r[k]))


@dataclass(frozen=True)
class ProjectiveValidity:
    """Impulsive-limit check: ratio T lam against the 0.1 bound."""

    ratio: float
    valid: bool
    limit: float = 0.1


def momentum_gap(model: MomentumSuperposition) -> float:
    """Smallest spacing of the momentum spectrum (1.0 for a single branch,
    where no pair exists and any positive scale serves)."""
    if model.n_branches < 2:
        return 1.0
    return float(np.min(np.diff(model.momenta)))


def decoherence_time(sigma: float, lam: float, f1: float, f2: float) -> float:
    """Branch separation time T = 6 sigma / (lam |f2 - f1|).

    After T the two branch pointers are six packet widths apart and the
    interference between them is negligible.

    Raises
    ------
    DegenerateValuesError
        If the readings coincide (no separation ever happens).
    """
    if not sigma > 0 or not lam > 0:
        raise ValueError("sigma and lam must be positive")
    if f1 == f2:
        raise DegenerateValuesError(f"readings coincide: f1 = f2 = {f1}")
    return 6.0 * sigma / (lam * abs(f2 - f1))


def projective_validity(duration: float, lam: float) -> ProjectiveValidity:
    """Check T lam < 0.1: the measurement must complete before the coupling
    disturbs the measured coordinate appreciably."""
    ratio = duration * lam
    return ProjectiveValidity(ratio=ratio, valid=bool(ratio < 0.1))


def default_config(model: MomentumSuperposition, t_end: float | None = None,
                   dt: float | None = None, store_every: int = 1,
                   **overrides) -> IntegratorConfig:
    """Integration settings scaled to the model's separation time.

    T is taken for the closest momentum pair; the defaults are
    ``t_end = 2 T``, ``dt = min(0.01, T/300)``, trailing window 10% of t_end.
    """
    T = decoherence_time(model.packet.sigma, model.params.coupling,
                         0.0, momentum_gap(model))
    if t_end is None:
        t_end = 2.0 * T
    if dt is None:
        dt = min(0.01, T / 300.0)
    return IntegratorConfig(dt=dt, t_end=t_end,
                            stationary_window=0.1 * t_end,
                            store_every=store_every, **overrides)


# ------------------------------------------------------------------ engine


def _scalar_adapter(field):
    """Wrap a scalar field(ConfigPoint) -> VelocityPair into the batch form."""

    def batch(t, q, r):
        q = np.atleast_1d(np.asarray(q, float))
        r = np.atleast_1d(np.asarray(r, float))
        v_q = np.zeros_like(q)
        v_r = np.zeros_like(q)
        ok = np.ones(q.shape, dtype=bool)
        for k in range(q.size):
            try:
                v = field(ConfigPoint(float(q[k]), float(r[k]), float(t)))
            except NodeError:
                ok[k] = False
                continue
            v_q[k], v_r[k] = v.v_q, v.v_r
        return v_q, v_r, ok

    return batch


def _rk4_probe(field, t, q, r, vq1, vr1, dt):
    """Stages 2..4 of an RK4 step, given stage 1 at the current point."""
    vq2, vr2, ok2 = field(t + 0.5 * dt, q + 0.5 * dt * vq1, r + 0.5 * dt * vr1)
    vq3, vr3, ok3 = field(t + 0.5 * dt, q + 0.5 * dt * vq2, r + 0.5 * dt * vr2)
    vq4, vr4, ok4 = field(t + dt, q + dt * vq3, r + dt * vr3)
    new_q = q + dt / 6.0 * (vq1 + 2.0 * vq2 + 2.0 * vq3 + vq4)
    new_r = r + dt / 6.0 * (vr1 + 2.0 * vr2 + 2.0 * vr3 + vr4)
    return new_q, new_r, ok2 & ok3 & ok4


def _advance(field, t, q, r, vq1, vr1, ok1, dt, budget):
    """One base step with recursive halving for samples whose probe stages
    hit a node.  A failed stage 1 cannot be rescued (the point itself is in
    the node region), so those samples fail outright."""
    new_q, new_r, probe_ok = _rk4_probe(field, t, q, r, vq1, vr1, dt)
    ok = ok1 & probe_ok
    retry = ok1 & ~probe_ok
    if budget > 0 and np.any(retry):
        sq, sr = q[retry], r[retry]
        aq, ar, a_ok = _advance(field, t, sq, sr, vq1[retry], vr1[retry],
                                np.ones(sq.shape, bool), 0.5 * dt, budget - 1)
        m_vq, m_vr, m_ok = field(t + 0.5 * dt, aq, ar)
        bq, br, b_ok = _advance(field, t + 0.5 * dt, aq, ar, m_vq, m_vr,
                                a_ok & m_ok, 0.5 * dt, budget - 1)
        new_q[retry] = bq
        new_r[retry] = br
        ok[retry] = b_ok
    return new_q, new_r, ok


def integrate_ensemble(field, q0, r0, cfg: IntegratorConfig,
                       t0: float = 0.0) -> list[Trajectory]:
    """Integrate a batch of configurations through a shared velocity field.

    Parameters
    ----------
    field : callable
        Batch field ``field(t, q, r) -> (v_q, v_r, valid)`` over arrays.
    q0, r0 : array_like
        Initial coordinates, equal length.
    cfg : IntegratorConfig
    t0 : float
        Initial time.

    Returns
    -------
    list of Trajectory
        One per sample, in input order.  Samples that hit an impassable node
        come back truncated with ``node_excluded`` set; samples invalid at
        the start come back empty and excluded.
    """
    q = np.array(q0, dtype=float)
    r = np.array(r0, dtype=float)
    if q.shape != r.shape or q.ndim != 1:
        raise ValueError("q0 and r0 must be equal-length 1-D sequences")
    M = q.size
    n_steps = int(np.ceil((cfg.t_end - t0) / cfg.dt - 1e-12))
    step_times = np.minimum(t0 + cfg.dt * np.arange(n_steps + 1), cfg.t_end)
    step_times[-1] = cfg.t_end
    stored_steps = [k for k in range(n_steps + 1)
                    if k % cfg.store_every == 0 or k == n_steps]
    store_at = {k: s for s, k in enumerate(stored_steps)}
    n_stored = len(stored_steps)

    sq = np.full((n_stored, M), np.nan)
    sr = np.full((n_stored, M), np.nan)
    svq = np.full((n_stored, M), np.nan)
    svr = np.full((n_stored, M), np.nan)
    # last step index (inclusive) with valid stored data per sample; -1 = none
    last_step = np.full(M, -1, dtype=np.int64)
    active = np.ones(M, dtype=bool)

    for k in range(n_steps + 1):
        t_k = step_times[k]
        idx = np.flatnonzero(active)
        if idx.size:
            vq1, vr1, ok1 = field(t_k, q[idx], r[idx])
            # a node at the current point ends the trajectory before t_k
            dead_here = idx[~ok1]
            active[dead_here] = False
            live = idx[ok1]
            last_step[live] = k
            if k in store_at:
                s = store_at[k]
                sq[s, live] = q[live]
                sr[s, live] = r[live]
                svq[s, live] = vq1[ok1]
                svr[s, live] = vr1[ok1]
            if k < n_steps and live.size:
                dt_k = step_times[k + 1] - t_k
                new_q, new_r, ok = _advance(
                    field, t_k, q[live], r[live], vq1[ok1], vr1[ok1],
                    np.ones(live.size, bool), dt_k, cfg.max_substep_halvings)
                q[live[ok]] = new_q[ok]
                r[live[ok]] = new_r[ok]
                active[live[~ok]] = False

    trajectories = []
    excluded = last_step < n_steps
    stored_step_arr = np.asarray(stored_steps)
    stored_times = step_times[stored_step_arr]
    n_keep_all = np.searchsorted(stored_step_arr, last_step, side="right")
    for j in range(M):
        n_keep = int(n_keep_all[j])
        trajectories.append(Trajectory(
            times=stored_times[:n_keep].copy(),
            q=sq[:n_keep, j].copy(), r=sr[:n_keep, j].copy(),
            v_q=svq[:n_keep, j].copy(), v_r=svr[:n_keep, j].copy(),
            node_excluded=bool(excluded[j])))
    return trajectories


def integrate_trajectory(field, initial: ConfigPoint,
                         cfg: IntegratorConfig) -> Trajectory:
    """Integrate one configuration through a scalar velocity field.

    Parameters
    ----------
    field : callable
        ``field(ConfigPoint) -> VelocityPair``, raising NodeError inside
        node regions, or a batch field ``field(t, q, r) -> (v_q, v_r, valid)``.
    initial : ConfigPoint
        Start configuration; integration runs from ``initial.t`` to
        ``cfg.t_end``.
    cfg : IntegratorConfig

    Raises
    ------
    InvalidStartError
        If the initial configuration is already below the density floor.
    """
    batch = field if _is_batch_field(field) else _scalar_adapter(field)
    _, _, ok0 = batch(initial.t, np.array([initial.q]), np.array([initial.r]))
    if not ok0[0]:
        raise InvalidStartError(
            f"initial configuration (q={initial.q:.6g}, r={initial.r:.6g}) "
            f"is below the density floor at t={initial.t:.6g}")
    traj = integrate_ensemble(batch, [initial.q], [initial.r], cfg,
                              t0=initial.t)[0]
    return traj


def _is_batch_field(field) -> bool:
    """Batch fields take (t, q, r); scalar fields take a ConfigPoint."""
    try:
        out = field(0.0, np.zeros(0), np.zeros(0))
    except Exception:
        return False
    return isinstance(out, tuple) and len(out) == 3


def detect_outcome(traj: Trajectory, model: MomentumSuperposition,
                   cfg: IntegratorConfig) -> int | None:
    """Read the measurement outcome off the trailing pointer velocity.

    Averages v_r over the final ``stationary_window`` and matches it to the
    nearest branch drift ``lam p_i``.  Returns the branch index, or None
    (unresolved) when the residual exceeds
    ``stationary_tol * lam * momentum_gap``.

    Raises
    ------
    ValueError
        For node-excluded trajectories, or when the stored history is
        shorter than the averaging window.
    """
    if traj.node_excluded:
        raise ValueError("outcome undefined for a node-excluded trajectory")
    window = cfg.stationary_window if cfg.stationary_window else 0.1 * cfg.t_end
    if len(traj) < 2 or traj.times[-1] - traj.times[0] < window:
        raise ValueError("trajectory shorter than the stationary window")
    t_final = traj.times[-1]
    mask = traj.times >= t_final - window - 1e-12 * max(1.0, abs(t_final))
    v_bar = float(np.mean(traj.v_r[mask]))
    lam = model.params.coupling
    targets = lam * model.momenta
    idx = int(np.argmin(np.abs(v_bar - targets)))
    residual = abs(v_bar - targets[idx])
    if residual < cfg.stationary_tol * lam * momentum_gap(model):
        return idx
    return None

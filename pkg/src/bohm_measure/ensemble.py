"""Born-distributed ensembles and their statistics.

At t = 0 the joint density factorizes, rho(q, r, 0) = K(r)^2 g(q) with

    g(q) = |sum_i A_i exp(i p_i q)|^2,

so initial configurations are drawn as r ~ Normal(0, sigma) and q by inverse
transform from g restricted to a finite window (the plane-wave factor is not
normalizable over all q; for an equally spaced spectrum g is periodic and one
central period carries the full statistics of the idealized state).

Every sample draws from its own counter-based stream keyed by
(seed, sample index), so the draw for sample i never depends on how many
samples are requested or in what order they are generated.

Evolving the ensemble along the guidance flow preserves the Born
distribution; ``equivariance_check`` verifies this against the pointer
marginal int rho(q, r, t) dq computed by quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2 as _chi2

from .dynamics import Trajectory
from .wavefield import ConfigPoint, MomentumSuperposition, eval_density

__all__ = [
    "ZeroMassError",
    "InsufficientGroupError",
    "EnsembleSpec",
    "OutcomeHistogram",
    "EquivarianceReport",
    "DispersionSeries",
    "UncertaintyReport",
    "RNG_ALGORITHM",
    "default_q_window",
    "particle_profile",
    "sample_positions",
    "sample_initial",
    "sample_stream",
    "born_histogram",
    "equivariance_check",
    "packet_overlap",
    "packet_overlap_quadrature",
    "subensemble_dispersion",
    "uncertainty_product",
]

# Counter-based generator keyed per sample; recorded in run manifests.
RNG_ALGORITHM = "philox4x64-10 keyed by (seed, sample_index)"

_Q_GRID_POINTS = 10_000


class ZeroMassError(ValueError):
    """The particle profile carries no probability mass on the window."""


class InsufficientGroupError(ValueError):
    """An outcome group is too small for a dispersion estimate."""


@dataclass(frozen=True)
class EnsembleSpec:
    """Sampling request: model, sample count, seed, and q-window.

    ``q_window = None`` selects the default window: one central period
    2 pi / dp for an equally spaced spectrum, a 6-sigma neighborhood of the
    profile peak otherwise."""

    model: MomentumSuperposition
    n_samples: int
    seed: int
    q_window: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.q_window is not None:
            lo, hi = self.q_window
            if not lo < hi:
                raise ValueError("q_window must satisfy lo < hi")

    def window(self) -> tuple[float, float]:
        return self.q_window if self.q_window is not None \
            else default_q_window(self.model)


def particle_profile(model: MomentumSuperposition, q):
    """Particle weight g(q) = |sum_i A_i exp(i p_i q)|^2 at t = 0."""
    q = np.asarray(q, dtype=float)
    phases = np.exp(1j * np.multiply.outer(model.momenta, q))
    s = np.tensordot(model.amplitudes, phases, axes=(0, 0))
    return s.real**2 + s.imag**2


def _equal_spacing(model: MomentumSuperposition) -> float | None:
    """Common momentum spacing, or None if the spectrum is irregular."""
    if model.n_branches < 2:
        return None
    d = np.diff(model.momenta)
    return float(d[0]) if np.max(np.abs(d - d[0])) <= 1e-9 * d[0] else None


def default_q_window(model: MomentumSuperposition) -> tuple[float, float]:
    """Sampling window for the particle coordinate.

    Equally spaced spectra: one central period (-pi/dp, pi/dp) of g.  A single
    branch (g constant): (-pi, pi).  Irregular spectra: mean +- 6 std of g
    over a few beat lengths around the origin."""
    dp = _equal_spacing(model)
    if dp is not None:
        return (-np.pi / dp, np.pi / dp)
    if model.n_branches == 1:
        return (-np.pi, np.pi)
    beat = 2.0 * np.pi / float(np.min(np.diff(model.momenta)))
    grid = np.linspace(-3.0 * beat, 3.0 * beat, 60_001)
    g = particle_profile(model, grid)
    mass = np.trapezoid(g, grid)
    mean = np.trapezoid(grid * g, grid) / mass
    std = np.sqrt(np.trapezoid((grid - mean) ** 2 * g, grid) / mass)
    return (float(mean - 6.0 * std), float(mean + 6.0 * std))


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for one sample: Philox keyed by (seed, index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_positions(spec: EnsembleSpec):
    """Draw (q, r) arrays from the t = 0 Born density.

    r is Gaussian with the packet width; q follows g on the window through a
    10^4-point inverse-CDF table.  Sample i consumes exactly two draws from
    its own stream, so results are independent of batching.

    Raises
    ------
    ZeroMassError
        If g integrates to less than 1e-12 over the window.
    """
    lo, hi = spec.window()
    grid = np.linspace(lo, hi, _Q_GRID_POINTS)
    g = particle_profile(spec.model, grid)
    cdf = np.concatenate([[0.0], np.cumsum((g[1:] + g[:-1]) * 0.5 * np.diff(grid))])
    total = cdf[-1]
    if total < 1e-12:
        raise ZeroMassError(
            f"particle profile mass {total:.3e} < 1e-12 on window ({lo:g}, {hi:g})")
    cdf /= total
    u = np.empty(spec.n_samples)
    z = np.empty(spec.n_samples)
    for i in range(spec.n_samples):
        stream = sample_stream(spec.seed, i)
        u[i] = stream.random()
        z[i] = stream.standard_normal()
    q = np.interp(u, cdf, grid)
    r = spec.model.packet.sigma * z
    return q, r


def sample_initial(spec: EnsembleSpec) -> list[ConfigPoint]:
    """Born-distributed initial configurations at t = 0."""
    q, r = sample_positions(spec)
    return [ConfigPoint(float(qi), float(ri), 0.0) for qi, ri in zip(q, r)]


# ------------------------------------------------------------- statistics


@dataclass(frozen=True)
class OutcomeHistogram:
    """Outcome counts against the Born weights.

    ``counts[i]`` resolved to branch i; the chi-square compares resolved
    counts with ``n_resolved * A_i^2`` on ``n_branches - 1`` degrees of
    freedom."""

    counts: np.ndarray
    unresolved: int
    node_excluded: int
    expected: np.ndarray
    chi_square: float
    dof: int
    p_value: float

    @property
    def n_resolved(self) -> int:
        return int(self.counts.sum())

    @property
    def n_total(self) -> int:
        return self.n_resolved + self.unresolved + self.node_excluded

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / max(self.n_resolved, 1)


def born_histogram(outcomes, model: MomentumSuperposition,
                   node_excluded: int = 0) -> OutcomeHistogram:
    """Tally detected outcomes (None = unresolved) against Born weights.

    Parameters
    ----------
    outcomes : sequence of int or None
        Detected branch per non-excluded trajectory.
    model : MomentumSuperposition
    node_excluded : int
        Number of trajectories dropped at density nodes, carried through to
        the totals so nothing is silently lost.
    """
    n = model.n_branches
    counts = np.zeros(n, dtype=np.int64)
    unresolved = 0
    for o in outcomes:
        if o is None:
            unresolved += 1
        else:
            if not 0 <= o < n:
                raise ValueError(f"outcome index {o} out of range")
            counts[o] += 1
    n_resolved = int(counts.sum())
    expected = n_resolved * model.born_probabilities
    if n_resolved > 0 and n > 1:
        chi_square = float(np.sum((counts - expected) ** 2 / expected))
        dof = n - 1
        p_value = float(_chi2.sf(chi_square, dof))
    else:
        chi_square, dof, p_value = 0.0, 0, 1.0
    return OutcomeHistogram(counts=counts, unresolved=unresolved,
                            node_excluded=int(node_excluded),
                            expected=expected, chi_square=chi_square,
                            dof=dof, p_value=p_value)


@dataclass(frozen=True)
class EquivarianceReport:
    """Pointer-marginal goodness of fit at one time."""

    t: float
    chi_square: float
    dof: int
    p_value: float
    observed: np.ndarray
    expected: np.ndarray
    edges: np.ndarray
    n_used: int
    node_excluded: int


def pointer_marginal_quadrature(model: MomentumSuperposition, t: float,
                                r_grid, q_window=None):
    """Pointer marginal int rho(q, r, t) dq by quadrature, unnormalized.

    For an equally spaced spectrum the q-integral runs over one exact period
    with the periodic trapezoid rule (exact for the finitely many harmonics
    of rho); otherwise a dense trapezoid over ``q_window``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    dp = _equal_spacing(model)
    if dp is not None:
        L = 2.0 * np.pi / dp
        n_q = 64
        while n_q <= (model.momenta[-1] - model.momenta[0]) / dp:
            n_q *= 2
        q_nodes = -L / 2.0 + L * np.arange(n_q) / n_q
        weights = np.full(n_q, L / n_q)
    elif model.n_branches == 1:
        lo, hi = q_window if q_window is not None else default_q_window(model)
        q_nodes = np.linspace(lo, hi, 2001)
        weights = np.gradient(q_nodes)
    else:
        lo, hi = q_window if q_window is not None else default_q_window(model)
        q_nodes = np.linspace(lo, hi, 4001)
        weights = np.gradient(q_nodes)
    marginal = np.empty(r_grid.size)
    chunk = max(1, 2_000_000 // max(q_nodes.size, 1))
    for start in range(0, r_grid.size, chunk):
        rr = r_grid[start:start + chunk]
        rho = eval_density(model, ConfigPoint(
            q_nodes[:, None], rr[None, :], t))
        marginal[start:start + chunk] = np.tensordot(weights, rho, axes=(0, 0))
    return marginal


def equivariance_check(spec: EnsembleSpec, t: float, bins: int = 20,
                       cfg=None) -> EquivarianceReport:
    """Evolve a Born ensemble to time t and test the pointer marginal.

    Samples by ``sample_positions``, integrates the guidance flow, and
    compares the empirical distribution of the final pointer coordinate with
    the quadrature marginal through an equal-probability-bin chi-square
    (``bins - 1`` degrees of freedom).
    """
    from .dynamics import default_config, integrate_ensemble
    from .guidance import momentum_field
    from .wavefield import density_peak

    model = spec.model
    q0, r0 = sample_positions(spec)
    if t <= 0.0:
        # self-test at the sampling time: no evolution involved
        r_final = r0
        n_kept = spec.n_samples
        n_excl = 0
    else:
        if cfg is None:
            cfg = default_config(model, t_end=t)
        field = momentum_field(model, cfg.rho_min * density_peak(model))
        trajs = integrate_ensemble(field, q0, r0, cfg)
        kept = [tr for tr in trajs if not tr.node_excluded]
        r_final = np.array([tr.r[-1] for tr in kept])
        n_kept = len(kept)
        n_excl = len(trajs) - n_kept

    lam = model.params.coupling
    sigma = model.packet.sigma
    r_lo = lam * model.momenta[0] * t - 8.0 * sigma
    r_hi = lam * model.momenta[-1] * t + 8.0 * sigma
    r_grid = np.linspace(r_lo, r_hi, 1601)
    marginal = pointer_marginal_quadrature(model, t, r_grid,
                                           q_window=spec.window())
    cdf = np.concatenate([[0.0], np.cumsum(
        (marginal[1:] + marginal[:-1]) * 0.5 * np.diff(r_grid))])
    if cdf[-1] < 1e-12:
        raise ZeroMassError("quadrature marginal carries no mass")
    cdf /= cdf[-1]
    edges = np.interp(np.arange(1, bins) / bins, cdf, r_grid)
    observed = np.bincount(np.searchsorted(edges, r_final), minlength=bins)
    expected = np.full(bins, n_kept / bins)
    chi_square = float(np.sum((observed - expected) ** 2 / expected))
    dof = bins - 1
    return EquivarianceReport(t=t, chi_square=chi_square, dof=dof,
                              p_value=float(_chi2.sf(chi_square, dof)),
                              observed=observed, expected=expected,
                              edges=edges, n_used=n_kept,
                              node_excluded=n_excl)


# ------------------------------------------------------------- overlaps


def packet_overlap(model: MomentumSuperposition, i: int, j: int, t: float) -> float:
    """Overlap int K_i K_j dr of two branch pointer packets at time t.

    Closed form exp(-(lam (p_i - p_j) t)^2 / (8 sigma^2)): unity at t = 0,
    decaying with the packet separation; the value at the separation time
    T = 6 sigma / (lam |p_i - p_j|) is exp(-4.5) ~ 0.011.
    """
    lam = model.params.coupling
    sigma = model.packet.sigma
    sep = lam * (model.momenta[i] - model.momenta[j]) * t
    return float(np.exp(-sep**2 / (8.0 * sigma**2)))


def packet_overlap_quadrature(model: MomentumSuperposition, i: int, j: int,
                              t: float) -> float:
    """Quadrature route for the branch-packet overlap (oracle for the
    closed form)."""
    from scipy.integrate import quad
    from .wavefield import packet_eval

    lam = model.params.coupling
    sigma = model.packet.sigma
    ci = lam * model.momenta[i] * t
    cj = lam * model.momenta[j] * t
    mid = 0.5 * (ci + cj)
    span = 12.0 * sigma + 0.5 * abs(ci - cj)
    val, _ = quad(lambda r: packet_eval(model.packet, r - ci)
                  * packet_eval(model.packet, r - cj),
                  mid - span, mid + span, limit=200)
    return float(val)


# ------------------------------------------------------------- dispersion


@dataclass(frozen=True)
class DispersionSeries:
    """Particle-coordinate spread of one outcome group over time."""

    times: np.ndarray
    delta_q: np.ndarray
    outcome: int
    n_members: int


@dataclass(frozen=True)
class UncertaintyReport:
    """Spread-bandwidth product of one outcome group against the 1/2 bound."""

    times: np.ndarray
    product: np.ndarray
    dp: float
    T: float
    satisfied: bool
    min_product_after_T: float


def subensemble_dispersion(trajectories, outcome: int) -> DispersionSeries:
    """Population spread Delta q(t) over the trajectories that resolved to
    one outcome.

    All members must share the stored time grid (they do when produced by a
    single ensemble run).

    Raises
    ------
    InsufficientGroupError
        Fewer than two members carry the requested outcome.
    """
    members = [tr for tr in trajectories
               if not tr.node_excluded and tr.outcome == outcome]
    if len(members) < 2:
        raise InsufficientGroupError(
            f"outcome {outcome}: {len(members)} member(s), need >= 2")
    times = members[0].times
    for tr in members[1:]:
        if tr.times.size != times.size or not np.allclose(tr.times, times):
            raise ValueError("outcome group does not share a time grid")
    qs = np.stack([tr.q for tr in members])
    # population (not sample-corrected) standard deviation
    delta_q = qs.std(axis=0, ddof=0)
    return DispersionSeries(times=times.copy(), delta_q=delta_q,
                            outcome=outcome, n_members=len(members))


def uncertainty_product(disp: DispersionSeries, dp: float,
                        T: float) -> UncertaintyReport:
    """Form dp * Delta q(t) and check it stays >= 1/2 once the measurement
    has resolved (t >= T).  The pre-measurement value may sit below the
    bound; it is reported, not judged."""
    if not dp > 0:
        raise ValueError("dp must be positive")
    product = dp * disp.delta_q
    after = disp.times >= T - 1e-12 * max(1.0, abs(T))
    if not np.any(after):
        raise ValueError("dispersion series does not reach t = T")
    min_after = float(product[after].min())
    return UncertaintyReport(times=disp.times.copy(), product=product,
                             dp=dp, T=T, satisfied=bool(min_after >= 0.5),
                             min_product_after_T=min_after)

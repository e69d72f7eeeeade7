"""Time integration of the coupled curve/spinor gradient flow.

State ``(u, psi)`` is advanced extrinsically.  With ``v_u = tau - R - eps R_c``
and ``v_psi = Lap psi - D psi / eps`` (rescaled) or ``eps Lap psi - D psi``
(unrescaled), the ambient equations are::

    u_t   = v_u
    psi_t = v_psi + II(v_u, psi)

The second term is the normal correction that keeps ``psi`` tangent while
the base point moves, so the covariant time derivative of ``psi`` is
``v_psi``.  Every integrator splits off the flat constant-coefficient part
(``d^2/ds^2`` for the curve, ``Lap - D/eps`` or ``eps Lap - D`` for the
spinor), which is diagonal in mode space, and projects back onto the
constraint set after every step.

Integrators
-----------
semi_implicit
    Exponential time differencing, fourth order (ETDRK4): the stiff flat
    part is integrated exactly, curvature, projection and coupling terms
    explicitly.
imex_euler
    First-order linearly implicit Euler with the same splitting.
explicit_rk4
    Classical RK4 on the full right-hand side; subject to a step-size check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, Sequence

import numpy as np

from . import circle_spectral as cs
from .circle_spectral import CircleGrid, SpinStructure
from .energy import (
    Kinematics,
    curvature_R_array,
    curvature_Rc_array,
    el_residual,
    energy_terms,
    field_norms,
    kinematics,
)
from .errors import BlowupError, ConfigurationError, DomainError, StepSizeError
from .spinors import CurveField, SpinorField

INTEGRATORS = ("semi_implicit", "imex_euler", "explicit_rk4")
BLOWUP_SUP_F = 1e12
RK4_STABILITY = 2.5
CONTOUR_POINTS = 64


@dataclass(frozen=True)
class FlowParams:
    eps: float
    dt: float
    t_end: float
    rescaled: bool = True
    integrator: str = "semi_implicit"
    stationary_tol: float = 1e-6
    monitor_stride: int = 1
    stop_on_stationary: bool = True

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigurationError("dt and t_end must be positive")
        if not self.dt < self.t_end:
            raise ConfigurationError("dt must be smaller than t_end")
        if not self.stationary_tol > 0:
            raise ConfigurationError("stationary_tol must be positive")
        if int(self.monitor_stride) != self.monitor_stride or self.monitor_stride < 1:
            raise ConfigurationError("monitor_stride must be a positive integer")
        if self.integrator not in INTEGRATORS:
            raise ConfigurationError(f"unknown integrator {self.integrator!r}; choose from {', '.join(INTEGRATORS)}")

    @property
    def dissipation_weight(self) -> float:
        """Weight ``c`` in ``dE/dt = -||v_u||^2 - c ||v_psi||^2``."""
        return self.eps if self.rescaled else 1.0

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    def pointwise_bound_factor(self, t: float) -> float:
        """Growth allowed for ``sup |psi|^2`` by the maximum principle."""
        rate = 0.5 / self.eps**2 if self.rescaled else 0.5 / self.eps
        return math.exp(rate * t)


@dataclass(frozen=True)
class FlowState:
    t: float
    curve: CurveField
    spinor: SpinorField

    def __post_init__(self):
        if self.spinor.base is not self.curve and not np.array_equal(self.spinor.base.points, self.curve.points):
            raise ConfigurationError("spinor is not defined along the state curve")

    @classmethod
    def from_arrays(cls, t, grid, manifold, u, psi, spin) -> "FlowState":
        curve = CurveField(grid, u, manifold)
        return cls(float(t), curve, SpinorField(curve, spin, psi))

    @property
    def manifold(self):
        return self.curve.manifold

    @property
    def spin(self) -> SpinStructure:
        return self.spinor.spin


DIAGNOSTIC_COLUMNS = (
    "t",
    "E_eps",
    "E",
    "cumulative_dissipation",
    "sup_psi_sq",
    "psi_l2_sq",
    "sup_F",
    "sup_G",
    "grad_norm",
    "gamma_speed_min",
    "gamma_speed_max",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    E_eps: float
    E: float
    cumulative_dissipation: float
    sup_psi_sq: float
    psi_l2_sq: float
    sup_F: float
    sup_G: float
    grad_norm: float
    gamma_speed_min: float
    gamma_speed_max: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in DIAGNOSTIC_COLUMNS)


assert tuple(f.name for f in fields(DiagnosticsRecord)) == DIAGNOSTIC_COLUMNS


class Trajectory(list):
    """List of diagnostics records with the reason the run stopped."""

    def __init__(self, records: Iterable[DiagnosticsRecord] = (), stop_reason: str = ""):
        super().__init__(records)
        self.stop_reason = stop_reason

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self])


# -- right-hand side ----------------------------------------------------------


@dataclass
class _Eval:
    """Right-hand side and derived quantities at a projected state."""

    u: np.ndarray
    psi: np.ndarray
    kin: Kinematics
    v_u: np.ndarray
    v_psi: np.ndarray
    psi_dot: np.ndarray


def _project(manifold, u, psi):
    u = manifold.project(u)
    return u, manifold.tangent_project(u, psi)


def _evaluate(manifold, u, psi, spin, eps, rescaled) -> _Eval:
    kin = kinematics(manifold, u, psi, spin)
    R = curvature_R_array(manifold, u, kin.du, psi)
    Rc = curvature_Rc_array(manifold, u, kin.du, psi, kin.nabla_psi)
    v_u = kin.tension - R - eps * Rc
    if rescaled:
        v_psi = kin.laplacian_psi - kin.dirac_psi / eps
    else:
        v_psi = eps * kin.laplacian_psi - kin.dirac_psi
    correction = manifold.second_fundamental_form(u, v_u, psi.real) + 1j * manifold.second_fundamental_form(
        u, v_u, psi.imag
    )
    return _Eval(u, psi, kin, v_u, v_psi, v_psi + correction)


def _linear_symbols(n: int, spin: SpinStructure, eps: float, rescaled: bool):
    per = SpinStructure.PERIODIC
    du = cs.derivative_symbol(n, per)
    dpsi = cs.derivative_symbol(n, spin)
    lu = (du * du).real
    if rescaled:
        lpsi = dpsi * dpsi - 1j * dpsi / eps
    else:
        lpsi = eps * dpsi * dpsi - 1j * dpsi
    return lu.astype(complex), lpsi


def _etd_coefficients(L: np.ndarray, h: float):
    """ETDRK4 weights by contour averaging (stable for small and complex ``hL``)."""
    r = np.exp(2j * np.pi * (np.arange(1, CONTOUR_POINTS + 1) - 0.5) / CONTOUR_POINTS)
    z = h * L[:, None] + r[None, :]
    ez = np.exp(z)
    E = np.exp(h * L)
    E2 = np.exp(h * L / 2)
    Q = h * np.mean((np.exp(z / 2) - 1) / z, axis=1)
    f1 = h * np.mean((-4 - z + ez * (4 - 3 * z + z**2)) / z**3, axis=1)
    f2 = h * np.mean((2 + z + ez * (z - 2)) / z**3, axis=1)
    f3 = h * np.mean((-4 - 3 * z - z**2 + ez * (4 - z)) / z**3, axis=1)
    if np.all(np.isreal(L)):
        Q, f1, f2, f3 = Q.real, f1.real, f2.real, f3.real
    return E, E2, Q, f1, f2, f3


class _Integrator:
    """Stepper bound to one manifold, grid, spin structure and parameter set."""

    def __init__(self, manifold, n: int, spin: SpinStructure, params: FlowParams):
        self.m = manifold
        self.spin = spin
        self.p = params
        self.per = SpinStructure.PERIODIC
        self.Lu, self.Lpsi = _linear_symbols(n, spin, params.eps, params.rescaled)
        h = params.dt
        if params.integrator == "semi_implicit":
            self.cu = [c[:, None] for c in _etd_coefficients(self.Lu, h)]
            self.cpsi = [c[:, None] for c in _etd_coefficients(self.Lpsi, h)]
        elif params.integrator == "imex_euler":
            self.iu = (1.0 / (1.0 - h * self.Lu))[:, None]
            self.ipsi = (1.0 / (1.0 - h * self.Lpsi))[:, None]
        else:
            stiff = h * max(np.max(np.abs(self.Lu)), np.max(np.abs(self.Lpsi)))
            if stiff > RK4_STABILITY:
                raise StepSizeError(
                    f"explicit_rk4 unstable: dt*max|L| = {stiff:.3g} exceeds {RK4_STABILITY}; reduce dt below "
                    f"{RK4_STABILITY * h / stiff:.3g}"
                )

    def evaluate(self, u, psi) -> _Eval:
        return _evaluate(self.m, u, psi, self.spin, self.p.eps, self.p.rescaled)

    # mode-space helpers
    def _modes(self, u, psi):
        return cs.to_modes(u, self.per), cs.to_modes(psi, self.spin)

    def _nodes(self, uh, ph):
        return cs.from_modes(uh, self.per).real, cs.from_modes(ph, self.spin)

    def _nonlinear(self, u, psi, ev: _Eval | None = None):
        """Mode-space ``F(Pi x) - L Pi x`` and the evaluation at ``Pi x``."""
        if ev is None:
            ev = self.evaluate(*_project(self.m, u, psi))
        uh, ph = self._modes(ev.u, ev.psi)
        nu = cs.to_modes(ev.v_u, self.per) - self.Lu[:, None] * uh
        npsi = cs.to_modes(ev.psi_dot, self.spin) - self.Lpsi[:, None] * ph
        return nu, npsi, uh, ph

    def step(self, ev: _Eval):
        """Advance from the projected state carried by ``ev``; returns projected arrays."""
        if self.p.integrator == "semi_implicit":
            u, psi = self._etdrk4(ev)
        elif self.p.integrator == "imex_euler":
            nu, npsi, uh, ph = self._nonlinear(ev.u, ev.psi, ev)
            h = self.p.dt
            u, psi = self._nodes(self.iu * (uh + h * nu), self.ipsi * (ph + h * npsi))
        else:
            u, psi = self._rk4(ev)
        return _project(self.m, u, psi)

    def _etdrk4(self, ev):
        Eu, E2u, Qu, f1u, f2u, f3u = self.cu
        Ep, E2p, Qp, f1p, f2p, f3p = self.cpsi
        nu0, np0, uh, ph = self._nonlinear(ev.u, ev.psi, ev)
        au, ap = E2u * uh + Qu * nu0, E2p * ph + Qp * np0
        nua, npa, _, _ = self._nonlinear(*self._nodes(au, ap))
        bu, bp = E2u * uh + Qu * nua, E2p * ph + Qp * npa
        nub, npb, _, _ = self._nonlinear(*self._nodes(bu, bp))
        cu_, cp_ = E2u * au + Qu * (2 * nub - nu0), E2p * ap + Qp * (2 * npb - np0)
        nuc, npc, _, _ = self._nonlinear(*self._nodes(cu_, cp_))
        un = Eu * uh + f1u * nu0 + 2 * f2u * (nua + nub) + f3u * nuc
        pn = Ep * ph + f1p * np0 + 2 * f2p * (npa + npb) + f3p * npc
        return self._nodes(un, pn)

    def _rk4(self, ev):
        h = self.p.dt

        def rhs(u, psi):
            e = self.evaluate(*_project(self.m, u, psi))
            return e.v_u, e.psi_dot

        u0, p0 = ev.u, ev.psi
        k1 = (ev.v_u, ev.psi_dot)
        k2 = rhs(u0 + 0.5 * h * k1[0], p0 + 0.5 * h * k1[1])
        k3 = rhs(u0 + 0.5 * h * k2[0], p0 + 0.5 * h * k2[1])
        k4 = rhs(u0 + h * k3[0], p0 + h * k3[1])
        u = u0 + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        psi = p0 + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        return u, psi


# -- diagnostics --------------------------------------------------------------


@dataclass
class _StepStats:
    dissipation_rate: float
    grad_norm: float
    sup_F: float
    sup_G: float


def _stats(ev: _Eval, params: FlowParams, weight: float) -> _StepStats:
    c = params.dissipation_weight
    su = np.sum(ev.v_u**2)
    sp = float(np.sum(np.abs(ev.v_psi) ** 2))
    rate = weight * (su + c * sp)
    # spinor gradient is -eps v_psi (rescaled) or -v_psi (unrescaled)
    grad = math.sqrt(weight * (su + c * c * sp))
    speed_sq = np.sum(ev.kin.du**2, axis=1)
    nabla_sq = np.sum(np.abs(ev.kin.nabla_psi) ** 2, axis=1)
    sup_F = 0.5 * float(np.max(speed_sq + params.eps * nabla_sq))
    sup_G = 0.5 * float(np.max(np.sum(ev.v_u**2, axis=1) + np.sum(np.abs(ev.v_psi) ** 2, axis=1)))
    return _StepStats(float(rate), grad, sup_F, sup_G)


def _record(t, ev: _Eval, stats: _StepStats, cumulative: float, params: FlowParams, spin) -> DiagnosticsRecord:
    # manifold unused: kinematics are already evaluated
    dirichlet, dirac, reg, psi_sq = energy_terms(None, ev.u, ev.psi, spin, params.eps, kin=ev.kin)
    E = dirichlet + dirac
    speed = np.linalg.norm(ev.kin.du, axis=1)
    return DiagnosticsRecord(
        t=float(t),
        E_eps=E + params.eps * reg,
        E=E,
        cumulative_dissipation=float(cumulative),
        sup_psi_sq=float(np.max(np.sum(np.abs(ev.psi) ** 2, axis=1))),
        psi_l2_sq=psi_sq,
        sup_F=stats.sup_F,
        sup_G=stats.sup_G,
        grad_norm=stats.grad_norm,
        gamma_speed_min=float(np.min(speed)),
        gamma_speed_max=float(np.max(speed)),
    )


# -- public operations --------------------------------------------------------

Observer = Callable[[FlowState, DiagnosticsRecord], None]


def _check_finite(u, psi) -> bool:
    return bool(np.all(np.isfinite(u)) and np.all(np.isfinite(psi)))


def step(state: FlowState, params: FlowParams) -> FlowState:
    """Advance ``state`` by one time step ``params.dt``."""
    m = state.manifold
    integ = _Integrator(m, state.curve.grid.n, state.spin, params)
    ev = integ.evaluate(*_project(m, state.curve.points, state.spinor.values))
    u, psi = integ.step(ev)
    if not _check_finite(u, psi):
        raise BlowupError(f"non-finite values after step at t={state.t + params.dt:.6g}", last_state=state)
    return FlowState.from_arrays(state.t + params.dt, state.curve.grid, m, u, psi, state.spin)


def evolve(
    state0: FlowState,
    params: FlowParams,
    observers: Sequence[Observer] = (),
) -> tuple[FlowState, Trajectory]:
    """Integrate until ``t_end`` or until the gradient norm drops below ``stationary_tol``.

    Observers are called with ``(state, record)`` every ``monitor_stride``
    steps and at the final step.  Dissipation and the stopping test are
    evaluated at every step, so results do not depend on the stride.
    """
    m = state0.manifold
    grid = state0.curve.grid
    spin = state0.spin
    w = grid.weight
    integ = _Integrator(m, grid.n, spin, params)
    ev = integ.evaluate(*_project(m, state0.curve.points, state0.spinor.values))
    stats = _stats(ev, params, w)
    cumulative = 0.0
    traj = Trajectory()
    t0 = state0.t

    def emit(k, ev, stats):
        rec = _record(t0 + k * params.dt, ev, stats, cumulative, params, spin)
        traj.append(rec)
        if observers:
            st = FlowState.from_arrays(rec.t, grid, m, ev.u, ev.psi, spin)
            for obs in observers:
                obs(st, rec)
        return rec

    emit(0, ev, stats)
    last_state = state0
    n_steps = params.n_steps
    stop = "t_end"
    if params.stop_on_stationary and stats.grad_norm <= params.stationary_tol:
        n_steps, stop = 0, "stationary"
    k = 0
    for k in range(1, n_steps + 1):
        u, psi = integ.step(ev)
        t = t0 + k * params.dt
        if not _check_finite(u, psi):
            traj.stop_reason = "blowup"
            raise BlowupError(f"non-finite values at t={t:.6g}", last_state=last_state, trajectory=traj)
        ev_new = integ.evaluate(u, psi)
        stats_new = _stats(ev_new, params, w)
        if not math.isfinite(stats_new.sup_F) or stats_new.sup_F > BLOWUP_SUP_F:
            traj.stop_reason = "blowup"
            raise BlowupError(
                f"sup_F = {stats_new.sup_F:.3e} exceeds {BLOWUP_SUP_F:.0e} at t={t:.6g}",
                last_state=last_state,
                trajectory=traj,
            )
        cumulative += 0.5 * params.dt * (stats.dissipation_rate + stats_new.dissipation_rate)
        ev, stats = ev_new, stats_new
        stationary = params.stop_on_stationary and stats.grad_norm <= params.stationary_tol
        if k % params.monitor_stride == 0 or k == n_steps or stationary:
            emit(k, ev, stats)
            if k % params.monitor_stride == 0:
                last_state = FlowState.from_arrays(t, grid, m, u, psi, spin)
        if stationary:
            stop = "stationary"
            break
    traj.stop_reason = stop
    final = FlowState.from_arrays(t0 + k * params.dt, grid, m, ev.u, ev.psi, spin)
    return final, traj


@dataclass(frozen=True)
class StationarityReport:
    stationary: bool
    grad_norm: float
    regularized_sup: float
    regularized_l2: float
    unregularized_sup: float
    unregularized_l2: float
    dirac_l2: float


def detect_stationary(state: FlowState, eps: float, tol: float) -> StationarityReport:
    """Stationary iff the L2 norm of the energy gradient is at most ``tol``."""
    reg = el_residual(state.curve, state.spinor, eps, regularized=True)
    unreg = el_residual(state.curve, state.spinor, eps, regularized=False)
    grad = reg.l2
    return StationarityReport(
        stationary=bool(grad <= tol),
        grad_norm=grad,
        regularized_sup=reg.sup,
        regularized_l2=reg.l2,
        unregularized_sup=unreg.sup,
        unregularized_l2=unreg.l2,
        dirac_l2=unreg.spinor_l2,
    )


def subconvergence_extract(trajectory: Sequence[DiagnosticsRecord]) -> list[float]:
    """Times of a greedy strictly decreasing ``grad_norm`` subsequence."""
    if len(trajectory) == 0:
        raise DomainError("trajectory is empty")
    times = [trajectory[0].t]
    best = trajectory[0].grad_norm
    for rec in trajectory[1:]:
        if rec.grad_norm < best:
            times.append(rec.t)
            best = rec.grad_norm
    return times


class SnapshotCollector:
    """Observer keeping states at recorded times (optionally every ``keep_every``-th record)."""

    def __init__(self, keep_every: int = 1):
        self.keep_every = keep_every
        self.states: dict[float, FlowState] = {}
        self._count = 0

    def __call__(self, state: FlowState, record: DiagnosticsRecord):
        if self._count % self.keep_every == 0:
            self.states[record.t] = state
        self._count += 1

    def at(self, times: Iterable[float]) -> list[FlowState]:
        return [self.states[t] for t in times if t in self.states]


@dataclass
class SweepEntry:
    eps: float
    exploratory: bool
    converged: bool
    final_t: float
    grad_norm: float
    regularized_sup: float
    regularized_l2: float
    unregularized_sup: float
    unregularized_l2: float
    dirac_l2: float
    speed_spread: float
    stop_reason: str
    error: str = ""
    state: FlowState | None = field(default=None, repr=False)
    trajectory: Trajectory | None = field(default=None, repr=False)


def speed_spread(state: FlowState) -> float:
    """Relative spread ``(max - min) / mean`` of ``|gamma'|``; ``inf`` for a point curve."""
    speed = state.curve.speed
    mean = float(np.mean(speed))
    if mean == 0.0:
        return math.inf
    return float((np.max(speed) - np.min(speed)) / mean)


def epsilon_sweep(state0: FlowState, eps_values: Sequence[float], params: FlowParams) -> list[SweepEntry]:
    """Run the flow for each ``eps`` in descending order, warm-starting from the previous limit.

    Entries with ``eps < 1`` are marked exploratory.  A blowup is recorded
    in the entry and the next ``eps`` restarts from the last valid state.
    """
    eps_values = [float(e) for e in eps_values]
    if not eps_values or any(e <= 0 for e in eps_values):
        raise DomainError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_values, eps_values[1:])):
        raise ConfigurationError("eps values must be strictly descending")
    out = []
    state = state0
    for eps in eps_values:
        p = FlowParams(
            eps=eps,
            dt=params.dt,
            t_end=params.t_end,
            rescaled=params.rescaled,
            integrator=params.integrator,
            stationary_tol=params.stationary_tol,
            monitor_stride=params.monitor_stride,
            stop_on_stationary=params.stop_on_stationary,
        )
        start = FlowState(0.0, state.curve, state.spinor)
        error = ""
        try:
            final, traj = evolve(start, p)
        except BlowupError as exc:
            final = exc.last_state if exc.last_state is not None else start
            traj = exc.trajectory
            error = str(exc)
        rep = detect_stationary(final, eps, params.stationary_tol)
        out.append(
            SweepEntry(
                eps=eps,
                exploratory=eps < 1.0,
                converged=rep.stationary and not error,
                final_t=final.t,
                grad_norm=rep.grad_norm,
                regularized_sup=rep.regularized_sup,
                regularized_l2=rep.regularized_l2,
                unregularized_sup=rep.unregularized_sup,
                unregularized_l2=rep.unregularized_l2,
                dirac_l2=rep.dirac_l2,
                speed_spread=speed_spread(final),
                stop_reason=traj.stop_reason if traj is not None else "blowup",
                error=error,
                state=final,
                trajectory=traj,
            )
        )
        state = final
    return out

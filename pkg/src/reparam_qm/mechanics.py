"""Reparametrization-invariant classical mechanics.

A :class:`LagrangianModel` ``L(q, v, t)`` is Legendre-transformed
numerically to ``H(q, p, t)``.  Extending the configuration space by ``t``
with conjugate momentum ``p_t`` gives the constraint ``p_t + H = 0``, which
every solution satisfies, and a canonical Hamiltonian ``tdot * (p_t + H)``
for the lifted Lagrangian ``tdot * L(q, qdot / tdot, t)``.

Trajectories are integrated in physical time and then lifted to an
arbitrary parametrization ``t = g(tau)``; only the curve ``q(t)`` obtained by
eliminating ``tau`` is gauge independent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from .spectral import PhysicalConstants

__all__ = [
    "ConvergenceError",
    "GaugeError",
    "SuperluminalError",
    "LagrangianModel",
    "PhaseState",
    "GaugeFunction",
    "Trajectory",
    "free_particle",
    "harmonic_oscillator",
    "quadratic_model",
    "relativistic_particle",
    "identity_gauge",
    "power_gauge",
    "exponential_gauge",
    "legendre_momenta",
    "velocity_jacobian",
    "invert_velocities",
    "physical_hamiltonian",
    "ri_constraint",
    "CanonicalHamiltonian",
    "canonical_hamiltonian_ri",
    "hamilton_vector_field",
    "integrate_physical",
    "lift_to_ri",
    "reconstruct_physical",
    "poisson_bracket",
    "relativistic_momenta",
    "ri_relativistic_lagrangian",
    "covariant_relativistic_lagrangian",
]

LEGENDRE_STEP = 1e-5
HAMILTON_STEP = 1e-6


class ConvergenceError(RuntimeError):
    pass


class GaugeError(ValueError):
    pass


class SuperluminalError(ValueError):
    pass


def _vec(a) -> np.ndarray:
    if type(a) is np.ndarray and a.ndim == 1 and a.dtype == np.float64:
        return a
    return np.atleast_1d(np.asarray(a, dtype=float))


def _central_gradient(func: Callable[[np.ndarray], float], x: np.ndarray, rel_step: float) -> np.ndarray:
    """Fourth-order central-difference gradient, step ``rel_step * (1 + |x_i|)``."""
    x = _vec(x)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        f = [func(x + s * e) for s in (2, 1, -1, -2)]
        if not all(map(np.isfinite, f)):
            raise ValueError(f"non-finite value in difference stencil around {x}")
        grad[i] = (-f[0] + 8 * f[1] - 8 * f[2] + f[3]) / (12 * h)
    return grad


@dataclass(frozen=True)
class LagrangianModel:
    """Regular Lagrangian ``L(q, v, t)`` on a ``dim``-dimensional configuration space.

    ``momenta`` optionally gives ``dL/dv`` analytically; ``speed_limit``
    (the relativistic ``c``) bounds ``|v|`` during velocity inversion.
    """

    dim: int
    lagrangian: Callable[[np.ndarray, np.ndarray, float], float]
    momenta: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None
    label: str = "model"
    speed_limit: Optional[float] = None

    def L(self, q, v, t) -> float:
        return float(self.lagrangian(_vec(q), _vec(v), float(t)))


@dataclass(frozen=True)
class PhaseState:
    """Point ``(q, p, t, p_t)`` of extended phase space at parameter ``tau``."""

    q: np.ndarray
    p: np.ndarray
    t: float
    p_t: float
    tau: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q", _vec(self.q))
        object.__setattr__(self, "p", _vec(self.p))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same dimension")
        values = np.concatenate([self.q, self.p, [self.t, self.p_t, self.tau]])
        if not np.all(np.isfinite(values)):
            raise ValueError("phase state has non-finite entries")


@dataclass(frozen=True)
class GaugeFunction:
    """Parametrization ``t = g(tau)`` with ``g_dot > 0`` on ``[tau_min, tau_max]``."""

    g: Callable[[np.ndarray], np.ndarray]
    g_dot: Callable[[np.ndarray], np.ndarray]
    tau_min: float
    tau_max: float
    label: str = "gauge"

    def inverse(self, t: float) -> float:
        lo, hi = self.tau_min, self.tau_max
        g_lo, g_hi = float(self.g(lo)), float(self.g(hi))
        tol = 1e-12 * max(1.0, abs(g_lo), abs(g_hi))
        if not (g_lo - tol <= t <= g_hi + tol):
            raise GaugeError(
                f"t={t} outside the gauge range [{g_lo}, {g_hi}] of {self.label!r}"
            )
        if abs(t - g_lo) <= tol:
            return lo
        if abs(t - g_hi) <= tol:
            return hi
        return brentq(lambda s: float(self.g(s)) - t, lo, hi, xtol=1e-15, rtol=1e-15)


@dataclass(frozen=True)
class Trajectory:
    """Sampled extended-phase-space curve, stored column-wise.

    The optional ``*_rate`` arrays hold ``d/dt`` of ``q``, ``p`` and ``p_t``
    at the samples; when present they are used for Hermite interpolation.
    """

    tau: np.ndarray
    t: np.ndarray
    q: np.ndarray  # shape (samples, dim)
    p: np.ndarray
    p_t: np.ndarray
    meta: dict = field(default_factory=dict)
    q_rate: Optional[np.ndarray] = None
    p_rate: Optional[np.ndarray] = None
    p_t_rate: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau must be strictly increasing")
        if np.any(np.diff(self.t) <= 0):
            raise GaugeError("t must be strictly increasing along a trajectory")

    def __len__(self) -> int:
        return len(self.tau)

    def __getitem__(self, i) -> PhaseState:
        return PhaseState(self.q[i], self.p[i], self.t[i], self.p_t[i], self.tau[i])

    @property
    def samples(self) -> list:
        return [self[i] for i in range(len(self))]


# --- models -----------------------------------------------------------------

def quadratic_model(mass: float = 1.0, potential=None, label: str = "quadratic") -> LagrangianModel:
    """``L = m v^2 / 2 - V(q, t)``."""
    V = potential if potential is not None else (lambda q, t: 0.0)
    return LagrangianModel(
        dim=1,
        lagrangian=lambda q, v, t: 0.5 * mass * float(v @ v) - V(q, t),
        momenta=lambda q, v, t: mass * v,
        label=label,
    )


def free_particle(mass: float = 1.0) -> LagrangianModel:
    return quadratic_model(mass, label="free")


def harmonic_oscillator(mass: float = 1.0, omega: float = 1.0) -> LagrangianModel:
    k = mass * omega**2
    return quadratic_model(mass, lambda q, t: 0.5 * k * float(q @ q), label="harmonic")


def relativistic_particle(constants: PhysicalConstants, potential=None) -> LagrangianModel:
    """``L = -m c sqrt(c^2 - v^2) - V(q, t)``."""
    m, c = constants.mass, constants.c
    V = potential if potential is not None else (lambda q, t: 0.0)

    def lagrangian(q, v, t):
        return -m * c * np.sqrt(c**2 - float(v @ v)) - V(q, t)

    def momenta(q, v, t):
        return m * c * v / np.sqrt(c**2 - float(v @ v))

    return LagrangianModel(1, lagrangian, momenta, label="relativistic", speed_limit=c)


def identity_gauge(tau_min: float, tau_max: float) -> GaugeFunction:
    return GaugeFunction(lambda s: s, lambda s: np.ones_like(s), tau_min, tau_max, "identity")


def power_gauge(power: float, tau_min: float, tau_max: float) -> GaugeFunction:
    return GaugeFunction(
        lambda s: np.asarray(s) ** power,
        lambda s: power * np.asarray(s) ** (power - 1),
        tau_min,
        tau_max,
        f"tau^{power:g}",
    )


def exponential_gauge(tau_min: float, tau_max: float) -> GaugeFunction:
    return GaugeFunction(lambda s: np.expm1(s), lambda s: np.exp(s), tau_min, tau_max, "exp(tau)-1")


# --- Legendre machinery -----------------------------------------------------

def legendre_momenta(model: LagrangianModel, q, v, t) -> np.ndarray:
    q, v = _vec(q), _vec(v)
    if model.momenta is not None:
        p = _vec(model.momenta(q, v, float(t)))
        if not np.all(np.isfinite(p)):
            raise ValueError(f"non-finite momenta at v={v}")
        return p
    return _central_gradient(lambda w: model.L(q, w, t), v, LEGENDRE_STEP)


def velocity_jacobian(model: LagrangianModel, q, v, t) -> np.ndarray:
    """``d^2 L / dv dv`` by central differences of the momenta."""
    q, v = _vec(q), _vec(v)
    # keep the stencil inside the light cone for speed-limited models
    room = np.inf if model.speed_limit is None else 0.25 * (model.speed_limit - np.linalg.norm(v))
    cols = []
    for i in range(v.size):
        h = min(LEGENDRE_STEP * (1.0 + abs(v[i])), room)
        e = np.zeros_like(v)
        e[i] = h
        p = [legendre_momenta(model, q, v + s * e, t) for s in (2, 1, -1, -2)]
        cols.append((-p[0] + 8 * p[1] - 8 * p[2] + p[3]) / (12 * h))
    return np.column_stack(cols)


def invert_velocities(
    model: LagrangianModel, q, p, t, v_guess=None, tol: float = 1e-12, max_iter: int = 50
) -> np.ndarray:
    """Solve ``dL/dv (q, v, t) = p`` for ``v`` by damped Newton iteration.

    Starts from ``v_guess`` or from ``p / m_eff`` with ``m_eff`` the velocity
    Hessian at ``v = 0``.  Raises :class:`ConvergenceError` unless the final
    momentum mismatch is below ``1e-10``.
    """
    q, p = _vec(q), _vec(p)
    if v_guess is None:
        v = np.linalg.solve(velocity_jacobian(model, q, np.zeros_like(p), t), p)
    else:
        v = _vec(v_guess).copy()
    limit = None if model.speed_limit is None else model.speed_limit * (1 - 1e-12)
    if limit is not None and np.linalg.norm(v) >= limit:
        v *= 0.5 * limit / np.linalg.norm(v)

    residual = legendre_momenta(model, q, v, t) - p
    for _ in range(max_iter):
        if np.max(np.abs(residual)) < tol:
            break
        try:
            step = np.linalg.solve(velocity_jacobian(model, q, v, t), residual)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular velocity Hessian at v={v}") from exc
        v_new = v - step
        if limit is not None:
            speed = np.linalg.norm(v_new)
            if speed >= limit:
                # stop halfway to the light cone instead of crossing it
                v_new = v - step * (0.5 * (limit - np.linalg.norm(v)) / np.linalg.norm(step))
        v = v_new
        previous = np.max(np.abs(residual))
        residual = legendre_momenta(model, q, v, t) - p
        # no further progress possible at double precision
        if np.max(np.abs(step)) < 4 * np.finfo(float).eps * (1 + np.max(np.abs(v))):
            break
        # stagnation at the finite-difference noise floor
        if model.momenta is None and np.max(np.abs(residual)) > 0.5 * previous:
            break
    # finite-difference momenta carry round-off of order eps |L| / h
    floor = 1e-10 if model.momenta is not None else 1e-10 * max(1.0, abs(model.L(q, v, t)))
    # near a speed limit one ulp of v can move p by more than 1e-10
    if model.speed_limit is not None:
        stiffness = np.max(np.abs(velocity_jacobian(model, q, v, t)))
        floor = max(floor, 4 * stiffness * np.max(np.spacing(np.abs(v))))
    if not np.max(np.abs(residual)) < floor:
        raise ConvergenceError(
            f"velocity inversion failed at p={p}: momentum mismatch {np.max(np.abs(residual)):.3e}"
        )
    return v


def physical_hamiltonian(model: LagrangianModel, q, p, t, v_guess=None) -> float:
    """``H = p . v - L`` at the velocity that produces momentum ``p``."""
    p = _vec(p)
    v = invert_velocities(model, q, p, t, v_guess=v_guess)
    return float(p @ v) - model.L(q, v, t)


def ri_constraint(model: LagrangianModel, state: PhaseState) -> float:
    """``p_t + H(q, p, t)``: zero on every solution."""
    return state.p_t + physical_hamiltonian(model, state.q, state.p, state.t)


class CanonicalHamiltonian(NamedTuple):
    value: float
    factorization_residual: float


def canonical_hamiltonian_ri(
    model: LagrangianModel, q, qdot, t, tdot, p_t: Optional[float] = None
) -> CanonicalHamiltonian:
    """Canonical Hamiltonian ``p.qdot + p_t tdot - tdot L(q, qdot/tdot, t)``.

    ``p`` is ``dL/dv`` at ``v = qdot/tdot``; ``p_t`` defaults to its on-shell
    value ``L - v . p`` but may be given freely to probe off-shell points.
    The residual compares the value with ``tdot * (p_t + H(q, p, t))``, where
    ``H`` is computed independently through velocity inversion.
    """
    if not tdot > 0:
        raise GaugeError(f"tdot must be positive, got {tdot!r}")
    q, qdot = _vec(q), _vec(qdot)
    v = qdot / tdot
    p = legendre_momenta(model, q, v, t)
    L = model.L(q, v, t)
    if p_t is None:
        p_t = L - float(v @ p)
    value = float(p @ qdot) + p_t * tdot - tdot * L
    # cold start so that H is an independent evaluation
    constraint = p_t + physical_hamiltonian(model, q, p, t)
    return CanonicalHamiltonian(value, abs(value - tdot * constraint))


# --- integration --------------------------------------------------------------

def hamilton_vector_field(model: LagrangianModel, q, p, t, v_guess=None, method: str = "envelope"):
    """Right-hand side ``(dq/dt, dp/dt, dp_t/dt)`` of Hamilton's equations.

    ``method="envelope"`` uses ``dH/dp = v``, ``dH/dq = -dL/dq`` and
    ``dH/dt = -dL/dt`` at the inverted velocity, so that only one velocity
    inversion is needed.  ``method="stencil"`` differentiates the numerical
    ``H`` itself.  Returns the velocity as a fourth item for warm starts.
    """
    q, p = _vec(q), _vec(p)
    v = invert_velocities(model, q, p, t, v_guess=v_guess)
    if method == "envelope":
        dLdq = _central_gradient(lambda x: model.L(x, v, t), q, HAMILTON_STEP)
        dLdt = _central_gradient(lambda s: model.L(q, v, s[0]), np.array([t]), HAMILTON_STEP)[0]
        return v, dLdq, dLdt, v
    if method == "stencil":
        H = lambda qq, pp, tt: physical_hamiltonian(model, qq, pp, tt, v_guess=v)
        dHdp = _central_gradient(lambda x: H(q, x, t), p, HAMILTON_STEP)
        dHdq = _central_gradient(lambda x: H(x, p, t), q, HAMILTON_STEP)
        dHdt = _central_gradient(lambda s: H(q, p, s[0]), np.array([t]), HAMILTON_STEP)[0]
        return dHdp, -dHdq, -dHdt, v
    raise ValueError(f"unknown method {method!r}")


def integrate_physical(
    model: LagrangianModel, q0, v0, t0: float, t1: float, dt: float, method: str = "envelope"
) -> Trajectory:
    """Classical RK4 for ``(q, p, p_t)`` in physical time (gauge ``tau = t``).

    ``p_t`` starts at ``-H(q0, p0, t0)`` and is advanced with
    ``dp_t/dt = -dH/dt``, so the constraint ``p_t + H`` measures the
    integration error rather than holding by construction.
    """
    steps = (t1 - t0) / dt
    if not (dt > 0 and steps > 0 and abs(steps - round(steps)) < 1e-9 * max(1.0, steps)):
        raise ValueError(f"(t1 - t0) must be a positive integer multiple of dt, got {t1 - t0}/{dt}")
    steps = int(round(steps))
    q0, v0 = _vec(q0), _vec(v0)
    if q0.size != model.dim or v0.size != model.dim:
        raise ValueError(f"model {model.label!r} expects dimension {model.dim}")

    p = legendre_momenta(model, q0, v0, t0)
    q = q0.copy()
    p_t = -physical_hamiltonian(model, q0, p, t0, v_guess=v0)
    v = v0
    ts = t0 + dt * np.arange(steps + 1)
    Q = np.empty((steps + 1, model.dim))
    P = np.empty((steps + 1, model.dim))
    PT = np.empty(steps + 1)
    Q[0], P[0], PT[0] = q, p, p_t
    dQ, dP, dPT = np.empty_like(Q), np.empty_like(P), np.empty_like(PT)

    def rhs(qq, pp, tt, guess):
        return hamilton_vector_field(model, qq, pp, tt, v_guess=guess, method=method)

    for n in range(steps):
        t = ts[n]
        k1 = rhs(q, p, t, v)
        dQ[n], dP[n], dPT[n] = k1[0], k1[1], k1[2]
        k2 = rhs(q + 0.5 * dt * k1[0], p + 0.5 * dt * k1[1], t + 0.5 * dt, k1[3])
        k3 = rhs(q + 0.5 * dt * k2[0], p + 0.5 * dt * k2[1], t + 0.5 * dt, k2[3])
        k4 = rhs(q + dt * k3[0], p + dt * k3[1], t + dt, k3[3])
        q = q + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        p = p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        p_t = p_t + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        v = k4[3]
        Q[n + 1], P[n + 1], PT[n + 1] = q, p, p_t

    dQ[-1], dP[-1], dPT[-1], _ = rhs(q, p, ts[-1], v)

    meta = {"model": model.label, "dt": dt, "gauge": "identity", "method": method}
    return Trajectory(ts.copy(), ts, Q, P, PT, meta, dQ, dP, dPT)


def _interpolant(t, values, rates):
    if rates is None:
        return PchipInterpolator(t, values, axis=0)
    return CubicHermiteSpline(t, values, rates, axis=0)


def lift_to_ri(traj: Trajectory, gauge: GaugeFunction, samples: Optional[int] = None) -> Trajectory:
    """Resample ``traj`` on a uniform ``tau`` grid with ``t = g(tau)``.

    Phase-space coordinates are interpolated against ``t``: cubic Hermite
    using the stored Hamilton-flow rates, or monotone cubic (PCHIP) when the
    trajectory carries no rates.  ``t`` itself is ``g(tau)`` exactly.
    """
    t0, t1 = float(traj.t[0]), float(traj.t[-1])
    tau_a, tau_b = gauge.inverse(t0), gauge.inverse(t1)
    samples = len(traj) if samples is None else samples
    tau = np.linspace(tau_a, tau_b, samples)
    if np.any(np.asarray(gauge.g_dot(tau)) <= 0):
        raise GaugeError(f"gauge {gauge.label!r} is not increasing on [{tau_a}, {tau_b}]")
    t = np.clip(np.asarray(gauge.g(tau), dtype=float), t0, t1)
    t[0], t[-1] = t0, t1

    parts = []
    for values, rates in ((traj.q, traj.q_rate), (traj.p, traj.p_rate), (traj.p_t, traj.p_t_rate)):
        spline = _interpolant(traj.t, values, rates)
        parts += [spline(t), None if rates is None else spline.derivative()(t)]
    q, q_rate, p, p_rate, p_t, p_t_rate = parts
    meta = dict(traj.meta, gauge=gauge.label)
    return Trajectory(tau, t, q, p, p_t, meta, q_rate, p_rate, p_t_rate)


def reconstruct_physical(traj: Trajectory) -> Callable[[np.ndarray], np.ndarray]:
    """Eliminate ``tau``: return the interpolant ``t -> q(t)`` (NaN outside the sampled range)."""
    if np.any(np.diff(traj.t) <= 0):
        raise GaugeError("t is not strictly increasing; cannot eliminate tau")
    spline = _interpolant(traj.t, traj.q, traj.q_rate)
    spline.extrapolate = False
    return spline


# --- extended phase space -----------------------------------------------------

def poisson_bracket(f, g, state: PhaseState) -> float:
    """``{f, g}`` on extended phase space with canonical pairs ``(q_A, p_A)`` and ``(t, p_t)``.

    ``f`` and ``g`` are called as ``f(q, p, t, p_t)``.
    """
    dim = state.q.size
    z = np.concatenate([state.q, [state.t], state.p, [state.p_t]])

    def unpack(func):
        return lambda w: func(w[:dim], w[dim + 1 : 2 * dim + 1], w[dim], w[-1])

    df = _central_gradient(unpack(f), z, HAMILTON_STEP)
    dg = _central_gradient(unpack(g), z, HAMILTON_STEP)
    half = dim + 1
    return float(df[:half] @ dg[half:] - df[half:] @ dg[:half])


def relativistic_momenta(v, constants: PhysicalConstants):
    """Canonical ``(p, p_t)`` of the relativistic particle in the gauge ``t = tau``.

    ``p = m c v / sqrt(c^2 - v^2)`` and ``p_t = dL~/d tdot = L - v . p``.
    """
    v = _vec(v)
    m, c = constants.mass, constants.c
    speed2 = float(v @ v)
    if speed2 >= c**2:
        raise SuperluminalError(f"|v| = {np.sqrt(speed2)} is not below c = {c}")
    root = np.sqrt(c**2 - speed2)
    p = m * c * v / root
    p_t = -m * c * root - float(v @ p)
    return p, p_t


def ri_relativistic_lagrangian(xdot, tdot: float, constants: PhysicalConstants) -> float:
    """``-m c tdot sqrt(c^2 - xdot^2 / tdot^2)``."""
    xdot = _vec(xdot)
    return -constants.mass * constants.c * tdot * np.sqrt(constants.c**2 - float(xdot @ xdot) / tdot**2)


def covariant_relativistic_lagrangian(xdot, tdot: float, constants: PhysicalConstants) -> float:
    """``-m c sqrt(eta_{mu nu} xdot^mu xdot^nu)`` with signature ``(+, -, -, -)``."""
    xdot = _vec(xdot)
    interval = (constants.c * tdot) ** 2 - float(xdot @ xdot)
    return -constants.mass * constants.c * np.sqrt(interval)

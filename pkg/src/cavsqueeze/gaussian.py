"""Holstein-Primakoff quadrature dynamics and closed-form squeezing.

For a strongly x-polarized collective spin the transverse components map to
canonical quadratures X = Sy / sqrt(S), P = Sz / sqrt(S) with [X, P] = i.
Their means and covariance obey the linear Langevin system

    d<v>/dt = G <v> + drive
    dSigma/dt = G Sigma + Sigma G^T + D,     D = eta * I

with drift G = Omega0 [[0, 1], [-1, 0]] - 2 S kappa0 [[0, 1], [0, 0]] - eta I.
The shear enters with a negative sign, so the positive coupling
alpha = 2 S kappa0 t produces X_out = X_in - alpha P_in.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from .errors import ConvergenceError, IntegrationError, ParameterError
from .squeezing import SqueezingResult, min_quadrature, to_db

RTOL = 1e-10
ATOL = 1e-12
R0_WARN = 0.2


@dataclass(frozen=True, eq=False)
class GaussianSpinState:
    mean: np.ndarray
    cov: np.ndarray
    sx_fraction: float = 1.0

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ParameterError("covariance must be symmetric")
        cov = (cov + cov.T) / 2
        for a in (mean, cov):
            a.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def css(cls):
        return cls(np.zeros(2), np.eye(2) / 2, 1.0)

    def symplectic_eigenvalue(self):
        return math.sqrt(max(np.linalg.det(self.cov), 0.0))

    def squeezing(self, protocol=""):
        """Wineland parameter 2 min Var(X_theta) / (<Sx>/S)^2."""
        v_min, theta, iso = min_quadrature(self.cov)
        return SqueezingResult(
            xi2=2 * v_min / self.sx_fraction ** 2,
            theta=theta,
            variance=2 * v_min,
            protocol=protocol,
            isotropic=iso,
            meta={"sx_fraction": self.sx_fraction},
        )


@dataclass(frozen=True, eq=False)
class DriftSpec:
    omega0: float = 0.0
    twist: float = 0.0
    decay: float = 0.0
    drive: tuple = (0.0, 0.0)

    @property
    def matrix(self):
        return drift_matrix_from(self.omega0, self.twist, self.decay)

    @property
    def protocol(self):
        if self.omega0 == 0:
            return "OAT"
        if math.isclose(self.omega0, self.twist / 2, rel_tol=1e-12):
            return "TAT"
        return "custom"

    @classmethod
    def from_effective(cls, eff, N, protocol="OAT", rotation_rate=None, r0_correction=True):
        """Drift for ``protocol`` built from :class:`EffectiveParams`.

        With ``r0_correction`` the twist is renormalised to kappa0 / (1 + r0^2);
        the cavity-decay cross term is neglected, which warns for r0 > 0.2.
        """
        S = N / 2
        kappa = eff.kappa0 / (1 + eff.r0 ** 2) if r0_correction else eff.kappa0
        if eff.r0 > R0_WARN:
            warnings.warn(f"r0 = {eff.r0:.3g} is not small; the neglected cavity-decay term matters",
                          RuntimeWarning, stacklevel=2)
        protocol = protocol.upper()
        if protocol == "OAT":
            omega0 = 0.0
        elif protocol == "TAT":
            omega0 = S * kappa
        elif protocol == "CUSTOM":
            omega0 = rotation_rate or 0.0
        else:
            raise ParameterError(f"unknown protocol {protocol!r}", field="protocol")
        root_s = math.sqrt(S)
        return cls(omega0=omega0, twist=2 * S * kappa, decay=eff.eta,
                   drive=(-root_s * eff.phi0, -root_s * eff.eta))


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    diffusion: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))

    @classmethod
    def from_decay(cls, eta):
        # sqrt(2 eta) F with <F F> = delta(t - t') / 2
        return cls(eta * np.eye(2))

    @classmethod
    def none(cls):
        return cls(np.zeros((2, 2)))


def drift_matrix_from(omega0, twist, eta):
    return (omega0 * np.array([[0.0, 1.0], [-1.0, 0.0]])
            - twist * np.array([[0.0, 1.0], [0.0, 0.0]])
            - eta * np.eye(2))


def drift_matrix(omega0, S, kappa0, eta):
    """Drift G for rotation ``omega0``, twist ``2 S kappa0`` and decay ``eta``."""
    return drift_matrix_from(omega0, 2 * S * kappa0, eta)


def homogeneous_solution(drift, t, full_output=False):
    """exp(G t) in closed form for the OAT and TAT drifts.

    Any other drift falls back to a numerical matrix exponential; with
    ``full_output`` the method used ("OAT", "TAT" or "expm") is returned too.
    """
    alpha = drift.twist * t
    damp = math.exp(-drift.decay * t)
    protocol = drift.protocol
    if protocol == "OAT":
        A = damp * np.array([[1.0, -alpha], [0.0, 1.0]])
        method = "OAT"
    elif protocol == "TAT":
        ch, sh = math.cosh(alpha / 2), math.sinh(alpha / 2)
        A = damp * np.array([[ch, -sh], [-sh, ch]])
        method = "TAT"
    else:
        A = expm(drift.matrix * t)
        method = "expm"
    return (A, method) if full_output else A


def _unpack(y):
    mean = y[:2]
    cov = np.array([[y[2], y[3]], [y[3], y[4]]])
    return mean, cov


def trajectory(state, drift, noise, times, rtol=RTOL, atol=ATOL):
    """Propagate mean and covariance, returning the state at each of ``times``.

    ``times`` must be increasing and start at or after 0; the initial state
    sits at t = 0.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ParameterError("times must be a non-empty increasing sequence starting at t >= 0")
    if np.min(np.linalg.eigvalsh(state.cov)) < -1e-12:
        raise ParameterError("initial covariance is not positive semidefinite")
    G = drift.matrix
    b = np.asarray(drift.drive, dtype=float)
    D = np.asarray(noise.diffusion, dtype=float)

    def rhs(_, y):
        mean, cov = _unpack(y)
        dmean = G @ mean + b
        dcov = G @ cov + cov @ G.T + D
        return [dmean[0], dmean[1], dcov[0, 0], dcov[0, 1], dcov[1, 1]]

    y0 = [*state.mean, state.cov[0, 0], state.cov[0, 1], state.cov[1, 1]]
    t_end = float(times[-1])
    if t_end == 0:
        return [state for _ in times]
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=times,
                    rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegrationError(f"covariance integration failed at t = {sol.t[-1]:.6g}: {sol.message}")
    out = []
    for k, t in enumerate(sol.t):
        mean, cov = _unpack(sol.y[:, k])
        out.append(GaussianSpinState(mean, cov, state.sx_fraction * math.exp(-drift.decay * t)))
    return out


def propagate(state, drift, noise, t, rtol=RTOL, atol=ATOL):
    if t == 0:
        return state
    return trajectory(state, drift, noise, [t], rtol, atol)[-1]


# --- closed forms ------------------------------------------------------------

def _check_eta0(eta0):
    if not 0 <= eta0 < 1:
        raise ParameterError(f"eta0 must lie in [0, 1), got {eta0!r}", field="eta0")


def _oat_variance(alpha, eta0):
    a2 = alpha * alpha
    shear = 1 - 2 * eta0 / 3
    cross = 1 - eta0 / 2
    return 1 + a2 / 2 * shear - math.sqrt(shear * shear * a2 * a2 / 4 + cross * cross * a2)


def _oat_angle(alpha, eta0):
    # the drift shear is negative, so the signed coupling entering the angle is -alpha
    if alpha == 0:
        return math.pi / 4
    theta = math.atan((2 - eta0) / (-alpha * (1 - 2 * eta0 / 3))) / 2 + math.pi / 2
    return theta % math.pi


def oat_noisy_covariance(alpha, eta0=0.0):
    """Twice the output covariance of (X, P) to first order in eta0.

    The extremal eigenvalue of this matrix is the optimized OAT variance.
    """
    return np.array([
        [1 + alpha * alpha * (1 - 2 * eta0 / 3), -alpha * (1 - eta0 / 2)],
        [-alpha * (1 - eta0 / 2), 1.0],
    ])


def xi2_oat_noisy(alpha, eta0):
    """Optimized OAT squeezing with optical-pumping decay ``eta0``."""
    _check_eta0(eta0)
    if alpha < 0:
        raise ParameterError("alpha must be non-negative", field="alpha")
    variance = _oat_variance(alpha, eta0)
    meta = {"alpha": alpha, "eta0": eta0}
    if alpha > 0:
        meta["asymptote"] = 1 / alpha ** 2 + eta0 / 3
    return SqueezingResult(
        xi2=variance / (1 - eta0),
        theta=_oat_angle(alpha, eta0),
        variance=variance,
        protocol="OAT",
        isotropic=alpha == 0,
        meta=meta,
    )


def xi2_oat_ideal(alpha):
    return xi2_oat_noisy(alpha, 0.0)


def _tat_squeezed_angle():
    # contracting eigenvector of the TAT drift direction [[0, -1], [-1, 0]]
    w, v = np.linalg.eigh(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    vec = v[:, np.argmin(w)]
    return math.atan2(vec[1], vec[0]) % math.pi


TAT_ANGLE = _tat_squeezed_angle()


def xi2_tat_noisy(alpha, eta0):
    """TAT squeezing of the contracting quadrature with decay ``eta0``."""
    _check_eta0(eta0)
    if alpha < 0:
        raise ParameterError("alpha must be non-negative", field="alpha")
    decay = math.exp(-alpha)
    if eta0 == 0:
        variance = decay
    else:
        variance = (1 - eta0) * decay + eta0 * (1 - (1 - eta0) * decay) / (eta0 + alpha)
    meta = {"alpha": alpha, "eta0": eta0}
    if alpha > 0:
        meta["asymptote"] = eta0 / alpha
    return SqueezingResult(
        xi2=variance / (1 - eta0),
        theta=TAT_ANGLE,
        variance=variance,
        protocol="TAT",
        isotropic=alpha == 0,
        meta=meta,
    )


CLOSED_FORMS = {"OAT": xi2_oat_noisy, "TAT": xi2_tat_noisy}


def closed_form(protocol, alpha, eta0):
    try:
        return CLOSED_FORMS[protocol.upper()](alpha, eta0)
    except KeyError:
        raise ParameterError(f"unknown protocol {protocol!r}", field="protocol") from None


@dataclass(frozen=True)
class BudgetOptimum:
    protocol: str
    eta0: float
    alpha: float
    xi2: float
    variance: float
    objective: str

    @property
    def db(self):
        return to_db(self.xi2 if self.objective == "xi2" else self.variance)


def optimize_over_eta0(d_c, r0, protocol, objective="xi2", eta0_max=0.5, xtol=1e-6):
    """Best squeezing at fixed optical depth, trading coupling against decay.

    The coupling is tied to the decay through alpha = r0 d_c eta0 / 2.  The
    ``objective`` is the Wineland parameter ("xi2", variance divided by
    1 - eta0) or the bare optimized variance ("variance").
    """
    if not d_c > 0:
        raise ParameterError("d_c must be positive", field="d_c")
    if not 0 < r0 < 1:
        raise ParameterError("r0 must lie in (0, 1)", field="r0")
    if objective not in ("xi2", "variance"):
        raise ParameterError(f"unknown objective {objective!r}", field="objective")
    form = CLOSED_FORMS[protocol.upper()]
    lo = 1e-9

    def f(eta0):
        res = form(r0 * d_c * eta0 / 2, eta0)
        return res.xi2 if objective == "xi2" else res.variance

    res = minimize_scalar(f, bounds=(lo, eta0_max), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    if not res.success or not math.isfinite(res.fun):
        raise ConvergenceError(
            f"eta0 optimisation did not converge on [{lo:g}, {eta0_max:g}]: {res.message} "
            f"(last eta0 = {res.x:.6g}, value = {res.fun:.6g})")
    best = form(r0 * d_c * res.x / 2, res.x)
    return BudgetOptimum(protocol.upper(), float(res.x), float(r0 * d_c * res.x / 2),
                         float(best.xi2), float(best.variance), objective)


def oat_budget_limit(r0_dc):
    """Large-coupling OAT limit 3^(1/3) / (r0 d_c)^(2/3) of the optimized variance."""
    return 3 ** (1 / 3) / r0_dc ** (2 / 3)


def tat_budget_limit(r0_dc):
    return 2 / r0_dc


@dataclass(frozen=True)
class SweepRow:
    protocol: str
    alpha: float
    eta0: float
    xi2: float
    theta: float

    @property
    def db(self):
        return to_db(self.xi2)


def _sweep_row(args):
    protocol, alpha, eta0 = args
    res = closed_form(protocol, alpha, eta0)
    return SweepRow(protocol, alpha, eta0, res.xi2, res.theta)


def squeeze_sweep(protocols, alphas, eta0s, jobs=1):
    """Closed-form squeezing on an (alpha, eta0) grid, eta0-major per protocol.

    Rows come back in input order whatever ``jobs`` is.
    """
    alphas = [float(a) for a in alphas]
    eta0s = [float(e) for e in eta0s]
    if not alphas or not eta0s:
        raise ParameterError("sweep grids must be non-empty")
    if isinstance(protocols, str):
        protocols = [protocols]
    tasks = [(p.upper(), a, e) for p in protocols for e in eta0s for a in alphas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [_sweep_row(t) for t in tasks]


def difference_surface(alphas, eta0s):
    """xi2_OAT - xi2_TAT on the grid, shape (len(eta0s), len(alphas))."""
    out = np.empty((len(eta0s), len(alphas)))
    for i, e in enumerate(eta0s):
        for j, a in enumerate(alphas):
            out[i, j] = xi2_oat_noisy(a, e).xi2 - xi2_tat_noisy(a, e).xi2
    return out

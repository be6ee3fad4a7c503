"""Exact collective-spin dynamics in the symmetric (Dicke) subspace.

States are amplitude vectors over the Dicke ladder m = -S, ..., S (ascending),
S = N/2.  Hamiltonians are restricted to

    H = c_x Sx + c_z Sz + c_zz Sz^2

which covers the effective one-axis-twisting Hamiltonian
-chi0 Sz - kappa0 (Sz + Sz^2) and its two-axis-twisting variant with an
added rotation -Omega0 Sx.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .errors import CapacityError, DegeneratePolarizationError, IntegrationError, ParameterError
from .squeezing import SqueezingResult, min_quadrature

MAX_ATOMS = 10_000
NORM_TOL = 1e-9


def magnetic_numbers(N):
    S = N / 2
    return np.arange(N + 1) - S


def _raising_elements(N):
    # <m+1| S+ |m> for m = -S .. S-1
    S = N / 2
    m = magnetic_numbers(N)[:-1]
    return np.sqrt(S * (S + 1) - m * (m + 1))


@functools.lru_cache(maxsize=16)
def spin_operators(N):
    """Sparse collective operators ``Sx, Sy, Sz, Sz2, Sp, Sm`` on the Dicke ladder."""
    m = magnetic_numbers(N)
    sp = _raising_elements(N)
    Sp = sparse.diags(sp, -1, format="csr", dtype=complex)
    Sm = Sp.T.tocsr()
    ops = {
        "Sp": Sp,
        "Sm": Sm,
        "Sx": ((Sp + Sm) / 2).tocsr(),
        "Sy": ((Sp - Sm) / 2j).tocsr(),
        "Sz": sparse.diags(m, 0, format="csr", dtype=complex),
        "Sz2": sparse.diags(m * m, 0, format="csr", dtype=complex),
    }
    for op in ops.values():
        op.data.setflags(write=False)
    return ops


def collective_operator(N, kind):
    """One of ``"Sx", "Sy", "Sz", "Sz2", "Sp", "Sm"`` as a sparse matrix."""
    try:
        return spin_operators(N)[kind]
    except KeyError:
        raise ParameterError(f"unknown operator {kind!r}") from None


@dataclass(frozen=True, eq=False)
class DickeState:
    N: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.N + 1,):
            raise ParameterError(f"expected {self.N + 1} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def S(self):
        return self.N / 2

    @property
    def m(self):
        return magnetic_numbers(self.N)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def expect(self, op):
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))

    def fidelity(self, other):
        return abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2

    def to_json(self):
        payload = {"S": self.S, "amplitudes": [[a.real, a.imag] for a in self.amplitudes]}
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text):
        payload = json.loads(text)
        N = int(round(2 * payload["S"]))
        amps = np.array([complex(re, im) for re, im in payload["amplitudes"]])
        return cls(N, amps)


@dataclass(frozen=True)
class HamiltonianSpec:
    protocol: str
    c_x: float = 0.0
    c_z: float = 0.0
    c_zz: float = 0.0

    @classmethod
    def oat(cls, kappa0, chi0=0.0, linear=True):
        """``-chi0 Sz - kappa0 (Sz + Sz^2)``; ``linear=False`` drops the Sz terms."""
        c_z = -(chi0 + kappa0) if linear else 0.0
        return cls("OAT", 0.0, c_z, -kappa0)

    @classmethod
    def tat(cls, kappa0, S, chi0=0.0, linear=True):
        """OAT plus a rotation ``-Omega0 Sx`` at the two-axis condition Omega0 = S kappa0."""
        base = cls.oat(kappa0, chi0, linear)
        return cls("TAT", -S * kappa0, base.c_z, base.c_zz)

    @classmethod
    def from_effective(cls, eff, N, protocol="OAT", linear=True, rotation_rate=None):
        protocol = protocol.upper()
        if protocol == "OAT":
            return cls.oat(eff.kappa0, eff.chi0, linear)
        if protocol == "TAT":
            return cls.tat(eff.kappa0, N / 2, eff.chi0, linear)
        if protocol == "CUSTOM":
            base = cls.oat(eff.kappa0, eff.chi0, linear)
            return cls("custom", -(rotation_rate or 0.0), base.c_z, base.c_zz)
        raise ParameterError(f"unknown protocol {protocol!r}", field="protocol")

    def matrix(self, N):
        ops = spin_operators(N)
        return self.c_x * ops["Sx"] + self.c_z * ops["Sz"] + self.c_zz * ops["Sz2"]


def _check_capacity(N, max_atoms):
    if int(N) != N or N < 1:
        raise ParameterError(f"atom number must be a positive integer, got {N!r}", field="atom_number")
    if N > max_atoms:
        raise CapacityError(f"N = {N} exceeds the dense Dicke capacity of {max_atoms} atoms")


def css_state(N, max_atoms=MAX_ATOMS):
    """Coherent spin state polarized along +x."""
    _check_capacity(N, max_atoms)
    N = int(N)
    k = np.arange(N + 1)
    log_amp = 0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)) - 0.5 * N * math.log(2)
    return DickeState(N, np.exp(log_amp))


def dicke_basis_state(N, m):
    amps = np.zeros(N + 1, dtype=complex)
    amps[int(round(m + N / 2))] = 1.0
    return DickeState(N, amps)


def rotate_x(state, angle):
    """Rotate about the x axis by ``angle`` (exp(-i angle Sx))."""
    h = HamiltonianSpec("custom", c_x=1.0)
    return evolve(state, h, angle)


@functools.lru_cache(maxsize=8)
def _eigensystem(N, c_x, c_z, c_zz):
    m = magnetic_numbers(N)
    diag = c_z * m + c_zz * m * m
    off = c_x * _raising_elements(N) / 2
    w, V = eigh_tridiagonal(diag, off)
    # residual of H V = V w, the propagator error per unit time
    HV = diag[:, None] * V
    HV[:-1] += off[:, None] * V[1:]
    HV[1:] += off[:, None] * V[:-1]
    residual = float(np.max(np.abs(HV - V * w)))
    w.setflags(write=False)
    V.setflags(write=False)
    return w, V, residual


def evolve(state, h, t, tol=1e-10):
    """Unitary evolution of ``state`` under ``h`` for time ``t``.

    Without an Sx term the evolution is an exact diagonal phase.  Otherwise
    the real tridiagonal Hamiltonian is diagonalised once (cached) and the
    propagator applied spectrally; ``IntegrationError`` is raised if the
    estimated propagator error exceeds ``tol``.
    """
    if t == 0:
        return state
    N = state.N
    psi = state.amplitudes
    if h.c_x == 0:
        m = magnetic_numbers(N)
        out = psi * np.exp(-1j * (h.c_z * m + h.c_zz * m * m) * t)
    else:
        w, V, residual = _eigensystem(N, float(h.c_x), float(h.c_z), float(h.c_zz))
        estimate = abs(t) * residual
        if estimate > tol:
            raise IntegrationError(
                f"spectral propagator error estimate {estimate:.3g} exceeds tolerance {tol:.3g}",
                error_estimate=estimate,
            )
        out = V @ (np.exp(-1j * w * t) * (V.T @ psi))
    drift = abs(np.linalg.norm(out) - np.linalg.norm(psi))
    if drift > NORM_TOL:
        raise IntegrationError(f"norm drifted by {drift:.3g}", error_estimate=drift)
    return DickeState(N, out)


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray
    cov: np.ndarray
    second: np.ndarray

    @property
    def total_spin_sq(self):
        return float(np.trace(self.second))


def moments(state):
    """First moments and symmetrized covariance of (Sx, Sy, Sz)."""
    ops = spin_operators(state.N)
    psi = state.amplitudes
    vs = [ops[k] @ psi for k in ("Sx", "Sy", "Sz")]
    mean = np.array([np.vdot(psi, v).real for v in vs])
    second = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            second[i, j] = second[j, i] = np.vdot(vs[i], vs[j]).real
    cov = second - np.outer(mean, mean)
    return Moments(mean, cov, second)


def _transverse_basis(n):
    e1 = np.cross([0.0, 0.0, 1.0], n)
    if np.linalg.norm(e1) < 1e-12:
        e1 = np.array([1.0, 0.0, 0.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def wineland_xi2(state, threshold=1e-6, protocol=""):
    """Metrological squeezing N min_theta Var(S_theta) / |<S>|^2.

    S_theta = cos(theta) S_1 + sin(theta) S_2 in the plane normal to the mean
    spin; for an x-polarized state S_1 = Sy and S_2 = Sz.
    """
    mom = moments(state)
    length2 = float(mom.mean @ mom.mean)
    N = state.N
    if length2 < threshold * N * N / 4:
        raise DegeneratePolarizationError(
            f"mean spin |<S>|^2 = {length2:.3g} is below {threshold:g} N^2/4; squeezing undefined")
    n = mom.mean / math.sqrt(length2)
    e1, e2 = _transverse_basis(n)
    block = np.array([[e1 @ mom.cov @ e1, e1 @ mom.cov @ e2],
                      [e2 @ mom.cov @ e1, e2 @ mom.cov @ e2]])
    v_min, theta, iso = min_quadrature(block)
    return SqueezingResult(
        xi2=N * v_min / length2,
        theta=theta,
        variance=v_min,
        protocol=protocol,
        isotropic=iso,
        meta={"mean_spin": mom.mean.tolist(), "N": N},
    )


def analytic_sx(S, mu, phi):
    """Closed-form <Sx> of an x-polarized coherent state after twisting."""
    return S * math.cos(mu / 2) ** (2 * S - 1) * math.cos(phi)


def optimal_squeezing(N, protocol="OAT", alpha_max=None, max_atoms=MAX_ATOMS):
    """Minimum Wineland parameter over interaction strength for ideal twisting.

    Uses unit twist rate with no linear Sz terms, so the time axis is the
    coupling alpha = 2 S kappa0 t.  Returns ``(result, alpha_opt)``.
    """
    psi0 = css_state(N, max_atoms)
    S = N / 2
    h = HamiltonianSpec.oat(1.0, linear=False) if protocol.upper() == "OAT" \
        else HamiltonianSpec.tat(1.0, S, linear=False)
    if alpha_max is None:
        alpha_max = 4 * S ** (1 / 3) if protocol.upper() == "OAT" else 2 * math.log(N)

    def objective(log_alpha):
        return wineland_xi2(evolve(psi0, h, math.exp(log_alpha) / (2 * S))).xi2

    res = minimize_scalar(objective, bounds=(math.log(1e-3), math.log(alpha_max)),
                          method="bounded", options={"xatol": 1e-8})
    alpha = math.exp(res.x)
    return wineland_xi2(evolve(psi0, h, alpha / (2 * S)), protocol=h.protocol), alpha

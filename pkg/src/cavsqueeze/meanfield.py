"""Mean-field Maxwell-Bloch integration of the three-level ensemble plus cavity.

Operator products are factorized (first-cumulant closure) and Langevin terms,
which have zero mean, are dropped.  The engine exists to check the
adiabatic-elimination rates kappa0, chi0 and eta on c-number dynamics; it
does not carry second moments.

Collective coherences follow sigma_uv = sum_k |u><v|_k with expectation
N conj(psi_u) psi_v for a product state psi, so sigma12 = Sx + i Sy and
Sz = (sigma11 - sigma22) / 2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import FitError, IntegrationError, ParameterError
from .params import PhysicalParams, derive_effective

TILT_EQUATOR = math.pi / 2
TILT_QUARTER = 2 * math.atan(1 / math.sqrt(3))  # <Sz> = N/4
TRANSIENT_PERIODS = 5.0


@dataclass(frozen=True)
class AtomFieldState:
    sigma11: float
    sigma22: float
    sigma33: float
    sigma12: complex
    sigma13: complex
    sigma23: complex
    epsilon: complex

    def to_vector(self):
        return np.array([self.sigma11, self.sigma22, self.sigma33,
                         self.sigma12.real, self.sigma12.imag,
                         self.sigma13.real, self.sigma13.imag,
                         self.sigma23.real, self.sigma23.imag,
                         self.epsilon.real, self.epsilon.imag])

    @classmethod
    def from_vector(cls, y):
        return cls(float(y[0]), float(y[1]), float(y[2]),
                   complex(y[3], y[4]), complex(y[5], y[6]),
                   complex(y[7], y[8]), complex(y[9], y[10]))

    @property
    def population(self):
        return self.sigma11 + self.sigma22 + self.sigma33

    @property
    def positivity_gap(self):
        """sigma11 sigma22 - |sigma12|^2, non-negative for a physical mean field."""
        return self.sigma11 * self.sigma22 - abs(self.sigma12) ** 2


@dataclass(frozen=True)
class MBConfig:
    params: PhysicalParams
    include_decay: bool = False
    initial_tilt: float = TILT_EQUATOR
    include_rotation: bool = False
    frame_offset: float = 0.0
    adiabatic_start: bool = True
    rtol: float = 1e-9
    samples: int = 401


@dataclass(frozen=True, eq=False)
class MBSeries:
    t: np.ndarray
    sigma11: np.ndarray
    sigma22: np.ndarray
    sigma33: np.ndarray
    sigma12: np.ndarray
    sigma13: np.ndarray
    sigma23: np.ndarray
    epsilon: np.ndarray
    config: MBConfig = field(repr=False, default=None)
    nfev: int = 0

    def __len__(self):
        return len(self.t)

    def state(self, k):
        return AtomFieldState(self.sigma11[k], self.sigma22[k], self.sigma33[k],
                              self.sigma12[k], self.sigma13[k], self.sigma23[k], self.epsilon[k])

    @property
    def population(self):
        return self.sigma11 + self.sigma22 + self.sigma33

    @property
    def sz(self):
        return (self.sigma11 - self.sigma22) / 2

    COLUMNS = ("t", "sigma11", "sigma22", "sigma33", "re_sigma12", "im_sigma12",
               "re_sigma13", "im_sigma13", "re_sigma23", "im_sigma23", "re_epsilon", "im_epsilon")

    def rows(self):
        for k in range(len(self.t)):
            yield (self.t[k], self.sigma11[k], self.sigma22[k], self.sigma33[k],
                   self.sigma12[k].real, self.sigma12[k].imag,
                   self.sigma13[k].real, self.sigma13[k].imag,
                   self.sigma23[k].real, self.sigma23[k].imag,
                   self.epsilon[k].real, self.epsilon[k].imag)

    def to_csv(self, fmt="{:.12g}"):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for row in self.rows():
            writer.writerow([fmt.format(float(v)) for v in row])
        return buf.getvalue()


def initial_state(cfg: MBConfig) -> AtomFieldState:
    """Tilted coherent spin state, optionally dressed by the drive.

    With ``adiabatic_start`` each atom starts in the light-shifted eigenstate
    connected to |1> and the coherences and cavity field take their
    adiabatic values, so no ringing at the detuning is excited.
    """
    p = cfg.params
    N = p.atom_number
    c, s = math.cos(cfg.initial_tilt / 2), math.sin(cfg.initial_tilt / 2)
    omega, g, big, small = p.rabi_frequency, p.cavity_coupling, p.detuning, p.two_photon_detuning
    if cfg.adiabatic_start and omega != 0:
        w, v = np.linalg.eigh(np.array([[0.0, omega / 2], [omega / 2, big]]))
        a, b = v[:, 0] * np.sign(v[0, 0])
    else:
        a, b = 1.0, 0.0
    psi = np.array([c * a, s, c * b], dtype=complex)
    rho = N * np.outer(psi.conj(), psi)
    s11, s22, s33 = rho[0, 0].real, rho[1, 1].real, rho[2, 2].real
    s12, s13, s23 = rho[0, 1], rho[0, 2], rho[1, 2]
    eps = 0j
    if cfg.adiabatic_start:
        # field driven by sigma21, which turns at the light-shifted rate chi0 + 2 kappa0 Sz
        eff = derive_effective(p)
        turn = eff.chi0 + eff.kappa0 * (s11 - s22)
        kap = p.cavity_decay if cfg.include_decay else 0.0
        eps = -g * omega * np.conj(s12) / (2 * big * (small - turn + 0.5j * kap))
        s13 = s13 - g * eps * s12 / big
        s23 = s23 - g * eps * s22 / big
    return AtomFieldState(s11, s22, s33, complex(s12), complex(s13), complex(s23), complex(eps))


def _rhs_factory(cfg: MBConfig):
    p = cfg.params
    g = p.cavity_coupling
    gc = np.conj(g)
    omega = p.rabi_frequency
    lam = cfg.frame_offset
    big = p.detuning - lam
    small = p.two_photon_detuning + lam
    gam = p.atomic_decay if cfg.include_decay else 0.0
    kap = p.cavity_decay if cfg.include_decay else 0.0
    om0 = p.rotation_rate if cfg.include_rotation else 0.0
    dressed = lam != 0

    def rhs(t, y):
        s11, s22, s33 = y[0], y[1], y[2]
        s12 = y[3] + 1j * y[4]
        s13 = y[5] + 1j * y[6]
        s23 = y[7] + 1j * y[8]
        e = y[9] + 1j * y[10]
        om = omega * np.exp(1j * lam * t) if dressed else omega
        omc = np.conj(om)
        s21, s31, s32, ec = s12.conjugate(), s13.conjugate(), s23.conjugate(), e.conjugate()
        sy = s12.imag
        sz = (s11 - s22) / 2

        pump = 1j * om / 2 * s31 - 1j * omc / 2 * s13
        cav = 1j * g * e * s32 - 1j * gc * s23 * ec
        d11 = pump.real + gam * s33 - om0 * sy
        d22 = cav.real + gam * s33 + om0 * sy
        d33 = -pump.real - cav.real - 2 * gam * s33
        d12 = 1j * om / 2 * s32 - 1j * gc * s13 * ec + 1j * om0 * sz
        de = -kap / 2 * e - 1j * gc * s23 + 1j * small * e
        d13 = (-(1j * big + gam) * s13 - 1j * om / 2 * (s11 - s33) - 1j * g * e * s12
               - 1j * om0 / 2 * s23)
        d23 = (-(1j * big + gam) * s23 - 1j * g * e * (s22 - s33) - 1j * om / 2 * s21
               - 1j * om0 / 2 * s13)
        return [d11, d22, d33, d12.real, d12.imag, d13.real, d13.imag,
                d23.real, d23.imag, de.real, de.imag]

    return rhs


def integrate_mb(cfg: MBConfig, t, t_eval=None) -> MBSeries:
    """Integrate the mean-field equations from 0 to ``t``.

    Returns ``cfg.samples`` evenly spaced samples (or the times in ``t_eval``)
    expressed in the base rotating frame regardless of ``cfg.frame_offset``.
    """
    if not t > 0:
        raise ParameterError("integration time must be positive", field="interaction_time")
    p = cfg.params
    y0 = initial_state(cfg).to_vector()
    times = np.linspace(0.0, t, cfg.samples) if t_eval is None else np.asarray(t_eval, float)
    scale = max(p.atom_number, 1.0)
    sol = solve_ivp(_rhs_factory(cfg), (0.0, t), y0, method="DOP853", t_eval=times,
                    rtol=cfg.rtol, atol=cfg.rtol * 1e-3 * scale)
    if sol.status != 0:
        raise IntegrationError(
            f"Maxwell-Bloch integration failed at t = {sol.t[-1]:.6g} s ({sol.message}); "
            "the detuning hierarchy may be too stiff, try a shorter window, a larger rtol "
            "or a frame_offset that reduces the largest detuning")
    y = sol.y
    s13 = y[5] + 1j * y[6]
    s23 = y[7] + 1j * y[8]
    eps = y[9] + 1j * y[10]
    if cfg.frame_offset:
        back = np.exp(-1j * cfg.frame_offset * sol.t)
        s13, s23, eps = s13 * back, s23 * back, eps * back
    return MBSeries(sol.t, y[0], y[1], y[2], y[3] + 1j * y[4], s13, s23, eps,
                    config=cfg, nfev=sol.nfev)


@dataclass(frozen=True)
class RateReport:
    chi_eff: float
    kappa_eff: float
    eta_eff: float
    chi0: float = math.nan
    kappa0: float = math.nan
    eta: float = math.nan
    kappa_light_shift: float = math.nan
    sz: tuple = ()
    rotation_rates: tuple = ()

    def _rel(self, a, b):
        return a / b - 1 if b else math.nan

    @property
    def chi_deviation(self):
        return self._rel(self.chi_eff, self.chi0)

    @property
    def kappa_deviation(self):
        return self._rel(self.kappa_eff, self.kappa0)

    @property
    def eta_deviation(self):
        return self._rel(self.eta_eff, self.eta)

    def to_dict(self):
        return {
            "chi_eff": self.chi_eff, "kappa_eff": self.kappa_eff, "eta_eff": self.eta_eff,
            "chi0": self.chi0, "kappa0": self.kappa0, "eta": self.eta,
            "chi_deviation": self.chi_deviation, "kappa_deviation": self.kappa_deviation,
            "eta_deviation": self.eta_deviation, "kappa_light_shift": self.kappa_light_shift,
            "sz": list(self.sz), "rotation_rates": list(self.rotation_rates),
        }


def _phase_and_decay(series):
    if len(series) < 10:
        raise FitError(f"need at least 10 samples to fit rates, got {len(series)}")
    z = series.sigma12
    if np.any(np.abs(z) == 0):
        raise FitError("sigma12 vanishes; no phase to fit")
    raw = np.angle(z)
    steps = np.abs(np.diff(np.unwrap(raw)))
    if np.any(steps > 0.5 * math.pi):
        raise FitError("phase advances too far between samples to unwrap; sample more densely")
    phase = np.unwrap(raw)
    t = series.t
    rate = -np.polyfit(t, phase, 1)[0]
    decay = -np.polyfit(t, np.log(np.abs(z)), 1)[0]
    return rate, decay


def extract_rates(series_list, params=None) -> RateReport:
    """Fit effective rates from runs at different initial <Sz>.

    The phase of sigma12 turns at chi_eff + 2 kappa_eff <Sz> (the mean-field
    image of -chi0 Sz - kappa0 Sz^2); |sigma12| decays at eta_eff.
    """
    if isinstance(series_list, MBSeries):
        series_list = [series_list]
    rates, decays, szs = [], [], []
    for s in series_list:
        r, d = _phase_and_decay(s)
        rates.append(r)
        decays.append(d)
        szs.append(float(np.mean(s.sz)))
    szs_arr = np.array(szs)
    N = series_list[0].config.params.atom_number if series_list[0].config else 1
    design = np.column_stack([np.ones(len(szs)), 2 * szs_arr / N])
    if len(szs) < 2 or np.linalg.matrix_rank(design, tol=1e-6) < 2:
        raise FitError("rate fit needs runs at two or more distinct <Sz>; design is rank deficient")
    coef, *_ = np.linalg.lstsq(design, np.array(rates), rcond=None)
    chi_eff, kappa_eff = float(coef[0]), float(coef[1]) / N
    eta_eff = float(np.mean(decays))
    extra = {}
    if params is not None:
        eff = derive_effective(params)
        small = params.two_photon_detuning
        shifted = small - eff.chi0
        extra = dict(chi0=eff.chi0, kappa0=eff.kappa0, eta=eff.eta,
                     kappa_light_shift=eff.kappa0 * small / shifted if shifted else math.inf)
    return RateReport(chi_eff, kappa_eff, eta_eff, sz=tuple(szs),
                      rotation_rates=tuple(float(r) for r in rates),
                      **extra)


def default_window(params, periods=5.0):
    eff = derive_effective(params)
    if eff.chi0 == 0:
        raise ParameterError("no drive: the light shift chi0 is zero", field="rabi_frequency")
    return periods / eff.chi0


def measure_rates(params, tilts=(TILT_EQUATOR, TILT_QUARTER), duration=None,
                  include_decay=False, rtol=1e-9, samples=401):
    """Run one integration per tilt and fit the rates; returns ``(report, series)``."""
    duration = default_window(params) if duration is None else duration
    series = [integrate_mb(MBConfig(params, include_decay=include_decay, initial_tilt=tilt,
                                    rtol=rtol, samples=samples), duration)
              for tilt in tilts]
    return extract_rates(series, params), series


def _relative_residual(sim, pred):
    scale = np.max(np.abs(pred)) if pred.size else 0.0
    diff = np.max(np.abs(sim - pred)) if pred.size else 0.0
    if scale == 0:
        return 0.0 if diff == 0 else math.inf
    return float(diff / scale)


def adiabatic_residuals(series, params=None, transient=TRANSIENT_PERIODS, light_shift=False):
    """Largest relative deviation from the adiabatic steady-state expressions.

    Compares sigma13, sigma23 and the cavity field with
    -(Omega sigma11 / 2 + g eps sigma12) / Delta,
    -(Omega sigma21 / 2 + g eps sigma22) / Delta and
    -g* Omega sigma21 / (2 Delta delta), ignoring the first ``transient`` / Delta.
    With ``light_shift`` the field prediction uses delta - (chi0 + 2 kappa0 Sz),
    the detuning the cavity actually sees from the turning coherence.
    """
    p = params if params is not None else series.config.params
    omega, g, big, small = p.rabi_frequency, p.cavity_coupling, p.detuning, p.two_photon_detuning
    keep = series.t >= transient / big
    s11, s22 = series.sigma11[keep], series.sigma22[keep]
    s12 = series.sigma12[keep]
    s21 = s12.conj()
    eps = series.epsilon[keep]
    pred13 = -(omega * s11 / 2 + g * eps * s12) / big
    pred23 = -(omega * s21 / 2 + g * eps * s22) / big
    detuning = small
    if light_shift:
        eff = derive_effective(p)
        detuning = small - (eff.chi0 + eff.kappa0 * (s11 - s22))
    pred_eps = -np.conj(g) * omega * s21 / (2 * big * detuning)
    return {
        "res13": _relative_residual(series.sigma13[keep], pred13),
        "res23": _relative_residual(series.sigma23[keep], pred23),
        "res_eps": _relative_residual(eps, pred_eps),
    }


def scaled_reference(atom_number=1000, reference_atoms=5_000_000, **changes):
    """Reference-set ratios at a smaller atom number with g sqrt(N) held fixed."""
    from .params import reference_params

    ref = reference_params(reference_atoms)
    g = ref.cavity_coupling * math.sqrt(reference_atoms / atom_number)
    p = ref.replace(atom_number=atom_number, cavity_coupling=g)
    return p.replace(**changes) if changes else p

"""Physical inputs and the effective coupling constants derived from them.

All frequencies are angular frequencies in rad/s and times are in seconds.
The effective constants follow from adiabatically eliminating the excited
state and the cavity mode of a Raman-coupled three-level ensemble:

    kappa0 = |Omega|^2 |g|^2 / (4 delta Delta^2)     (cavity-mediated twist)
    chi0   = |Omega|^2 / (4 Delta)                   (ac-Stark shift)
    eta    = chi0 gamma / Delta                      (optical pumping)
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import asdict, dataclass, field, fields

from .errors import ParameterError

# advisory regime thresholds
WEAK_DRIVE_MAX = 0.2          # Omega / Delta
LARGE_DETUNING_MIN = 1e2      # Delta / gamma
TWO_PHOTON_SLACK = 10.0       # delta / (g Omega sqrt(N) / 2 Delta)
SMALL_R0_MAX = 0.2
SMALL_ETA0_MAX = 0.2
LIGHT_SHIFT_MAX = 0.1         # chi0 / delta


@dataclass(frozen=True)
class PhysicalParams:
    rabi_frequency: float
    cavity_coupling: float
    detuning: float
    two_photon_detuning: float
    atomic_decay: float = 0.0
    cavity_decay: float = 0.0
    atom_number: int = 1
    rotation_rate: float = 0.0
    interaction_time: float = 0.0

    def __post_init__(self):
        validate(self)

    @property
    def spin(self):
        return self.atom_number / 2

    def replace(self, **changes):
        values = asdict(self)
        values.update(changes)
        return PhysicalParams(**values)

    def scaled(self, factor):
        """Multiply every rate by ``factor`` and divide the time by it."""
        return self.replace(
            rabi_frequency=self.rabi_frequency * factor,
            cavity_coupling=self.cavity_coupling * factor,
            detuning=self.detuning * factor,
            two_photon_detuning=self.two_photon_detuning * factor,
            atomic_decay=self.atomic_decay * factor,
            cavity_decay=self.cavity_decay * factor,
            rotation_rate=self.rotation_rate * factor,
            interaction_time=self.interaction_time / factor,
        )

    def to_dict(self):
        return asdict(self)


_RATE_FIELDS = ("rabi_frequency", "cavity_coupling", "detuning", "two_photon_detuning",
                "atomic_decay", "cavity_decay", "rotation_rate", "interaction_time")


def validate(p: PhysicalParams):
    for name in _RATE_FIELDS:
        value = getattr(p, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ParameterError(f"{name} must be a finite number, got {value!r}", field=name)
        if value < 0:
            raise ParameterError(f"{name} must be non-negative, got {value!r}", field=name)
    if p.detuning == 0:
        raise ParameterError("detuning must be positive (kappa0, chi0 divide by it)", field="detuning")
    if p.two_photon_detuning == 0:
        raise ParameterError("two_photon_detuning must be positive (kappa0, r0 divide by it)",
                             field="two_photon_detuning")
    if isinstance(p.atom_number, bool) or int(p.atom_number) != p.atom_number or p.atom_number < 1:
        raise ParameterError(f"atom_number must be an integer >= 1, got {p.atom_number!r}",
                             field="atom_number")


@dataclass(frozen=True)
class EffectiveParams:
    kappa0: float
    chi0: float
    eta: float
    eta0: float
    alpha: float
    beta: float
    r0: float
    phi0: float
    d_c: float
    regime_flags: dict = field(default_factory=dict)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class CavityGeometry:
    finesse: float
    free_space_od: float

    @property
    def cavity_od(self):
        return 2 * self.finesse / math.pi * self.free_space_od


def derive_effective(p: PhysicalParams) -> EffectiveParams:
    """Adiabatic-elimination constants and advisory regime flags for ``p``."""
    validate(p)
    omega2 = p.rabi_frequency ** 2
    g2 = p.cavity_coupling ** 2
    big, small = p.detuning, p.two_photon_detuning
    S = p.spin
    t = p.interaction_time

    kappa0 = omega2 * g2 / (4 * small * big ** 2)
    chi0 = omega2 / (4 * big)
    eta = chi0 * p.atomic_decay / big
    phi0 = chi0 + kappa0
    r0 = p.cavity_decay / (2 * small)
    linewidth = 2 * p.atomic_decay
    if linewidth > 0 and p.cavity_decay > 0:
        d_c = 4 * p.atom_number * g2 / (linewidth * p.cavity_decay)
    else:
        d_c = math.inf if g2 > 0 else 0.0

    eta0 = 2 * eta * t
    collective_raman = p.cavity_coupling * p.rabi_frequency * math.sqrt(p.atom_number) / (2 * big)
    flags = {
        "weak_drive": p.rabi_frequency / big < WEAK_DRIVE_MAX,
        "large_detuning": p.atomic_decay == 0 or big / p.atomic_decay > LARGE_DETUNING_MIN,
        "large_two_photon": small > TWO_PHOTON_SLACK * collective_raman,
        "small_r0": r0 < SMALL_R0_MAX,
        "small_eta0": eta0 < SMALL_ETA0_MAX,
        "small_light_shift": chi0 / small < LIGHT_SHIFT_MAX,
    }
    return EffectiveParams(
        kappa0=kappa0,
        chi0=chi0,
        eta=eta,
        eta0=eta0,
        alpha=2 * S * kappa0 * t,
        beta=math.sqrt(S) * phi0 * t,
        r0=r0,
        phi0=phi0,
        d_c=d_c,
        regime_flags=flags,
    )


def coupling_from_od(geom, linewidth, kappa, N):
    """Single-atom coupling from the cavity optical depth.

    Uses ``|g|^2 = linewidth * kappa * d_c / (4 N)``.  ``linewidth`` is the
    full excited-state linewidth; with equal decay ``gamma`` into each ground
    state that is ``2 * gamma``.  ``geom`` is a :class:`CavityGeometry` or the
    cavity optical depth itself.
    """
    d_c = geom.cavity_od if isinstance(geom, CavityGeometry) else float(geom)
    if N is None or N <= 0:
        raise ParameterError("atom number must be positive", field="atom_number")
    if d_c < 0 or linewidth < 0 or kappa < 0:
        raise ParameterError("optical depth and rates must be non-negative")
    return math.sqrt(linewidth * kappa * d_c / (4 * N))


def alpha_from_od(r0, d_c, eta0):
    return r0 * d_c * eta0 / 2


# --- config literals -------------------------------------------------------

_UNITS = {
    "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "pi": math.pi,
}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_IMPLICIT_MUL = re.compile(
    r"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![\deE.])\s*(?=[A-Za-z(])|\)\s*(?=[\w(.]))")


def parse_quantity(value, symbols=None):
    """Evaluate a numeric config literal such as ``"2pi*100kHz"`` or ``"1e4*g"``.

    Plain numbers pass through unchanged.  Strings may use + - * / **, the
    constant ``pi``, SI-prefixed ``Hz`` and second units, and any names given
    in ``symbols``.  A number followed directly by a name multiplies it.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        return value
    if not isinstance(value, str):
        raise ValueError(f"not a number: {value!r}")
    names = dict(_UNITS)
    names.update(symbols or {})
    text = _IMPLICIT_MUL.sub(r"\1*", value.strip().replace("µ", "u"))
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {value!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in names:
                raise ValueError(f"unknown name {node.id!r} in {value!r}")
            return names[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow) and abs(right) > 100:
                raise ValueError(f"exponent {right} too large in {value!r}")
            return _BINOPS[type(node.op)](left, right)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(f"unsupported expression in {value!r}")

    return ev(tree)


_FIELD_ORDER = ("cavity_coupling", "rabi_frequency", "detuning", "two_photon_detuning",
                "atomic_decay", "cavity_decay", "rotation_rate", "interaction_time", "atom_number")


def params_from_mapping(raw) -> PhysicalParams:
    """Build :class:`PhysicalParams` from a config mapping.

    Unknown keys are ignored so that engine options can live in the same file.
    Rates may be written relative to the coupling with the symbol ``g``.
    Every bad field is reported in one :class:`ParameterError` whose ``field``
    is the list of offending names.
    """
    values, problems = {}, []
    known = {f.name for f in fields(PhysicalParams)}
    required = {"rabi_frequency", "cavity_coupling", "detuning", "two_photon_detuning"}
    for name in required - raw.keys():
        problems.append((name, "missing"))
    symbols = {}
    for name in _FIELD_ORDER:
        if name not in raw:
            continue
        try:
            values[name] = float(parse_quantity(raw[name], symbols))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            problems.append((name, str(exc)))
            continue
        if name == "cavity_coupling":
            symbols["g"] = values[name]
    if "atom_number" in values:
        n = values["atom_number"]
        if n != int(n):
            problems.append(("atom_number", f"must be an integer, got {n}"))
        else:
            values["atom_number"] = int(n)
    if problems:
        message = "; ".join(f"{k}: {v}" for k, v in problems)
        raise ParameterError(message, field=[k for k, _ in problems])
    try:
        return PhysicalParams(**{k: v for k, v in values.items() if k in known})
    except ParameterError as exc:
        raise ParameterError(str(exc), field=[exc.field]) from None


def reference_params(atom_number=5_000_000):
    """Parameter estimate for a warm-vapour cavity experiment.

    g = (2 pi) 100 kHz, gamma = kappa = 100 g, Omega = 1e4 g, Delta = 1e5 g,
    delta = 500 g and t = 0.3 us.
    """
    g = 2 * math.pi * 100e3
    return PhysicalParams(
        rabi_frequency=1e4 * g,
        cavity_coupling=g,
        detuning=1e5 * g,
        two_photon_detuning=5e2 * g,
        atomic_decay=1e2 * g,
        cavity_decay=1e2 * g,
        atom_number=atom_number,
        rotation_rate=0.0,
        interaction_time=0.3e-6,
    )

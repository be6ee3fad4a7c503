"""``squeeze`` command line: parameter derivation, simulations, sweeps and figures.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Errors are
reported on stderr as a JSON object with ``error``, ``message`` and ``fields``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import dicke, figures, gaussian, meanfield
from .errors import (CapacityError, ConvergenceError, DegeneratePolarizationError, FitError,
                     IntegrationError, ParameterError)
from .params import derive_effective, params_from_mapping

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SIG = 12


class ConfigError(Exception):
    def __init__(self, message, fields=()):
        super().__init__(message)
        self.fields = list(fields)


# --- serialization -----------------------------------------------------------

def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{SIG}g}"


def _clean(obj):
    """Round floats to 12 significant digits and make the tree JSON-safe."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{SIG}g}")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _outdir(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {str(out)!r} is not writable: {exc.strerror}",
                          ["output_dir"]) from None
    return out


def _write(out, name, text):
    (out / name).write_text(text, encoding="utf-8")
    return str(out / name)


# --- config ------------------------------------------------------------------

def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}", ["config"]) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno <= len(text.splitlines()) else ""
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}: {line.strip()!r}",
                          ["config"]) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", ["config"])
    return raw


_FIELDS = ("rabi_frequency", "cavity_coupling", "detuning", "two_photon_detuning",
           "atomic_decay", "cavity_decay", "atom_number", "rotation_rate", "interaction_time")


def _merged_config(args):
    raw = load_config(args.config) if args.config else {}
    for name in _FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    return raw


def _params(raw):
    return params_from_mapping(raw)


def _parse_range(text, name):
    """``start:stop:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError("need step > 0 and stop >= start")
            return figures.grid(start, stop, step)
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --{name} range {text!r}: {exc}", [name]) from None


# --- commands ----------------------------------------------------------------

def _flag_summary(eff):
    lines = [f"alpha = {eff.alpha:.4g}, eta0 = {eff.eta0:.4g}, r0 = {eff.r0:.4g}, d_c = {eff.d_c:.4g}"]
    for name, ok in sorted(eff.regime_flags.items()):
        lines.append(f"  {name:<18} {'ok' if ok else 'VIOLATED'}")
    return "\n".join(lines)


def cmd_derive(args):
    p = _params(_merged_config(args))
    eff = derive_effective(p)
    report = {"physical": p.to_dict(), "effective": eff.to_dict()}
    text = dumps(report)
    if args.output:
        out = _outdir(args.output)
        _write(out, "effective.json", text)
    else:
        sys.stdout.write(text)
    print(_flag_summary(eff), file=sys.stderr)


def _option(raw, key, default, kind):
    value = raw.get(key, default)
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}", [key]) from None


def _require_time(p):
    if not p.interaction_time > 0:
        raise ConfigError("interaction_time must be positive to simulate", ["interaction_time"])


def _protocol(raw, p):
    proto = str(raw.get("protocol", "custom" if p.rotation_rate else "OAT")).upper()
    if proto not in ("OAT", "TAT", "CUSTOM"):
        raise ConfigError(f"protocol must be OAT, TAT or custom, got {proto!r}", ["protocol"])
    return proto


def _sim_dicke(raw, p, out):
    _require_time(p)
    proto = _protocol(raw, p)
    eff = derive_effective(p)
    ideal = _option(raw, "ideal", False, bool)
    points = _option(raw, "points", 101, int)
    N = p.atom_number
    psi0 = dicke.css_state(N)
    if ideal:
        h = (dicke.HamiltonianSpec.oat(eff.kappa0, linear=False) if proto == "OAT"
             else dicke.HamiltonianSpec.from_effective(eff, N, proto, False, p.rotation_rate))
    else:
        h = dicke.HamiltonianSpec.from_effective(eff, N, proto, True, p.rotation_rate)
    times = np.linspace(0.0, p.interaction_time, points)
    rows, results = [], []
    for t in times:
        psi = dicke.evolve(psi0, h, t)
        alpha = 2 * p.spin * eff.kappa0 * t
        try:
            res = dicke.wineland_xi2(psi, protocol=h.protocol)
        except DegeneratePolarizationError:
            # no mean spin at this instant: squeezing is undefined, keep scanning
            sx, sy, sz = dicke.moments(psi).mean
            rows.append([t, alpha, sx, sy, sz, math.nan, math.nan, math.nan])
            results.append(None)
            continue
        sx, sy, sz = res.meta["mean_spin"]
        rows.append([t, alpha, sx, sy, sz, res.xi2, res.db, res.theta])
        results.append(res)
    defined = [k for k, r in enumerate(results) if r is not None]
    report = {"engine": "dicke", "protocol": h.protocol, "ideal": ideal,
              "final": results[-1].to_dict() if results[-1] else None,
              "effective": eff.to_dict()}
    if defined:
        best = min(defined, key=lambda k: results[k].xi2)
        report["best"] = {"t": times[best], "alpha": rows[best][1], **results[best].to_dict()}
    header = ["t", "alpha", "sx", "sy", "sz", "xi2", "dB", "theta"]
    return header, rows, report


def _sim_gaussian(raw, p, out):
    _require_time(p)
    proto = _protocol(raw, p)
    eff = derive_effective(p)
    points = _option(raw, "points", 101, int)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        drift = gaussian.DriftSpec.from_effective(eff, p.atom_number, proto, p.rotation_rate)
    noise = gaussian.NoiseSpec.from_decay(eff.eta) if p.atomic_decay else gaussian.NoiseSpec.none()
    times = np.linspace(0.0, p.interaction_time, points)
    states = gaussian.trajectory(gaussian.GaussianSpinState.css(), drift, noise, times)
    rows = []
    for t, st in zip(times, states):
        res = st.squeezing(proto)
        rows.append([t, drift.twist * t, st.mean[0], st.mean[1], st.cov[0, 0], st.cov[0, 1],
                     st.cov[1, 1], res.xi2, res.db, res.theta])
    final = states[-1].squeezing(drift.protocol)
    report = {
        "engine": "gaussian", "protocol": drift.protocol,
        "alpha": eff.alpha, "eta0": eff.eta0, "r0": eff.r0,
        "final": final.to_dict(),
        "squeezing_over_10dB": final.db > 10,
        "regime_flags": eff.regime_flags,
        "warnings": [str(w.message) for w in caught],
    }
    if drift.protocol in ("OAT", "TAT") and eff.eta0 < 1:
        report["closed_form"] = gaussian.closed_form(drift.protocol, eff.alpha, eff.eta0).to_dict()
    header = ["t", "alpha", "mean_x", "mean_p", "cov_xx", "cov_xp", "cov_pp", "xi2", "dB", "theta"]
    return header, rows, report


def _sim_meanfield(raw, p, out):
    cfg = meanfield.MBConfig(
        p,
        include_decay=_option(raw, "include_decay", False, bool),
        initial_tilt=_option(raw, "initial_tilt", meanfield.TILT_EQUATOR, float),
        include_rotation=_option(raw, "include_rotation", False, bool),
        frame_offset=_option(raw, "frame_offset", 0.0, float),
        rtol=_option(raw, "rtol", 1e-9, float),
        samples=_option(raw, "points", 401, int),
    )
    duration = p.interaction_time
    if not duration > 0:
        raise ConfigError("interaction_time must be positive to simulate", ["interaction_time"])
    series = meanfield.integrate_mb(cfg, duration)
    N = p.atom_number
    pop = series.population
    rows = list(series.rows())
    report = {
        "engine": "meanfield",
        "max_excited_fraction": float(np.max(series.sigma33)) / N,
        "population_drift": float(np.max(np.abs(pop - pop[0]))) / N,
        "final": dict(zip(series.COLUMNS, rows[-1])),
        "nfev": series.nfev,
    }
    if p.rabi_frequency and _option(raw, "rates", False, bool):
        rates, _ = meanfield.measure_rates(p, duration=duration, include_decay=cfg.include_decay,
                                           rtol=cfg.rtol, samples=cfg.samples)
        report["rates"] = rates.to_dict()
    return list(series.COLUMNS), rows, report


ENGINES = {"dicke": _sim_dicke, "gaussian": _sim_gaussian, "meanfield": _sim_meanfield}


def cmd_simulate(args):
    raw = _merged_config(args)
    p = _params(raw)
    out = _outdir(args.output)
    header, rows, report = ENGINES[args.engine](raw, p, out)
    _write(out, f"{args.engine}_series.csv", csv_text(header, rows))
    _write(out, f"{args.engine}_report.json", dumps(report))
    final = report.get("final") or {}
    if "xi2" in final:
        print(f"{args.engine}: final xi2 = {final['xi2']:.6g} ({final['dB']:.3f} dB)", file=sys.stderr)


def cmd_sweep(args):
    alphas = _parse_range(args.alpha, "alpha")
    eta0s = _parse_range(args.eta0, "eta0")
    if any(not 0 <= e < 1 for e in eta0s):
        raise ConfigError("eta0 values must lie in [0, 1)", ["eta0"])
    if any(a < 0 for a in alphas):
        raise ConfigError("alpha values must be non-negative", ["alpha"])
    protocols = ["OAT", "TAT"] if args.protocol == "both" else [args.protocol.upper()]
    rows = gaussian.squeeze_sweep(protocols, alphas, eta0s, jobs=args.jobs)
    text = csv_text(["protocol", "alpha", "eta0", "xi2", "dB", "theta"],
                    [[r.protocol, r.alpha, r.eta0, r.xi2, r.db, r.theta] for r in rows])
    if args.output:
        _write(_outdir(args.output), "sweep.csv", text)
    else:
        sys.stdout.write(text)


def cmd_figure(args):
    out = _outdir(args.output)
    builder = figures.FIGURES[args.figure_id]
    header, rows, svg = builder(jobs=args.jobs) if args.figure_id == "2a" else builder()
    _write(out, f"fig{args.figure_id}.csv", csv_text(header, rows))
    _write(out, f"fig{args.figure_id}.svg", svg)


# --- entry point ---------------------------------------------------------------

def _add_param_flags(parser):
    for name in _FIELDS:
        parser.add_argument("--" + name.replace("_", "-"), dest=name, default=None,
                            help=f"override {name} (accepts unit literals such as 2pi*100kHz)")


def build_parser():
    parser = argparse.ArgumentParser(prog="squeeze", description="Cavity spin-squeezing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("derive-params", help="effective constants and regime flags as JSON")
    d.add_argument("-c", "--config")
    d.add_argument("-o", "--output", help="directory for effective.json (default: stdout)")
    _add_param_flags(d)
    d.set_defaults(func=cmd_derive)

    s = sub.add_parser("simulate", help="run one engine and write a time series and report")
    s.add_argument("--engine", required=True, choices=sorted(ENGINES))
    s.add_argument("-c", "--config")
    s.add_argument("-o", "--output", required=True)
    _add_param_flags(s)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="closed-form squeezing over an (alpha, eta0) grid")
    w.add_argument("--protocol", choices=["oat", "tat", "both"], default="both")
    w.add_argument("--alpha", default="0:8:0.1", help="start:stop:step or comma list")
    w.add_argument("--eta0", default="0:0.3:0.05", help="start:stop:step or comma list")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("-o", "--output", help="directory for sweep.csv (default: stdout)")
    w.set_defaults(func=cmd_sweep)

    f = sub.add_parser("figure", help="reproduce a performance figure as CSV and SVG")
    f.add_argument("figure_id", choices=sorted(figures.FIGURES))
    f.add_argument("-o", "--output", required=True)
    f.add_argument("--jobs", type=int, default=1)
    f.set_defaults(func=cmd_figure)
    return parser


def _fail(code, exc, fields):
    if isinstance(fields, str):
        fields = [fields]
    payload = {"error": type(exc).__name__, "message": str(exc),
               "fields": [f for f in (fields or []) if f is not None]}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc, exc.fields)
    except (ParameterError, CapacityError) as exc:
        return _fail(EXIT_CONFIG, exc, getattr(exc, "field", None))
    except (IntegrationError, ConvergenceError, FitError, DegeneratePolarizationError) as exc:
        return _fail(EXIT_NUMERIC, exc, None)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end; emits CSV or JSON only."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from cevspec import arbitrage as arb
from cevspec import cev_spec as cs
from cevspec import specfun as sf
from cevspec.errors import (
    CaseUncovered, CevError, ConfigInvalid, ExtensionNotApplicable, IntegerA,
    NoConvergence, NonIntegrableCoefficient, ParameterInvalid, ParameterPole,
    SingularGamma, WrongEndpoint, WrongRegime, ArgumentZero, NonPolynomialInput,
)
from cevspec.laguerre_spec import Extension, laguerre_spectrum
from cevspec.mc_sim import (
    SimConfig, absorption_probability, doob_law_check, martingale_defect, simulate,
)
from cevspec.params import ModelParams, classify_regime, derive_params
from cevspec.sl_core import cev_weight

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3

FIGURE_GAMMAS = (0.5, 1.0, 1.5, 1.8, 2.5, 3.0, 3.5, 4.0)
CHART_GAMMAS = tuple(round(0.25 * k, 2) for k in range(1, 17))

MODEL_DEFAULTS = {"mu": 1.0, "sigma": 1.0, "r": 0.0, "x0": 1.0}
SIM_DEFAULTS = {"paths": 100_000, "dt": 1e-3, "T": 1.0, "seed": 0,
                "measure": "Physical", "scheme": "EulerMaruyamaAbsorbed"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------ formatting

def _num(v):
    """Plain floats print as shortest round-trip decimals; non-finite as strings."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isfinite(f):
            return f
        return "inf" if f > 0 else ("-inf" if f < 0 else "nan")
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    return _num(obj)


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False) + "\n"


def dump_csv(header, rows, meta: Optional[dict] = None) -> str:
    buf = io.StringIO()
    if meta is not None:
        buf.write("# " + json.dumps(_clean(meta), sort_keys=True) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _cell(v) -> str:
    v = _num(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else str(v)


def parse_grid(text: str, log: bool = False) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"grid must be lo:hi:steps, got {text!r}")
    if steps < 1 or not hi > lo:
        raise UsageError(f"grid needs hi > lo and steps >= 1, got {text!r}")
    if log:
        if lo <= 0:
            raise UsageError("log grid needs lo > 0")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def parse_window(text: Optional[str]):
    if text is None:
        return None
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"window must be lo:hi, got {text!r}")
    return (lo, hi)


# ------------------------------------------------------------- arguments

def _model_args(p):
    p.add_argument("--gamma", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--x0", type=float)


def _sim_args(p):
    p.add_argument("--paths", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--measure", choices=["Physical", "RiskNeutral"])
    p.add_argument("--scheme", choices=["EulerMaruyamaAbsorbed", "MilsteinAbsorbed"])


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cevspec", description="CEV spectral toolkit")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, model=True, fmt=("json", "csv")):
        p = sub.add_parser(name)
        if model:
            _model_args(p)
        p.add_argument("--config")
        p.add_argument("--format", choices=list(fmt))
        p.add_argument("--out")
        return p

    p = add("spectrum")
    p.add_argument("--theta")
    p.add_argument("--count", type=int)
    p.add_argument("--window")

    p = add("eigenfunction")
    p.add_argument("--theta")
    p.add_argument("--n", type=int)
    p.add_argument("--Lambda", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--grid")
    p.add_argument("--log-grid", action="store_true", default=None)

    add("classify")

    p = add("weight")
    p.add_argument("--grid")

    p = add("doob")
    p.add_argument("--grid")

    p = add("laguerre-spectrum", model=False)
    p.add_argument("--a", type=float)
    p.add_argument("--theta")
    p.add_argument("--count", type=int)
    p.add_argument("--window")

    p = add("simulate")
    _sim_args(p)

    p = add("martingale-defect")
    _sim_args(p)

    p = add("absorption")
    _sim_args(p)
    p.add_argument("--t", type=float)

    p = add("doob-check")
    _sim_args(p)
    p.add_argument("--misweight", action="store_true", default=None)

    p = add("specfun-eval", model=False)
    p.add_argument("--fn", choices=["phi", "psi", "laguerre", "weyl", "log_gamma"])
    p.add_argument("--Lambda", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--y", type=float)

    p = add("figures", model=False, fmt=("json",))
    p.add_argument("--which", choices=["weights", "regime_chart", "all"])
    p.add_argument("--out-dir")
    return top


def _merge_config(ns: argparse.Namespace):
    """Config values fill options not given on the command line."""
    if not ns.config:
        return
    try:
        data = json.loads(Path(ns.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {ns.config}: {e}")
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    for key, val in data.items():
        attr = key.replace("-", "_")
        if not hasattr(ns, attr) or attr in ("command", "config"):
            raise UsageError(f"unknown config key {key!r} for {ns.command}")
        if getattr(ns, attr) is None:
            setattr(ns, attr, val)


def _fill(ns, defaults: dict):
    for k, v in defaults.items():
        if getattr(ns, k, None) is None:
            setattr(ns, k, v)


def _model(ns) -> ModelParams:
    _fill(ns, MODEL_DEFAULTS)
    if ns.gamma is None:
        raise UsageError("--gamma is required")
    return ModelParams(mu=ns.mu, sigma=ns.sigma, gamma=ns.gamma, r=ns.r, x0=ns.x0)


def _sim_config(ns) -> SimConfig:
    _fill(ns, SIM_DEFAULTS)
    return SimConfig(n_paths=ns.paths, dt=ns.dt, T=ns.T, seed=ns.seed,
                     measure=ns.measure, scheme=ns.scheme)


def _ext(ns) -> Extension:
    return Extension.parse("inf" if ns.theta is None else ns.theta)


# -------------------------------------------------------------- commands

def cmd_spectrum(ns):
    m = _model(ns)
    ext = _ext(ns)
    count = 6 if ns.count is None and ns.window is None else ns.count
    pts = cs.cev_spectrum(m, ext, count=count, window=parse_window(ns.window))
    if count is not None:
        pts = pts[:count]
    meta = {"params": m.as_dict(), "theta": ext.label(), "count": count}
    if ns.format == "csv":
        return dump_csv(["index", "lambda", "Lambda", "sector"],
                        [(p.index if p.index is not None else "", p.lam, p.laguerre_Lambda,
                          p.sector.value) for p in pts], meta)
    out = dict(meta)
    out["eigenvalues"] = [p.lam for p in pts]
    out["points"] = [p.as_dict() for p in pts]
    if m.gamma > 2.0 and ext.is_infinite:
        out["positive_sector"] = cs.positive_sector(m)
    return dump_json(out)


def cmd_eigenfunction(ns):
    m = _model(ns)
    ext = _ext(ns)
    x = parse_grid(ns.grid or "0.05:20:200", log=bool(ns.log_grid))
    if ns.Lambda is not None:
        ef = cs.psi_branch(m, ns.Lambda, c=1.0 if ns.c is None else ns.c)
    else:
        n = 0 if ns.n is None else ns.n
        if ext.is_infinite:
            ef = cs.poly_branch(m, n)
        else:
            pts = cs.cev_spectrum(m, ext, count=n + 1)
            ef = cs.cev_eigenfunction(m, ext, pts[n], c=1.0 if ns.c is None else ns.c)
    j = ef.jet(x)
    p, dp = j.v, j.d1
    res = ef.residual(x)
    meta = {"params": m.as_dict(), "theta": ext.label(), "recipe": ef.recipe.value,
            "lambda": ef.lam, "Lambda": ef.y_spec.Lambda}
    if ns.format == "json":
        out = dict(meta)
        out.update({"x": x, "p": p, "p_prime": dp, "scaled_residual": res,
                    "max_scaled_residual": float(np.max(res))})
        return dump_json(out)
    return dump_csv(["x", "p", "p_prime", "scaled_residual"], zip(x, p, dp, res), meta)


def classify_record(m: ModelParams) -> dict:
    reg = classify_regime(m.gamma)
    rep = arb.arbitrage_report(m)
    out = {"params": m.as_dict(), "derived": derive_params(m).as_dict(),
           "regime": reg.as_dict(), "arbitrage": rep.as_dict()}
    if m.gamma != 2.0:
        sector = cs.positive_sector(m)
        out["positive_sector"] = sector
        out["flags"] = {
            "positive_eigenvalue_sector": sector["positive"] > 0,
            "integrable_forward_modes": m.gamma < 1.0,
        }
    else:
        out["positive_sector"] = None
        out["flags"] = {"positive_eigenvalue_sector": False, "integrable_forward_modes": False}
    out["stationary"] = cs.stationary_report(m)
    return out


def cmd_classify(ns):
    m = _model(ns)
    rec = classify_record(m)
    if ns.format == "csv":
        reg, rep = rec["regime"], rec["arbitrage"]
        return dump_csv(
            ["gamma", "band", "endpoint_zero", "endpoint_infinity", "attainable_zero",
             "mechanism", "forward_mode_visibility", "delta"],
            [(m.gamma, reg["band"], reg["endpoint_zero"], reg["endpoint_infinity"],
              rep["attainable_zero"], rep["mechanism"], rep["forward_mode_visibility"] or "",
              rep["delta"])], {"params": m.as_dict()})
    return dump_json(rec)


def cmd_weight(ns):
    m = _model(ns)
    x = parse_grid(ns.grid or "0.1:5:100")
    w = cev_weight(derive_params(m), m.gamma, x)
    meta = {"params": m.as_dict()}
    if ns.format == "json":
        return dump_json({**meta, "x": x, "w": w})
    return dump_csv(["x", "w"], zip(x, w), meta)


def cmd_doob(ns):
    m = _model(ns)
    x = parse_grid(ns.grid or "0.1:5:100")
    if np.any(x <= 0):
        raise UsageError("doob grid must be positive")
    h, hp = arb.harmonic_h(m, x)
    add = arb.doob_drift(m, x)
    meta = {"params": m.as_dict()}
    if ns.format == "json":
        return dump_json({**meta, "x": x, "h": h, "h_prime": hp, "drift_addon": add})
    return dump_csv(["x", "h", "h_prime", "drift_addon"], zip(x, h, hp, add), meta)


def cmd_laguerre_spectrum(ns):
    if ns.a is None:
        raise UsageError("--a is required")
    ext = _ext(ns)
    count = ns.count
    if count is None and ns.window is None:
        count = 6
    window = parse_window(ns.window)
    if window is None and not ext.is_infinite:
        window = cs.default_lambda_window(ns.a, ext.theta, count)
    spec = laguerre_spectrum(ns.a, ext, window=window, count=count)
    pts = list(spec)[:count] if count is not None else list(spec)
    meta = {"a": ns.a, "theta": ext.label(), "count": count}
    if ns.format == "csv":
        return dump_csv(["index", "Lambda", "source"],
                        [(p.index if p.index is not None else "", p.value, p.source.value)
                         for p in pts], meta)
    return dump_json({**meta, "Lambda": [p.value for p in pts],
                      "sources": [p.source.value for p in pts],
                      "sign_changes": spec.sign_changes})


def _mc_meta(m, cfg):
    return {"params": m.as_dict(), "config": cfg.as_dict()}


def cmd_simulate(ns):
    m = _model(ns)
    cfg = _sim_config(ns)
    ens = simulate(m, cfg)
    if ns.format == "csv":
        return dump_csv(["terminal", "absorption_time"],
                        zip(ens.terminal, ["" if math.isnan(t) else t for t in ens.absorption_time]),
                        _mc_meta(m, cfg))
    mean = float(np.mean(ens.terminal))
    se = float(np.std(ens.terminal, ddof=1) / math.sqrt(len(ens.terminal))) if cfg.n_paths > 1 else 0.0
    return dump_json({**_mc_meta(m, cfg), "estimate": mean, "std_error": se,
                      "ci_level": 0.99, "n_paths": cfg.n_paths,
                      "diagnostics": {"absorbed_fraction": float(np.mean(ens.absorbed)),
                                      "clamp_events": ens.clamp_events,
                                      "clamp_fraction": ens.clamp_fraction}})


def _ci_json(m, cfg, est, extra=None):
    out = {**_mc_meta(m, cfg), "estimate": est.point, "std_error": est.std_error,
           "ci_level": est.level, "ci": [est.lo, est.hi], "n_paths": cfg.n_paths,
           "diagnostics": {"note": est.note}}
    if extra:
        out["diagnostics"].update(extra)
    return out


def _ci_out(ns, m, cfg, est, extra=None):
    rec = _ci_json(m, cfg, est, extra)
    if ns.format == "csv":
        return dump_csv(["estimate", "std_error", "ci_level", "ci_lo", "ci_hi", "n_paths"],
                        [(est.point, est.std_error, est.level, est.lo, est.hi, cfg.n_paths)],
                        _mc_meta(m, cfg))
    return dump_json(rec)


def cmd_martingale_defect(ns):
    if ns.measure is None:
        ns.measure = "RiskNeutral"
    m = _model(ns)
    cfg = _sim_config(ns)
    return _ci_out(ns, m, cfg, martingale_defect(m, cfg))


def cmd_absorption(ns):
    m = _model(ns)
    cfg = _sim_config(ns)
    t = cfg.T if ns.t is None else ns.t
    if not t > 0:
        raise UsageError("--t must be > 0")
    est = absorption_probability(m, cfg, t)
    return _ci_out(ns, m, cfg, est, {"t": t})


def cmd_doob_check(ns):
    m = _model(ns)
    cfg = _sim_config(ns)
    res = doob_law_check(m, cfg, misweight=bool(ns.misweight))
    rec = {**_mc_meta(m, cfg), **res.as_dict(), "misweight": bool(ns.misweight)}
    if ns.format == "csv":
        return dump_csv(["ks_statistic", "threshold", "pass"],
                        [(res.ks_statistic, res.threshold, res.passed)], _mc_meta(m, cfg))
    return dump_json(rec)


def cmd_specfun_eval(ns):
    fn = ns.fn
    if fn is None:
        raise UsageError("--fn is required")

    def need(name):
        v = getattr(ns, name)
        if v is None:
            raise UsageError(f"--{name} is required for {fn}")
        return v

    if fn == "phi":
        val = sf.kummer_phi(need("Lambda"), need("b"), need("y"))
    elif fn == "psi":
        val = sf.tricomi_psi(need("Lambda"), need("b"), need("y"))
    elif fn == "laguerre":
        val = sf.laguerre(need("n"), need("a"), need("y"))
    elif fn == "weyl":
        val = sf.weyl_m(need("a"), need("Lambda"))
    else:
        lg, sgn = sf.log_gamma(need("y"))
        val = {"log_abs": lg, "sign": sgn}
    inputs = {k: getattr(ns, k) for k in ("Lambda", "b", "a", "n", "y") if getattr(ns, k) is not None}
    if ns.format == "csv":
        if isinstance(val, dict):
            return dump_csv(["log_abs", "sign"], [(val["log_abs"], val["sign"])], {"fn": fn, "inputs": inputs})
        return dump_csv(["value"], [(float(val),)], {"fn": fn, "inputs": inputs})
    return dump_json({"fn": fn, "inputs": inputs, "value": val})


def regime_chart(mu: float = 1.0, sigma: float = 1.0) -> list:
    out = []
    for g in CHART_GAMMAS:
        m = ModelParams(mu=mu, sigma=sigma, gamma=g)
        rec = classify_record(m)
        out.append({"gamma": g, "band": rec["regime"]["band"],
                    "endpoint_zero": rec["regime"]["endpoint_zero"],
                    "endpoint_infinity": rec["regime"]["endpoint_infinity"],
                    "arbitrage": rec["arbitrage"],
                    "positive_sector": rec["positive_sector"],
                    **rec["flags"]})
    return out


def emit_figure_data(which: str, out_dir: Path, mu: float = 1.0, sigma: float = 1.0) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if which in ("weights", "all"):
        x = np.linspace(0.05, 5.0, 200)
        for g in FIGURE_GAMMAS:
            m = ModelParams(mu=mu, sigma=sigma, gamma=g)
            w = cev_weight(derive_params(m), g, x)
            path = out_dir / f"weights_gamma_{g}.csv"
            path.write_text(dump_csv(["x", "w"], zip(x, w), {"params": m.as_dict()}), newline="\n")
            written.append(path.name)
    if which in ("regime_chart", "all"):
        path = out_dir / "regime_chart.json"
        path.write_text(dump_json(regime_chart(mu, sigma)), newline="\n")
        written.append(path.name)
    return {"which": which, "files": written, "series": len([f for f in written if f.startswith("weights")])}


def cmd_figures(ns):
    which = ns.which or "all"
    out_dir = Path(ns.out_dir or "figure_data")
    return dump_json(emit_figure_data(which, out_dir))


COMMANDS = {
    "spectrum": cmd_spectrum, "eigenfunction": cmd_eigenfunction,
    "classify": cmd_classify, "weight": cmd_weight, "doob": cmd_doob,
    "laguerre-spectrum": cmd_laguerre_spectrum, "simulate": cmd_simulate,
    "martingale-defect": cmd_martingale_defect, "absorption": cmd_absorption,
    "doob-check": cmd_doob_check, "specfun-eval": cmd_specfun_eval,
    "figures": cmd_figures,
}

DEFAULT_FORMAT = {"weight": "csv", "doob": "csv", "eigenfunction": "csv"}

INPUT_ERRORS = (ParameterInvalid, ConfigInvalid, WrongRegime, ExtensionNotApplicable,
                SingularGamma, ParameterPole, IntegerA, WrongEndpoint, CaseUncovered,
                ArgumentZero, NonPolynomialInput, ValueError)
NUMERIC_ERRORS = (NoConvergence, NonIntegrableCoefficient, ArithmeticError)


def _fail(kind: str, exc) -> None:
    msg = str(exc).replace("\n", " ")
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": msg},
                                sort_keys=True) + "\n")


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        _merge_config(ns)
        if ns.format is None:
            ns.format = DEFAULT_FORMAT.get(ns.command, "json")
        text = COMMANDS[ns.command](ns)
    except UsageError as e:
        _fail("usage", e)
        return EXIT_INPUT
    except NUMERIC_ERRORS as e:
        _fail("numerical", e)
        return EXIT_NUMERIC
    except INPUT_ERRORS as e:
        _fail("input", e)
        return EXIT_INPUT
    if ns.out:
        Path(ns.out).write_text(text, newline="\n")
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line driver: dressed tables, correlation lengths, low-T scans, free-fermion checks, sweeps.

Exit codes: 0 success, 2 invalid regime or input, 3 solver failure, 4 I/O error.
Failures print a one-line JSON error record on stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .contour import ContourError
from .dressed import FredholmError, dressed_quantities
from .freefermion import SingularityError, ff_constant, ff_exponent_rate
from .lowt import DEFAULT_M, DEFAULT_NMAX, minimize_im_delta0, write_table
from .model import DomainError, ModelParams, RegimeError
from .nlie import DEFAULT_TOL, ConvergenceError
from .spectral import dominant_corrlen, to_record

log = logging.getLogger("xxzcorr")

COMMANDS = ("dressed", "corrlen", "lowt-scan", "ff-oracle", "sweep")
CORRLEN_COLUMNS = ["delta", "h", "J", "T", "t_over_m", "q", "vF", "Zq", "ReP", "ImP", "ReE", "ImE",
                   "ReDelta", "ImDelta", "decay_rate", "residual", "monodromy_abs", "iterations"]
SWEEP_COLUMNS = CORRLEN_COLUMNS + ["status", "error"]
SCHEMA = "v1"

# hard defaults; config file values override these and flags override both
DEFAULTS = {
    "J": 1.0, "delta": 0.5, "h": 1.0, "T": 0.1, "t_over_m": 0.0,
    "order": 64, "tol": DEFAULT_TOL, "nmax": DEFAULT_NMAX, "M": DEFAULT_M,
    "points": 41, "lam_max": 3.0, "format": None, "out": None, "jobs": None,
    "deltas": None, "hs": None, "Ts": None, "t_over_ms": None, "no_meta": False,
}
LIST_KEYS = ("deltas", "hs", "Ts", "t_over_ms")


class UsageError(ValueError):
    pass


def _float_list(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def load_config(path: str) -> dict:
    """Flat key=value text or a single JSON object; keys mirror flag names."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise UsageError("config JSON must be a single object")
    else:
        raw = {}
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            raw[k.strip()] = v.strip()
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key == "command":
            out[key] = v
            continue
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {k!r}")
        out[key] = v
    return out


def _coerce(cfg: dict) -> dict:
    for k in ("J", "delta", "h", "T", "t_over_m", "tol", "lam_max"):
        cfg[k] = float(cfg[k])
    for k in ("order", "nmax", "M", "points"):
        cfg[k] = int(cfg[k])
    if cfg["jobs"] is not None:
        cfg["jobs"] = int(cfg["jobs"])
    for k in LIST_KEYS:
        if cfg[k] is not None:
            cfg[k] = _float_list(cfg[k])
    if isinstance(cfg["no_meta"], str):
        cfg["no_meta"] = cfg["no_meta"].lower() in ("1", "true", "yes")
    return cfg


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.command == "ff-oracle":
        cfg["delta"] = 0.0
    if args.config:
        filecfg = load_config(args.config)
        if filecfg.pop("command", args.command) != args.command:
            raise UsageError("config file command does not match the subcommand")
        cfg.update(filecfg)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            cfg[k] = v
    cfg = _coerce(cfg)
    for k in ("J", "tol", "order", "nmax", "M", "points", "lam_max"):
        if not cfg[k] > 0:
            raise UsageError(f"{k} must be positive")
    if cfg["jobs"] is not None and cfg["jobs"] < 1:
        raise UsageError("jobs must be positive")
    if cfg["format"] not in (None, "csv", "json"):
        raise UsageError("format must be csv or json")
    return cfg


def _params(cfg: dict, **over) -> ModelParams:
    d = {k: cfg[k] for k in ("J", "delta", "h", "T")}
    d.update(over)
    return ModelParams(**d)


def _meta_lines(cfg: dict, command: str) -> list[str]:
    if cfg["no_meta"]:
        return []
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return [f"# generated {stamp} by xxzcorr {__version__} ({command})"]


def _write_csv(cfg, command, schema_note, columns, rows) -> str:
    buf = io.StringIO()
    for line in _meta_lines(cfg, command):
        buf.write(line + "\n")
    buf.write(f"# {command} {SCHEMA}: {schema_note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _write_json(cfg, command, payload) -> str:
    if not cfg["no_meta"]:
        payload = dict(payload, meta={"generated": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                                      "version": __version__, "command": command})
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit(cfg, text: str) -> None:
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def corrlen_row(params: ModelParams, t_over_m: float, order: int = 64, tol: float = DEFAULT_TOL) -> dict:
    dressed = dressed_quantities(params, N=order)
    obs = dominant_corrlen(params, t_over_m=t_over_m, dressed=dressed, tol=tol)
    return _row(params, dressed, obs)


def _row(params, dressed, obs) -> dict:
    d = obs.diagnostics
    return {
        "delta": params.delta, "h": params.h, "J": params.J, "T": params.T, "t_over_m": obs.t_over_m,
        "q": dressed.q, "vF": dressed.vF, "Zq": dressed.Zq,
        "ReP": obs.P.real, "ImP": obs.P.imag, "ReE": obs.E.real, "ImE": obs.E.imag,
        "ReDelta": obs.delta.real, "ImDelta": obs.delta.imag, "decay_rate": obs.decay_rate,
        "residual": float(d["residual"]), "monodromy_abs": float(d["monodromy_abs"]),
        "iterations": int(d["iterations"]),
    }


def cmd_dressed(cfg) -> str:
    params = _params(cfg)
    D = dressed_quantities(params, N=cfg["order"])
    lam = np.linspace(-cfg["lam_max"], cfg["lam_max"], cfg["points"])
    cols = {"lam": lam, "eps": D.eps(lam).real, "eps_deriv": D.eps_deriv(lam).real,
            "Z": D.Z(lam).real, "p_deriv": D.p_deriv(lam).real, "p": D.p(lam).real}
    rows = [{k: float(v[i]) for k, v in cols.items()} for i in range(len(lam))]
    head = {"J": params.J, "delta": params.delta, "h": params.h, "q": D.q, "vF": D.vF, "Zq": D.Zq,
            "residual": D.residual}
    if (cfg["format"] or "csv") == "json":
        return _write_json(cfg, "dressed", dict(head, table=rows))
    note = " ".join(f"{k}={_fmt(float(v))}" for k, v in head.items())
    return _write_csv(cfg, "dressed", note, list(cols), rows)


def cmd_corrlen(cfg) -> str:
    params = _params(cfg)
    dressed = dressed_quantities(params, N=cfg["order"])
    obs = dominant_corrlen(params, t_over_m=cfg["t_over_m"], dressed=dressed, tol=cfg["tol"])
    if (cfg["format"] or "json") == "json":
        return _write_json(cfg, "corrlen", to_record(obs, params))
    return _write_csv(cfg, "corrlen", ",".join(CORRLEN_COLUMNS), CORRLEN_COLUMNS,
                      [_row(params, dressed, obs)])


def cmd_lowt(cfg) -> str:
    params = _params(cfg)
    D = dressed_quantities(params, N=cfg["order"])
    res = minimize_im_delta0(D, cfg["t_over_m"], cfg["nmax"], cfg["M"])
    summary = {"argmin": res.config.encode(), "value": [res.value.real, res.value.imag],
               "ties": [c.encode() for c in res.ties], "count": res.count,
               "target": math.pi / (2 * D.vF * D.Zq ** 2), "vF": D.vF, "Zq": D.Zq,
               "t_over_m": cfg["t_over_m"], "nmax": cfg["nmax"], "M": cfg["M"]}
    if (cfg["format"] or "csv") == "json":
        return _write_json(cfg, "lowt-scan", summary)
    buf = io.StringIO()
    for line in _meta_lines(cfg, "lowt-scan"):
        buf.write(line + "\n")
    buf.write(f"# lowt-scan {SCHEMA}: argmin={summary['argmin']} count={res.count} ties={len(res.ties)}\n")
    write_table(buf, res)
    return buf.getvalue()


def cmd_ff(cfg) -> str:
    if cfg["delta"] != 0:
        raise UsageError("ff-oracle is defined at delta = 0 only")
    params = _params(cfg)
    rate = ff_exponent_rate(params)
    C = ff_constant(params)
    row = corrlen_row(params, 0.0, cfg["order"], cfg["tol"])
    rec = {"J": params.J, "h": params.h, "T": params.T, "rate": rate, "ReC": C.real, "ImC": C.imag,
           "ImDelta_nlie": row["ImDelta"], "abs_diff": abs(row["ImDelta"] + rate),
           "rel_diff": abs(row["ImDelta"] + rate) / abs(rate), "monodromy_abs": row["monodromy_abs"]}
    if (cfg["format"] or "csv") == "json":
        return _write_json(cfg, "ff-oracle", rec)
    return _write_csv(cfg, "ff-oracle", "rate is the exponent per site; ImDelta_nlie should equal -rate",
                      list(rec), [rec])


def _sweep_point(job):
    params_dict, t_over_m, order, tol = job
    base = dict(params_dict, t_over_m=t_over_m)
    try:
        row = corrlen_row(ModelParams(**params_dict), t_over_m, order, tol)
        row.update(status="ok", error="")
        return row
    except Exception as exc:  # recorded, never dropped
        return dict(base, status="failed", error=f"{type(exc).__name__}: {exc}".replace("\n", " "))


def cmd_sweep(cfg) -> str:
    axes = {k: cfg[k] or [cfg[k[:-1]]] for k in ("deltas", "hs", "Ts", "t_over_ms")}
    if not any(cfg[k] for k in LIST_KEYS):
        raise UsageError("sweep needs at least one axis (--deltas, --hs, --Ts, --t-over-ms)")
    if any(len(v) == 0 for v in axes.values()):
        raise UsageError("sweep axes must be non-empty")
    jobs = [({"J": cfg["J"], "delta": d, "h": h, "T": T}, tm, cfg["order"], cfg["tol"])
            for d, h, T, tm in itertools.product(axes["deltas"], axes["hs"], axes["Ts"], axes["t_over_ms"])]
    n = cfg["jobs"] or os.cpu_count() or 1
    if n == 1 or len(jobs) == 1:
        rows = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(jobs))) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    if (cfg["format"] or "csv") == "json":
        return _write_json(cfg, "sweep", {"records": rows})
    return _write_csv(cfg, "sweep", ",".join(SWEEP_COLUMNS), SWEEP_COLUMNS, rows)


HANDLERS = {"dressed": cmd_dressed, "corrlen": cmd_corrlen, "lowt-scan": cmd_lowt,
            "ff-oracle": cmd_ff, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value or JSON file; flags override its keys")
    common.add_argument("--J", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--h", type=float)
    common.add_argument("--T", type=float)
    common.add_argument("--t-over-m", dest="t_over_m", type=float)
    common.add_argument("--order", type=int, help="Gauss-Legendre order of the linear equations")
    common.add_argument("--tol", type=float, help="NLIE residual tolerance")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--no-meta", dest="no_meta", action="store_true", help="omit the timestamp header")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="xxzcorr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    d = sub.add_parser("dressed", parents=[common], help="table of dressed functions")
    d.add_argument("--points", type=int)
    d.add_argument("--lam-max", dest="lam_max", type=float)
    sub.add_parser("corrlen", parents=[common], help="dominant correlation length")
    lt = sub.add_parser("lowt-scan", parents=[common], help="low-T combinatorial minimizer")
    lt.add_argument("--nmax", type=int)
    lt.add_argument("--M", type=int)
    sub.add_parser("ff-oracle", parents=[common], help="free-fermion rate and constant vs NLIE")
    sw = sub.add_parser("sweep", parents=[common], help="grid of corrlen points")
    sw.add_argument("--deltas")
    sw.add_argument("--hs")
    sw.add_argument("--Ts")
    sw.add_argument("--t-over-ms", dest="t_over_ms")
    sw.add_argument("--jobs", type=int)
    return p


def _fail(code: int, exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        text = HANDLERS[args.command](cfg)
        _emit(cfg, text)
    except (ConvergenceError, ContourError, FredholmError, SingularityError) as exc:
        return _fail(3, exc)
    except (RegimeError, DomainError, UsageError, ValueError) as exc:
        return _fail(2, exc)
    except OSError as exc:
        return _fail(4, exc)
    except (ArithmeticError, RuntimeError) as exc:
        return _fail(3, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())

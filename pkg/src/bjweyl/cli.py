"""Configuration ingestion, command dispatch and deterministic tabular output.

Config files are JSON; unknown keys are rejected with their location.  Rows
serialize with 17 significant digits (lossless double round-trip), complex
entries as re/im column pairs, and a mandatory versioned header line, so two
runs with the same config produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .blockcore import JacobiParams, ParamsError, make_family, validate_params
from .measure import DiscreteMatrixMeasure, cauchy_transform, quadrature_measure
from .seminorms import SeminormKind
from .solutions import compute_PQ
from .subordinacy import HorizonExhausted, jl_function, nonsub_diagnostic
from .transfer import lo_residual, omega_identity_residual, transfer_nstep, transfer_step
from .weyl import boundary_scan, weyl_resolvent, weyl_schur

__all__ = ["RunConfig", "ConfigError", "parse_config", "run", "main"]

SCHEMA_LINE = "# bjweyl-schema v1"

COMMANDS = (
    "validate", "polys", "transfer-check", "weyl", "weyl-scan",
    "measure", "cauchy-check", "jl", "nonsub", "report",
)

_TOP_KEYS = {
    "family", "command", "N", "z", "lambda", "eps_ladder", "t_grid",
    "k_max", "n_max", "n_rule_C", "seed", "format", "out", "seminorm",
    "cap", "measure_in",
}
_FAMILY_KEYS = {
    "free": set(),
    "constant": {"A", "B"},
    "diagonal": {"components"},
    "periodic_modulated": {"A_period", "B_period", "growth"},
    "explicit": {"A", "B"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    family: dict = field(default_factory=lambda: {"name": "free", "d": 1})
    command: str = "weyl"
    N: int = 60
    z: complex = 2j
    lambda_grid: tuple = (-2.0, 2.0, 9)  # min, max, steps
    eps_ladder: tuple = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
    t_grid: tuple = (64.0, 32)  # max, steps
    k_max: int = 10
    n_max: int = 20
    n_rule_C: float = 50.0
    seed: int = 0
    fmt: str = "csv"
    out: str | None = None
    seminorm: str = "matrix_norm"
    cap: float = 1e3
    measure_in: str | None = None

    def params(self) -> JacobiParams:
        knobs = {k: v for k, v in self.family.items() if k not in ("name", "d")}
        try:
            return make_family(self.family["name"], int(self.family["d"]), **knobs)
        except ParamsError as exc:
            raise ConfigError(f"family: {exc}") from exc

    def lambdas(self) -> np.ndarray:
        lo, hi, steps = self.lambda_grid
        return np.linspace(lo, hi, int(steps))

    def ts(self) -> np.ndarray:
        t_max, steps = self.t_grid
        return np.linspace(t_max / int(steps), t_max, int(steps))


def _reject_unknown(section: dict, allowed: set, where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {where}{key!r}")


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"syntax error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "")
    cfg = RunConfig()
    if "family" in raw:
        fam = dict(raw["family"])
        name = fam.get("name")
        if name not in _FAMILY_KEYS:
            raise ConfigError(f"family.name must be one of {sorted(_FAMILY_KEYS)}")
        if name == "diagonal" and "d" not in fam and "components" in fam:
            fam["d"] = len(fam["components"])
        if "d" not in fam:
            raise ConfigError("family.d is required")
        _reject_unknown(fam, _FAMILY_KEYS[name] | {"name", "d"}, "family.")
        cfg.family = fam
    if "command" in raw:
        if raw["command"] not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}")
        cfg.command = raw["command"]
    if "N" in raw:
        cfg.N = int(raw["N"])
        if cfg.N < 1:
            raise ConfigError("N must be >= 1")
    if "z" in raw:
        re, im = raw["z"]
        cfg.z = complex(float(re), float(im))
    if "lambda" in raw:
        sec = raw["lambda"]
        _reject_unknown(sec, {"min", "max", "steps"}, "lambda.")
        cfg.lambda_grid = (float(sec["min"]), float(sec["max"]), int(sec["steps"]))
        if cfg.lambda_grid[2] < 1:
            raise ConfigError("lambda.steps must be >= 1")
    if "eps_ladder" in raw:
        ladder = tuple(float(e) for e in raw["eps_ladder"])
        if not ladder or any(e <= 0 for e in ladder) or any(
                b >= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("eps_ladder must be positive and strictly decreasing")
        cfg.eps_ladder = ladder
    if "t_grid" in raw:
        sec = raw["t_grid"]
        _reject_unknown(sec, {"max", "steps"}, "t_grid.")
        cfg.t_grid = (float(sec["max"]), int(sec["steps"]))
    for key, attr, conv in (("k_max", "k_max", int), ("n_max", "n_max", int),
                            ("n_rule_C", "n_rule_C", float), ("seed", "seed", int),
                            ("cap", "cap", float), ("out", "out", str),
                            ("measure_in", "measure_in", str)):
        if key in raw:
            setattr(cfg, attr, conv(raw[key]))
    if cfg.cap <= 0 or cfg.n_rule_C <= 0:
        raise ConfigError("tolerances and caps must be positive")
    if "format" in raw:
        if raw["format"] not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        cfg.fmt = raw["format"]
    if "seminorm" in raw:
        if raw["seminorm"] not in ("matrix_norm", "matrix_minmod"):
            raise ConfigError("seminorm must be matrix_norm or matrix_minmod")
        cfg.seminorm = raw["seminorm"]
    cfg.params()  # semantic gate: family blocks must satisfy the invariants
    return cfg


# ---------------------------------------------------------------------------
# Row rendering
# ---------------------------------------------------------------------------

def _num(x) -> str:
    if x is None or (isinstance(x, str) and x == ""):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _mat_cols(tag: str, d: int) -> list[str]:
    cols = []
    for i in range(d):
        for j in range(d):
            cols += [f"re_{tag}_{i}_{j}", f"im_{tag}_{i}_{j}"]
    return cols


def _mat_vals(row: dict, tag: str, m) -> None:
    d = m.shape[0]
    for i in range(d):
        for j in range(d):
            row[f"re_{tag}_{i}_{j}"] = _num(m[i, j].real)
            row[f"im_{tag}_{i}_{j}"] = _num(m[i, j].imag)


def _blank_mat(row: dict, tag: str, d: int) -> None:
    for i in range(d):
        for j in range(d):
            row[f"re_{tag}_{i}_{j}"] = ""
            row[f"im_{tag}_{i}_{j}"] = ""


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_validate(cfg: RunConfig):
    p = cfg.params()
    try:
        result = validate_params(p, cfg.N - 1)
    except IndexError:
        # families backed by finite lists: validate what exists
        result = {"ok": True, "violations": []}
    fields = ["n", "kind", "value"]
    if result["ok"]:
        return fields, [{"n": "", "kind": "ok", "value": ""}]
    return fields, [{"n": str(v["n"]), "kind": v["kind"], "value": _num(v["value"])}
                    for v in result["violations"]]


def _cmd_polys(cfg: RunConfig):
    p = cfg.params()
    pq = compute_PQ(p, cfg.z, cfg.n_max)
    fields = ["n"] + _mat_cols("P", p.d) + _mat_cols("Q", p.d)
    rows = []
    for n in range(-1, cfg.n_max + 1):
        row = {"n": str(n)}
        _mat_vals(row, "P", pq.P.term(n))
        _mat_vals(row, "Q", pq.Q.term(n))
        rows.append(row)
    return fields, rows


def _cmd_transfer_check(cfg: RunConfig):
    p = cfg.params()
    fields = ["k", "omega_residual", "rinv_residual", "tinv_residual",
              "lo_r1", "lo_r2", "error"]
    rows = []
    eye = np.eye(2 * p.d)
    for k in range(1, cfg.k_max + 1):
        row = {"k": str(k), "error": ""}
        try:
            row["omega_residual"] = _num(omega_identity_residual(p, cfg.z, k))
            nstep = transfer_nstep(p, cfg.z, k)
            scale = max(1.0, np.linalg.norm(nstep["R"], 2)
                        * np.linalg.norm(nstep["R_inv"], 2))
            row["rinv_residual"] = _num(
                np.linalg.norm(nstep["R"] @ nstep["R_inv"] - eye, 2) / scale)
            step = transfer_step(p, cfg.z, k - 1)
            row["tinv_residual"] = _num(
                np.linalg.norm(step["T"] @ step["T_inv"] - eye, 2))
            lo = lo_residual(p, cfg.z, k)
            row["lo_r1"] = _num(lo["r1"])
            row["lo_r2"] = _num(lo["r2"])
        except Exception as exc:
            for col in fields[1:-1]:
                row.setdefault(col, "")
            row["error"] = str(exc)
        rows.append(row)
    return fields, rows


def _cmd_weyl(cfg: RunConfig):
    p = cfg.params()
    fields = (["re_z", "im_z", "N", "route_diff", "herglotz_min_eig"]
              + _mat_cols("W", p.d) + ["error"])
    row = {"re_z": _num(cfg.z.real), "im_z": _num(cfg.z.imag),
           "N": str(cfg.N), "error": ""}
    try:
        schur = weyl_schur(p, cfg.z, cfg.N)
        resolvent = weyl_resolvent(p, cfg.z, cfg.N)
        row["route_diff"] = _num(np.linalg.norm(schur.W - resolvent.W, 2))
        row["herglotz_min_eig"] = _num(schur.diagnostics["herglotz_min_eig"])
        _mat_vals(row, "W", schur.W)
    except Exception as exc:
        row["route_diff"] = row["herglotz_min_eig"] = ""
        _blank_mat(row, "W", p.d)
        row["error"] = str(exc)
    return fields, [row]


def _cmd_weyl_scan(cfg: RunConfig):
    p = cfg.params()
    scan = boundary_scan(p, cfg.lambdas(), np.array(cfg.eps_ladder),
                         n_rule=lambda e: max(1, math.ceil(cfg.n_rule_C / e)))
    fields = (["lambda", "eps", "tr_im"] + _mat_cols("W", p.d)
              + ["label", "rank", "error"])
    rows = []
    for r in scan.rows:
        row = {"lambda": _num(r["lambda"]), "eps": _num(r["eps"]),
               "tr_im": _num(r["tr_im"]) if not math.isnan(r["tr_im"]) else "",
               "label": "", "rank": "", "error": r["error"]}
        if r["W"] is None:
            _blank_mat(row, "W", p.d)
        else:
            _mat_vals(row, "W", r["W"])
        rows.append(row)
    for lam, cls in zip(scan.lambda_grid, scan.classification):
        row = {"lambda": _num(lam), "eps": "", "tr_im": "",
               "label": cls["label"],
               "rank": "" if cls["rank"] is None else str(cls["rank"]),
               "error": ""}
        _blank_mat(row, "W", p.d)
        rows.append(row)
    return fields, rows


def _cmd_measure(cfg: RunConfig):
    p = cfg.params()
    m = quadrature_measure(p, cfg.N)
    fields = ["lambda"] + _mat_cols("w", p.d)
    rows = []
    for lam, w in m.atoms:
        row = {"lambda": _num(lam)}
        _mat_vals(row, "w", w)
        rows.append(row)
    return fields, rows


def _read_measure_csv(path: str, d: int) -> DiscreteMatrixMeasure:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise ConfigError(f"{path}: missing schema header")
        reader = csv.DictReader(fh)
        pairs = []
        for rec in reader:
            w = np.zeros((d, d), dtype=complex)
            for i in range(d):
                for j in range(d):
                    w[i, j] = complex(float(rec[f"re_w_{i}_{j}"]),
                                      float(rec[f"im_w_{i}_{j}"]))
            pairs.append((float(rec["lambda"]), w))
    return DiscreteMatrixMeasure.from_pairs(pairs, d)


def _cmd_cauchy_check(cfg: RunConfig):
    p = cfg.params()
    fields = ["N", "re_z", "im_z", "gap", "error"]
    rows = []
    if cfg.measure_in is not None:
        m = _read_measure_csv(cfg.measure_in, p.d)
        sizes = [cfg.N]
        measures = [m]
    else:
        sizes = sorted({max(1, cfg.N // 4), max(1, cfg.N // 2), cfg.N})
        measures = [quadrature_measure(p, n) for n in sizes]
    for n, m in zip(sizes, measures):
        row = {"N": str(n), "re_z": _num(cfg.z.real), "im_z": _num(cfg.z.imag),
               "error": ""}
        try:
            gap = np.linalg.norm(
                cauchy_transform(m, cfg.z) - weyl_resolvent(p, cfg.z, n).W, 2)
            row["gap"] = _num(gap)
        except Exception as exc:
            row["gap"] = ""
            row["error"] = str(exc)
        rows.append(row)
    return fields, rows


def _cmd_jl(cfg: RunConfig):
    p = cfg.params()
    variant = SeminormKind(cfg.seminorm)
    fields = ["lambda", "eps", "ell", "residual", "error"]
    rows = []
    for lam in cfg.lambdas():
        for eps in cfg.eps_ladder:
            row = {"lambda": _num(lam), "eps": _num(eps), "error": ""}
            try:
                s = jl_function(p, float(lam), eps, variant)
                row["ell"] = _num(s.ell)
                row["residual"] = _num(s.residual)
            except HorizonExhausted as exc:
                row["ell"] = row["residual"] = ""
                row["error"] = str(exc)
            rows.append(row)
    return fields, rows


def _cmd_nonsub(cfg: RunConfig):
    p = cfg.params()
    fields = ["lambda", "t", "cond", "verdict", "growth_rate_per_step", "error"]
    rows = []
    for lam in cfg.lambdas():
        try:
            diag = nonsub_diagnostic(p, float(lam), cfg.ts(), cap=cfg.cap)
        except Exception as exc:
            rows.append({"lambda": _num(lam), "t": "", "cond": "",
                         "verdict": "", "growth_rate_per_step": "",
                         "error": str(exc)})
            continue
        for t, cond in diag["cond_trajectory"]:
            rows.append({"lambda": _num(lam), "t": _num(t), "cond": _num(cond),
                         "verdict": "", "growth_rate_per_step": "", "error": ""})
        rows.append({"lambda": _num(lam), "t": "", "cond": "",
                     "verdict": diag["verdict"],
                     "growth_rate_per_step": _num(diag["growth_rate_per_step"])
                     if not math.isnan(diag["growth_rate_per_step"]) else "",
                     "error": ""})
    return fields, rows


def _cmd_report(cfg: RunConfig):
    p = cfg.params()
    lams = cfg.lambdas()
    scan = boundary_scan(p, lams, np.array(cfg.eps_ladder),
                         n_rule=lambda e: max(1, math.ceil(cfg.n_rule_C / e)))
    fields = ["kind", "lambda", "lambda_lo", "lambda_hi", "label", "rank", "note"]
    rows = []
    for lam, cls in zip(lams, scan.classification):
        rows.append({"kind": "point", "lambda": _num(lam), "lambda_lo": "",
                     "lambda_hi": "", "label": cls["label"],
                     "rank": "" if cls["rank"] is None else str(cls["rank"]),
                     "note": ""})
    # maximal grid runs where every point is ac or outside: a heuristic
    # stand-in for intervals free of singular candidates, not a proof
    i = 0
    labels = [c["label"] for c in scan.classification]
    while i < len(lams):
        if labels[i] in ("ac", "outside"):
            j = i
            while j + 1 < len(lams) and labels[j + 1] in ("ac", "outside"):
                j += 1
            rows.append({"kind": "interval", "lambda": "",
                         "lambda_lo": _num(lams[i]), "lambda_hi": _num(lams[j]),
                         "label": "ac_or_outside", "rank": "",
                         "note": "heuristic"})
            i = j + 1
        else:
            i += 1
    return fields, rows


_DISPATCH = {
    "validate": _cmd_validate,
    "polys": _cmd_polys,
    "transfer-check": _cmd_transfer_check,
    "weyl": _cmd_weyl,
    "weyl-scan": _cmd_weyl_scan,
    "measure": _cmd_measure,
    "cauchy-check": _cmd_cauchy_check,
    "jl": _cmd_jl,
    "nonsub": _cmd_nonsub,
    "report": _cmd_report,
}


def _write(fields, rows, fmt: str, out):
    if fmt == "csv":
        out.write(SCHEMA_LINE + "\n")
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    else:
        json.dump({"schema": SCHEMA_LINE.lstrip("# "), "rows": rows},
                  out, indent=1, sort_keys=True)
        out.write("\n")


def run(cfg: RunConfig) -> int:
    fields, rows = _DISPATCH[cfg.command](cfg)
    if rows and all(r.get("error") for r in rows):
        status = 2
    else:
        status = 0
    if cfg.out is None:
        _write(fields, rows, cfg.fmt, sys.stdout)
    else:
        with open(cfg.out, "w", newline="") as fh:
            _write(fields, rows, cfg.fmt, fh)
    return status


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bjweyl",
                                 description="block tridiagonal spectral toolkit")
    ap.add_argument("--config", help="JSON config path")
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--out")
    ap.add_argument("--format", choices=("csv", "json"), dest="fmt")
    ap.add_argument("--N", type=int)
    ap.add_argument("--lambda-min", type=float)
    ap.add_argument("--lambda-max", type=float)
    ap.add_argument("--lambda-steps", type=int)
    ap.add_argument("--eps-ladder", help="comma-separated decreasing positives")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--seminorm", choices=("norm", "minmod"))
    ap.add_argument("--cap", type=float)
    return ap


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        if ns.config is not None:
            with open(ns.config) as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = RunConfig()
        if ns.command is not None:
            cfg.command = ns.command
        if ns.out is not None:
            cfg.out = ns.out
        if ns.fmt is not None:
            cfg.fmt = ns.fmt
        if ns.N is not None:
            if ns.N < 1:
                raise ConfigError("N must be >= 1")
            cfg.N = ns.N
        lo, hi, steps = cfg.lambda_grid
        if ns.lambda_min is not None:
            lo = ns.lambda_min
        if ns.lambda_max is not None:
            hi = ns.lambda_max
        if ns.lambda_steps is not None:
            steps = ns.lambda_steps
        cfg.lambda_grid = (lo, hi, steps)
        if ns.eps_ladder is not None:
            ladder = tuple(float(x) for x in ns.eps_ladder.split(","))
            if not ladder or any(e <= 0 for e in ladder) or any(
                    b >= a for a, b in zip(ladder, ladder[1:])):
                raise ConfigError("eps ladder must be positive and strictly decreasing")
            cfg.eps_ladder = ladder
        if ns.seed is not None:
            cfg.seed = ns.seed
        if ns.seminorm is not None:
            cfg.seminorm = {"norm": "matrix_norm", "minmod": "matrix_minmod"}[ns.seminorm]
        if ns.cap is not None:
            if ns.cap <= 0:
                raise ConfigError("cap must be positive")
            cfg.cap = ns.cap
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

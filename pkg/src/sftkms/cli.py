"""Command line front end: ``sftkms {solve,verify,pressure,eval} --config job.json``.

Exit codes: 0 success, 1 configuration error, 2 no KMS state or ill-posed
system, 3 verification failure.

Config schema (JSON)::

    {
      "system":     {"k": 2, "trans": [[1, 1], [1, 1]]},
      "potential":  {"constant": 2.718281828459045}
                    | {"depth": 1, "values": {"0": 2.7, "1": 20.1}},
      "beta":       0.693,                      # optional; solved when absent
      "depths":     {"test": 4, "ops": 5},
      "tolerances": {"alg": 1e-12, "num": 1e-8},
      "seed":       0,
      "samples":    {"kms": 1000, "ground": 100, "algebra": 200},
      "measure":    {"nu": [...], "kernel": [[...]], "block_length": 1},  # optional
      "betas":      [0, 0.5, 1.0],              # pressure grid
      "suites":     ["kms.identity", ...],      # optional subset for verify
      "expression": [{"a": 1, "n": 1, "m": 1, "b": 1}]   # eval
    }

Function values (``a``, ``b``) are either numbers, ``[re, im]`` pairs, or
``{"depth": d, "values": {word: value}}`` tables.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    KmsError,
    NoKmsState,
    NotPrimitive,
    PotentialNotAboveOne,
    SftError,
    SftKmsError,
)
from .kms import CylMeasure, bowen_solve, kms_measure, pressure_curve
from .shift import BlockCode, CylFn, Sft, build_sft, higher_block_recode
from .star import StarElem, StarTerm, expectation_G
from .suites import REGISTRY, VerifyContext, report_dict, run_suites
from .tolerances import EPS_ALG, EPS_NUM


EXIT_OK, EXIT_CONFIG, EXIT_NO_KMS, EXIT_VERIFY = 0, 1, 2, 3


@dataclass
class JobConfig:
    sft: Sft
    potential: CylFn | None = None
    beta: float | None = None
    depth_test: int = 4
    depth_ops: int = 5
    eps_alg: float = EPS_ALG
    eps_num: float = EPS_NUM
    seed: int = 0
    samples: dict = field(default_factory=lambda: {"kms": 1000, "ground": 100, "algebra": 200})
    measure: dict | None = None
    betas: list | None = None
    suites: list | None = None
    expression: list | None = None


# -- parsing -------------------------------------------------------------------------------


def _scalar(value, where: str) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"{where}: expected a number or [re, im] pair")


def parse_function(s: Sft, raw, where: str) -> CylFn:
    if isinstance(raw, dict):
        if "constant" in raw:
            return CylFn.const(s, _scalar(raw["constant"], where))
        try:
            depth = int(raw["depth"])
            table = {str(k): _scalar(v, f"{where}[{k}]") for k, v in raw["values"].items()}
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigError(f"{where}: need 'constant' or 'depth' and 'values' ({exc})") from None
        try:
            return CylFn.from_mapping(s, depth, table)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    return CylFn.const(s, _scalar(raw, where))


def _int(value, where: str, low: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ConfigError(f"{where}: expected an integer >= {low}")
    return value


def parse_config(data: dict) -> JobConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    try:
        system = data["system"]
        k, trans = system["k"], system["trans"]
    except (KeyError, TypeError):
        raise ConfigError("config needs system.k and system.trans") from None
    try:
        s = build_sft(_int(k, "system.k", 1), trans)
    except SftError as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system.trans: {exc}") from None
    cfg = JobConfig(s)
    if data.get("potential") is not None:
        cfg.potential = parse_function(s, data["potential"], "potential")
    if data.get("beta") is not None:
        beta = data["beta"]
        if isinstance(beta, bool) or not isinstance(beta, (int, float)) or not beta > 0:
            raise ConfigError("beta must be a positive number")
        cfg.beta = float(beta)
    depths = data.get("depths", {})
    cfg.depth_test = _int(depths.get("test", cfg.depth_test), "depths.test", 1)
    cfg.depth_ops = _int(depths.get("ops", cfg.depth_ops), "depths.ops", 2)
    tols = data.get("tolerances", {})
    try:
        cfg.eps_alg = float(tols.get("alg", cfg.eps_alg))
        cfg.eps_num = float(tols.get("num", cfg.eps_num))
    except (TypeError, ValueError):
        raise ConfigError("tolerances must be numbers") from None
    cfg.seed = _int(data.get("seed", 0), "seed")
    for key, value in data.get("samples", {}).items():
        if key not in cfg.samples:
            raise ConfigError(f"unknown sample count {key!r}")
        cfg.samples[key] = _int(value, f"samples.{key}", 1)
    cfg.measure = data.get("measure")
    cfg.betas = data.get("betas")
    cfg.suites = data.get("suites")
    if cfg.suites is not None:
        unknown = sorted(set(cfg.suites) - set(REGISTRY))
        if unknown:
            raise ConfigError(f"unknown suites {unknown}")
    cfg.expression = data.get("expression")
    return cfg


def load_config(path: str) -> JobConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(data)


def parse_expression(s: Sft, terms) -> StarElem:
    if not isinstance(terms, list) or not terms:
        raise ConfigError("expression must be a nonempty list of terms")
    out = []
    for i, t in enumerate(terms):
        if not isinstance(t, dict):
            raise ConfigError(f"expression[{i}] must be an object")
        n = _int(t.get("n", 0), f"expression[{i}].n")
        m = _int(t.get("m", 0), f"expression[{i}].m")
        a = parse_function(s, t.get("a", 1), f"expression[{i}].a")
        b = parse_function(s, t.get("b", 1), f"expression[{i}].b")
        out.append(StarTerm(a, n, m, b))
    return StarElem(s, out)


# -- measures ------------------------------------------------------------------------------


class LoadedMeasure:
    """A serialized measure, possibly on a block recoding of the configured shift."""

    def __init__(self, sft: Sft, data: dict, check: bool = True):
        try:
            r = int(data.get("block_length", 1))
            self.code: BlockCode | None = None
            base = sft
            if r > 1:
                base, self.code = higher_block_recode(sft, r)
            self.measure = CylMeasure.from_dict(base, data, check=check)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"measure: {exc}") from None

    def evaluate(self, f: CylFn) -> complex:
        if self.code is not None:
            f = self.code.lift(f)
        return self.measure.evaluate(f)


def measure_dict(sol) -> dict:
    out = sol.measure.to_dict()
    out["block_length"] = sol.code.r if sol.code is not None else 1
    return out


def _require_potential(cfg: JobConfig) -> CylFn:
    if cfg.potential is None:
        raise ConfigError("this command needs a potential")
    return cfg.potential


def _solve(cfg: JobConfig):
    h = _require_potential(cfg)
    if cfg.beta is None:
        root = bowen_solve(cfg.sft, h)
        sol = kms_measure(cfg.sft, h, root.beta, cfg.depth_test)
        sol.extra["bracket_width"] = root.width
        return sol
    return kms_measure(cfg.sft, h, cfg.beta, cfg.depth_test)


# -- commands ------------------------------------------------------------------------------


def cmd_solve(cfg: JobConfig) -> tuple[dict, int]:
    sol = _solve(cfg)
    report = {
        "beta": sol.beta,
        "bracket_width": sol.extra.get("bracket_width"),
        "rho_residual": sol.rho_residual,
        "eigengap": sol.eigengap,
        "eigen_residual": sol.eigen_residual,
        "measure": measure_dict(sol),
        "symbol_weights": [float(sol.evaluate(CylFn.indicator(cfg.sft, (i,))).real)
                           for i in range(cfg.sft.k)],
    }
    return report, EXIT_OK


def _context(cfg: JobConfig) -> VerifyContext:
    measure = None
    if cfg.measure is not None:
        loaded = LoadedMeasure(cfg.sft, cfg.measure, check=False)
        measure = loaded.measure if loaded.code is None else None
        if loaded.code is not None:
            raise ConfigError("a supplied measure must live on the configured shift")
    if cfg.potential is not None and cfg.potential.min_real() <= 1.0:
        raise PotentialNotAboveOne("potential must exceed one everywhere")
    return VerifyContext(cfg.sft, cfg.potential, cfg.beta, measure, cfg.depth_test, cfg.depth_ops,
                         cfg.eps_alg, cfg.eps_num, cfg.seed, cfg.samples["kms"],
                         cfg.samples["ground"], cfg.samples["algebra"])


def cmd_verify(cfg: JobConfig) -> tuple[dict, int]:
    ctx = _context(cfg)
    results = run_suites(ctx, cfg.suites)
    report = report_dict(results)
    if not report["ok"]:
        return report, EXIT_VERIFY
    if ctx.no_kms:
        return report, EXIT_NO_KMS
    return report, EXIT_OK


def cmd_pressure(cfg: JobConfig) -> tuple[list, int]:
    h = _require_potential(cfg)
    betas = cfg.betas
    if not isinstance(betas, list) or not betas:
        raise ConfigError("pressure needs a nonempty 'betas' list")
    if not all(isinstance(b, (int, float)) and not isinstance(b, bool) and math.isfinite(b)
               for b in betas):
        raise ConfigError("betas must be finite numbers")
    return pressure_curve(cfg.sft, h, betas), EXIT_OK


def cmd_eval(cfg: JobConfig, expression=None) -> tuple[dict, int]:
    terms = expression if expression is not None else cfg.expression
    x = parse_expression(cfg.sft, terms)
    if cfg.measure is not None:
        phi = LoadedMeasure(cfg.sft, cfg.measure)
    else:
        phi = _solve(cfg)
    value = complex(phi.evaluate(expectation_G(x)))
    report = {"value": [value.real, value.imag]}
    unit = sum((t.a * t.b for t in x.terms if t.n == 0 and t.m == 0), CylFn.const(cfg.sft, 0.0))
    if all(t.n == 0 and t.m == 0 for t in x.terms):
        v = unit.values
        lam = complex(v[0])
        if np.all(np.abs(v - lam) <= EPS_ALG) and abs(lam - 1.0) > EPS_ALG:
            report["warning"] = (f"NotAState: expression is {_fmt_complex(lam)} times the unit, "
                                 f"so its value is not normalized")
    return report, EXIT_OK


# -- output --------------------------------------------------------------------------------


def _fmt_complex(z: complex) -> str:
    return repr(z.real) if z.imag == 0 else f"{z.real!r}{z.imag:+}j"


def _clean(obj):
    """JSON-safe copy; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def render_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def render_csv(command: str, obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command == "pressure":
        w.writerow(["beta", "rho", "log_rho"])
        for row in obj:
            w.writerow([repr(float(v)) for v in row])
    elif command == "verify":
        w.writerow(["suite", "status", "residual", "tolerance", "samples", "reason"])
        for label, r in sorted(obj["suites"].items()):
            w.writerow([label, r["status"], r.get("residual", ""), r.get("tolerance", ""),
                        r["samples"], r.get("reason", "")])
    else:
        raise ConfigError(f"csv output is not available for {command}")
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sftkms", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in [("solve", "solve for the critical temperature and KMS measure"),
                       ("verify", "run the property suites"),
                       ("pressure", "tabulate the spectral radius over a beta grid"),
                       ("eval", "evaluate the KMS state on a term list")]:
        c = sub.add_parser(name, help=text)
        c.add_argument("--config", required=True, help="path to a JSON job config")
        c.add_argument("--seed", type=int, default=None, help="override the config seed")
        c.add_argument("--out", default=None, help="write the report here instead of stdout")
        c.add_argument("--format", choices=["json", "csv"], default=None)
        if name == "eval":
            c.add_argument("--expr", default=None,
                           help="JSON term list; overrides the config expression")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or ("csv" if args.command == "pressure" else "json")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be nonnegative")
            cfg.seed = args.seed
        if args.command == "solve":
            obj, code = cmd_solve(cfg)
        elif args.command == "verify":
            obj, code = cmd_verify(cfg)
        elif args.command == "pressure":
            obj, code = cmd_pressure(cfg)
        else:
            expr = None
            if args.expr is not None:
                try:
                    expr = json.loads(args.expr)
                except json.JSONDecodeError as exc:
                    raise ConfigError(f"--expr is not valid JSON: {exc}") from None
            obj, code = cmd_eval(cfg, expr)
        text = render_json(obj) if fmt == "json" else render_csv(args.command, obj)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PotentialNotAboveOne as exc:
        print(f"error: PotentialNotAboveOne: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoKmsState, NotPrimitive, KmsError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NO_KMS
    except SftKmsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if "warning" in (obj if isinstance(obj, dict) else {}):
        print(f"warning: {obj['warning']}", file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

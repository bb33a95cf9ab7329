"""Command-line front end.

    polarlink {weights,certify,trace,torus-map,eta0} --config run.yaml [--out PATH] [--seed N] [--jobs N]

Exit codes: 0 success, 1 a mathematical check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import yaml

from . import __version__, mixedpoly, torusmap, weights
from .family import CyclicFamilySpec, det_NM, f_II, make_member, validate_spec
from .sampler import estimate_eta0, sample_link
from .transversal import ConvergenceFailure, certify, trace_curve

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass
class Tolerances:
    sigma_min: float = 1e-8
    newton: float = 1e-12
    zero_threshold: float = 1e-9


@dataclass
class RunConfig:
    n: int
    a: list[int]
    b: list[int]
    seed: int
    t_grid: list[float] = field(default_factory=list)
    r_list: list[float] = field(default_factory=list)
    samples_per_cell: int = 50
    nullity_samples: int = 2
    eta_grid: list[float] = field(default_factory=list)
    tolerances: Tolerances = field(default_factory=Tolerances)
    require_b: bool = True
    output: str | None = None
    trace: dict = field(default_factory=dict)
    eta0: dict = field(default_factory=dict)
    torus_map: dict = field(default_factory=dict)

    @property
    def spec(self) -> CyclicFamilySpec:
        return CyclicFamilySpec(self.n, tuple(self.a), tuple(self.b))

    def as_dict(self) -> dict:
        return asdict(self)


_FIELDS = {
    "n", "a", "b", "seed", "t_grid", "r_list", "samples_per_cell", "nullity_samples",
    "eta_grid", "tolerances", "require_b", "output", "trace", "eta0", "torus_map",
}


def _key_lines(text: str) -> dict[str, int]:
    node = yaml.compose(text)
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def parse_config(text: str) -> RunConfig:
    """Parse a YAML run configuration; errors carry the offending line."""
    try:
        raw = yaml.safe_load(text)
        lines = _key_lines(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax: {getattr(exc, 'problem', exc)}",
                          None if mark is None else mark.line + 1) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a key/value mapping", 1)
    for key in raw:
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", lines.get(key))
    for key in ("n", "a", "b", "seed"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    def want(key, kind, cond=lambda v: True, what=""):
        v = raw[key]
        if not isinstance(v, kind) or isinstance(v, bool) and kind is not bool or not cond(v):
            raise ConfigError(f"{key}: expected {what or kind.__name__}, got {v!r}", lines.get(key))
        return v

    def numlist(key, item=(int, float)):
        v = want(key, list, what="a list")
        if not all(isinstance(x, item) and not isinstance(x, bool) for x in v):
            raise ConfigError(f"{key}: entries must be numbers", lines.get(key))
        return v

    cfg = RunConfig(
        n=want("n", int, lambda v: v >= 2, "integer >= 2"),
        a=numlist("a", int),
        b=numlist("b", int),
        seed=want("seed", int, lambda v: v >= 0, "nonnegative integer"),
    )
    if len(cfg.a) != cfg.n or len(cfg.b) != cfg.n:
        raise ConfigError(f"a and b must have length n={cfg.n}", lines.get("a"))
    for key in ("t_grid", "r_list", "eta_grid"):
        if key in raw:
            setattr(cfg, key, [float(x) for x in numlist(key)])
    if any(not 0 <= t <= 1 for t in cfg.t_grid):
        raise ConfigError("t_grid values must lie in [0, 1]", lines.get("t_grid"))
    if any(r <= 0 for r in cfg.r_list):
        raise ConfigError("r_list values must be positive", lines.get("r_list"))
    for key in ("samples_per_cell", "nullity_samples"):
        if key in raw:
            setattr(cfg, key, want(key, int, lambda v: v >= 0, "nonnegative integer"))
    if "require_b" in raw:
        cfg.require_b = want("require_b", bool)
    if "output" in raw:
        cfg.output = want("output", str)
    if "tolerances" in raw:
        tol = want("tolerances", dict, what="a mapping")
        try:
            cfg.tolerances = Tolerances(**{k: float(v) for k, v in tol.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"tolerances: {exc}", lines.get("tolerances")) from exc
    for key in ("trace", "eta0", "torus_map"):
        if key in raw:
            setattr(cfg, key, want(key, dict, what="a mapping"))
    return cfg


# -- commands -------------------------------------------------------------------

def _weight_dict(fn, poly) -> dict:
    try:
        w = fn(poly)
    except weights.WeightError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    return {"weights": list(w.weights), "degree": w.degree, "mixed_signs": w.mixed_signs}


def _graph_label(poly) -> list[str]:
    g = mixedpoly.variable_graph(poly)
    names = {"cycle": "C", "bamboo": "B"}
    return [f"{names.get(k, k)}{len(c)}" if k in names else k for c, k in zip(g.components, g.kinds)]


def cmd_weights(cfg: RunConfig) -> tuple[dict, dict, int]:
    spec = cfg.spec
    problems = validate_spec(spec, cfg.require_b)
    fII = f_II(spec)
    t_values = cfg.t_grid or [0.0, 0.5, 1.0]
    members = []
    for t in t_values:
        poly = make_member(spec, t).poly
        entry = {"t": t, "polar": _weight_dict(weights.polar_weight, poly)}
        if t in (0.0, 1.0):
            entry["radial"] = _weight_dict(weights.radial_weight, poly)
        members.append(entry)
    results = {
        "spec": spec.as_dict(),
        "validation": problems,
        "det_NM": det_NM(spec),
        "simplicial": weights.is_simplicial(fII),
        "graph": _graph_label(fII),
        "members": members,
    }
    ok = not problems and all("error" not in m["polar"] for m in members)
    return results, {"ok": ok, "violations": problems}, EXIT_OK if ok else EXIT_FAIL


def cmd_certify(cfg: RunConfig, jobs: int = 1) -> tuple[dict, dict, int]:
    if not cfg.t_grid or not cfg.r_list:
        raise ConfigError("certify needs nonempty t_grid and r_list")
    cert = certify(
        cfg.spec, cfg.t_grid, cfg.r_list,
        samples_per_cell=cfg.samples_per_cell,
        seed=cfg.seed,
        tol=cfg.tolerances.sigma_min,
        nullity_samples=cfg.nullity_samples,
        jobs=jobs,
        require_assumptions=cfg.require_b,
    )
    body = cert.as_dict()
    summary = body.pop("summary")
    return body, summary, EXIT_OK if summary["all_pass"] else EXIT_FAIL


def cmd_trace(cfg: RunConfig) -> tuple[dict, dict, int]:
    tr = cfg.trace
    try:
        t = float(tr.get("t", 0.5))
        r = float(tr.get("r", 1.0))
        s_grid = [float(s) for s in tr.get("s_grid", [])]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"trace: {exc}") from exc
    if any(abs(s) > 0.5 for s in s_grid):
        raise ConfigError("trace.s_grid values must satisfy |s| <= 0.5")
    member = make_member(cfg.spec, t)
    samples = sample_link(member, r, 1, cfg.seed)
    if not samples or samples[0].nullity:
        return {"t": t, "r": r, "rows": []}, {"ok": False, "error": "no nullity-free base point"}, EXIT_FAIL
    base = samples[0]
    try:
        points = trace_curve(member, base, s_grid, tol=cfg.tolerances.newton)
    except ConvergenceFailure as exc:
        return ({"t": t, "r": r, "rows": []},
                {"ok": False, "error": str(exc), "failing_s": exc.s}, EXIT_FAIL)
    bound = 1e-8 * (1 + np.linalg.norm(base.w) ** member.poly.degree)
    rows = [
        {"s": p.s, "w_re": p.w.real.tolist(), "w_im": p.w.imag.tolist(),
         "r": p.r.tolist(), "residual": p.residual}
        for p in points
    ]
    worst = max((p.residual for p in points), default=0.0)
    ok = worst <= bound
    results = {"t": t, "r": r, "base_re": base.w.real.tolist(), "base_im": base.w.imag.tolist(), "rows": rows}
    return results, {"ok": ok, "max_residual": worst, "bound": bound}, EXIT_OK if ok else EXIT_FAIL


def cmd_torus_map(cfg: RunConfig) -> tuple[dict, dict, int]:
    opts = cfg.torus_map
    if "polynomial" in opts:
        try:
            spec_poly = opts["polynomial"]
            if isinstance(spec_poly, dict):
                poly = mixedpoly.from_records(spec_poly["monomials"], spec_poly.get("n"))
            else:
                poly = mixedpoly.from_records(spec_poly)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"torus_map.polynomial: {exc}") from exc
    else:
        poly = f_II(cfg.spec)
    try:
        tm = torusmap.build_torus_map(poly)
    except weights.WeightError as exc:
        return {"polynomial": mixedpoly.to_records(poly)}, {"ok": False, "error": f"{type(exc).__name__}: {exc}"}, EXIT_FAIL
    corrupted = None
    if "corrupt" in opts:
        i, j = (int(x) for x in opts["corrupt"])
        E = [list(row) for row in tm.E]
        E[i][j] += 1
        tm = tm.with_E(E)
        corrupted = [i, j]
    residual = torusmap.check_fiber_preservation(tm, int(opts.get("samples", 100)), cfg.seed)
    exact_ok = all(x == 0 for row in torusmap.exact_residual(tm) for x in row)
    results = {
        "polynomial": mixedpoly.to_records(poly),
        "E": tm.fraction_strings(),
        "corrupted_entry": corrupted,
        "exact_identity": exact_ok,
        "fiber_residual": residual,
        "extendability": torusmap.extendability_report(tm),
    }
    ok = exact_ok and residual <= 1e-10
    return results, {"ok": ok}, EXIT_OK if ok else EXIT_FAIL


def cmd_eta0(cfg: RunConfig, jobs: int = 1) -> tuple[dict, dict, int]:
    if not cfg.eta_grid:
        raise ConfigError("eta0 needs a nonempty eta_grid")
    opts = cfg.eta0
    t = float(opts.get("t", 0.5))
    r = float(opts.get("r", 1.0))
    est = estimate_eta0(make_member(cfg.spec, t), r, cfg.eta_grid,
                        samples=int(opts.get("samples", 20)), seed=cfg.seed,
                        tol=cfg.tolerances.sigma_min, jobs=jobs)
    results = asdict(est)
    return results, {"eta0": est.eta0, "note": est.note}, EXIT_OK if est.eta0 > 0 else EXIT_FAIL


COMMANDS = {
    "weights": cmd_weights,
    "certify": cmd_certify,
    "trace": cmd_trace,
    "torus-map": cmd_torus_map,
    "eta0": cmd_eta0,
}


def run(command: str, cfg: RunConfig, jobs: int = 1) -> tuple[dict, int]:
    fn = COMMANDS[command]
    if command in ("certify", "eta0"):
        results, summary, code = fn(cfg, jobs)
    else:
        results, summary, code = fn(cfg)
    report = {
        "version": __version__,
        "config": cfg.as_dict(),
        "command": command,
        "results": results,
        "summary": summary,
    }
    return report, code


def _jsonable(obj: Any):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, default=_jsonable, allow_nan=False) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="polarlink", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", help="report path (default: config 'output' or stdout)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None:
            cfg.seed = args.seed
        report, code = run(args.command, cfg, max(1, args.jobs))
    except OSError as exc:
        print(f"polarlink: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"polarlink: {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dump_report(report)
    out = args.out or cfg.output
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

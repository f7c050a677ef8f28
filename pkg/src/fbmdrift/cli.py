"""Command-line interface.

    fbmdrift simulate|estimate|fisher|study --config run.yaml [--data path.csv] [--out dir] [--seed N]

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from scipy.special import beta as beta_fn

from .asymptotics import constants, gamma_matrix
from .errors import ConfigError, NumericalError
from .estimator import OptimizerOptions, maximize_likelihood
from .experiment import (
    StudyConfig,
    run_study,
    write_csv,
    write_json,
    write_replicates_csv,
    write_summary_csv,
)
from .fbm import replicate_seed, simulate_fbm
from .grid import SampledPath, TimeGrid
from .likelihood import make_context
from .model import BUILTIN_MODELS, ParameterBox, SdeConfig, builtin_model, default_box, simulate_sde

__all__ = ["RunConfig", "load_config", "main", "main_exit"]

FORMATS = ("json", "csv", "png")
FBM_METHODS = ("circulant", "cholesky")


# --------------------------------------------------------------------------
# schema


class _Field:
    def __init__(self, kind, required=False, default=None, check=None, what=""):
        self.kind = kind
        self.required = required
        self.default = default
        self.check = check
        self.what = what


def _positive(v):
    return v > 0


def _open_unit(v):
    return 0 < v < 1


SCHEMA = {
    "model": {
        "name": _Field("str", required=True, check=lambda v: v in BUILTIN_MODELS,
                       what=f"one of {list(BUILTIN_MODELS)}"),
        "theta0": _Field("floats"),
        "box": {
            "lower": _Field("floats", required=True),
            "upper": _Field("floats", required=True),
        },
        "x0": _Field("float", default=1.0),
    },
    "noise": {
        "H": _Field("float", required=True, check=_open_unit, what="a number in (0, 1)"),
        "epsilon": _Field("floats", required=True, check=lambda v: all(0 < e <= 1 for e in v),
                          what="numbers in (0, 1]"),
        "method": _Field("str", default="circulant", check=lambda v: v in FBM_METHODS,
                         what=f"one of {list(FBM_METHODS)}"),
    },
    "grid": {
        "T": _Field("float", default=1.0, check=_positive, what="a positive number"),
        "n": _Field("int", required=True, check=_positive, what="a positive integer"),
    },
    "study": {
        "M": _Field("int", default=500, check=lambda v: v >= 2, what="an integer >= 2"),
        "seed": _Field("int", default=0, check=lambda v: 0 <= v < 2**64,
                       what="an unsigned 64-bit integer"),
        "doubling_check": _Field("bool", default=False),
    },
    "simulate": {
        "paths": _Field("int", default=1, check=_positive, what="a positive integer"),
    },
    "optimizer": {
        "grad_tol": _Field("float", default=1e-8, check=_positive, what="a positive number"),
        "max_iter": _Field("int", default=500, check=_positive, what="a positive integer"),
        "extra_starts": _Field("starts", default=()),
    },
    "output": {
        "directory": _Field("str", default="out"),
        "formats": _Field("strs", default=list(FORMATS), check=lambda v: set(v) <= set(FORMATS),
                          what=f"a subset of {list(FORMATS)}"),
    },
}


def _line(node) -> int:
    return node.start_mark.line + 1


def _err(node, msg: str) -> ConfigError:
    return ConfigError(f"line {_line(node)}: {msg}")


def _scalar(node, path):
    if not isinstance(node, yaml.ScalarNode):
        raise _err(node, f"'{path}' must be a scalar")
    return yaml.SafeLoader("").construct_object(node)


def _number(node, path, integer=False):
    v = _scalar(node, path)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(node, f"'{path}' must be {'an integer' if integer else 'a number'}")
    if integer and not isinstance(v, int):
        raise _err(node, f"'{path}' must be an integer")
    if not integer and not math.isfinite(v):
        raise _err(node, f"'{path}' must be finite")
    return int(v) if integer else float(v)


def _convert(node, field: _Field, path: str):
    kind = field.kind
    if kind == "str":
        v = _scalar(node, path)
        if not isinstance(v, str):
            raise _err(node, f"'{path}' must be a string")
    elif kind == "float":
        v = _number(node, path)
    elif kind == "int":
        v = _number(node, path, integer=True)
    elif kind == "bool":
        v = _scalar(node, path)
        if not isinstance(v, bool):
            raise _err(node, f"'{path}' must be true or false")
    elif kind in ("floats", "strs"):
        items = node.value if isinstance(node, yaml.SequenceNode) else [node]
        if not items:
            raise _err(node, f"'{path}' must not be empty")
        if kind == "floats":
            v = [_number(it, path) for it in items]
        else:
            v = [_scalar(it, path) for it in items]
            if not all(isinstance(s, str) for s in v):
                raise _err(node, f"'{path}' must be a list of strings")
    elif kind == "starts":
        if not isinstance(node, yaml.SequenceNode):
            raise _err(node, f"'{path}' must be a list of points")
        v = []
        for it in node.value:
            pts = it.value if isinstance(it, yaml.SequenceNode) else [it]
            v.append(tuple(_number(p, path) for p in pts))
        v = tuple(v)
    else:  # pragma: no cover
        raise AssertionError(kind)
    if field.check is not None and not field.check(v):
        raise _err(node, f"'{path}' must be {field.what}, got {v!r}")
    return v


def _validate(node, schema: dict, path: str) -> tuple[dict, dict]:
    """Mapping node -> (values, lines); unknown and missing keys are errors."""
    if not isinstance(node, yaml.MappingNode):
        raise _err(node, f"'{path or 'config'}' must be a mapping")
    values, lines = {}, {}
    for knode, vnode in node.value:
        key = _scalar(knode, path)
        full = f"{path}.{key}" if path else str(key)
        if key not in schema:
            raise _err(knode, f"unknown key '{full}' (allowed: {', '.join(schema)})")
        if key in values:
            raise _err(knode, f"duplicate key '{full}'")
        sub = schema[key]
        if isinstance(sub, dict):
            values[key], sublines = _validate(vnode, sub, full)
            lines.update(sublines)
        else:
            values[key] = _convert(vnode, sub, full)
        lines[full] = _line(knode)
    for key, sub in schema.items():
        if key in values:
            continue
        full = f"{path}.{key}" if path else key
        if isinstance(sub, _Field):
            if sub.required:
                raise _err(node, f"missing required key '{full}'")
            values[key] = sub.default
    return values, lines


@dataclass
class RunConfig:
    values: dict
    lines: dict
    source: str

    def section(self, name: str) -> dict:
        if name in self.values:
            return self.values[name]
        sub, _ = _defaults(SCHEMA[name])
        return sub

    def line(self, key: str) -> int | None:
        return self.lines.get(key)

    def fail(self, key: str, msg: str) -> ConfigError:
        ln = self.line(key)
        return ConfigError(f"line {ln}: {msg}" if ln else msg)

    # ---- derived objects

    def require(self, *sections: str) -> None:
        for name in sections:
            if name not in self.values:
                raise ConfigError(f"missing required section '{name}'")

    @property
    def model_name(self) -> str:
        return self.values["model"]["name"]

    def box(self, need_theta0: bool) -> ParameterBox:
        m = self.values["model"]
        name = m["name"]
        base = default_box(name)
        theta0 = m.get("theta0")
        if need_theta0 and theta0 is None:
            raise self.fail("model", "missing required key 'model.theta0'")
        if "box" in m:
            lo, hi = m["box"]["lower"], m["box"]["upper"]
        else:
            lo, hi = base.lower.tolist(), base.upper.tolist()
        try:
            box = ParameterBox(lo, hi, theta0)
        except ConfigError as exc:
            raise self.fail("model.theta0" if theta0 is not None else "model.box", str(exc)) from None
        try:
            builtin_model(name, box)
        except ConfigError as exc:
            raise self.fail("model.box" if "box" in m else "model.theta0", str(exc)) from None
        return box

    def hurst(self, estimation: bool) -> float:
        H = self.values["noise"]["H"]
        if estimation and H == 0.5:
            raise self.fail("noise.H", "'noise.H' = 0.5 is excluded for estimation")
        return H

    @property
    def epsilons(self) -> list[float]:
        return self.values["noise"]["epsilon"]

    @property
    def grid(self) -> TimeGrid:
        g = self.values["grid"]
        return TimeGrid(g["T"], g["n"])

    def sde(self, estimation: bool, epsilon: float | None = None) -> SdeConfig:
        eps = self.epsilons[0] if epsilon is None else epsilon
        return SdeConfig(self.values["model"]["x0"], eps, self.hurst(estimation), self.grid)

    def optimizer(self) -> OptimizerOptions:
        o = self.section("optimizer")
        return OptimizerOptions(grad_tol=o["grad_tol"], max_iter=o["max_iter"],
                                extra_starts=tuple(o["extra_starts"]))


def _defaults(schema: dict) -> tuple[dict, dict]:
    return {k: v.default for k, v in schema.items() if isinstance(v, _Field)}, {}


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{where}invalid YAML ({getattr(exc, 'problem', exc)})") from None
    if node is None:
        raise ConfigError("config file is empty")
    values, lines = _validate(node, SCHEMA, "")
    return RunConfig(values, lines, str(path))


# --------------------------------------------------------------------------
# data files


def read_path_csv(path, grid: TimeGrid) -> SampledPath:
    """Read columns ``t, X`` (extra columns ignored) and check them against ``grid``."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read data {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path}: empty data file")
        header = [h.strip() for h in header]
        if "t" not in header or "X" not in header:
            raise ConfigError(f"{path}: header must contain columns 't' and 'X'")
        it, ix = header.index("t"), header.index("X")
        ts, xs = [], []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                ts.append(float(row[it]))
                xs.append(float(row[ix]))
            except (ValueError, IndexError):
                raise ConfigError(f"{path}: row {rownum}: non-numeric or missing value") from None
            if not (math.isfinite(ts[-1]) and math.isfinite(xs[-1])):
                raise ConfigError(f"{path}: row {rownum}: non-finite value")
    if len(ts) != len(grid):
        raise ConfigError(
            f"{path}: grid mismatch, expected {len(grid)} rows for n={grid.n}, found {len(ts)}"
        )
    if not np.allclose(ts, grid.nodes, rtol=0, atol=1e-9 * grid.T):
        raise ConfigError(f"{path}: grid mismatch, time column does not match T={grid.T}, n={grid.n}")
    return SampledPath(grid, xs)


# --------------------------------------------------------------------------
# commands


def _out_dir(cfg: RunConfig, out: str | None) -> Path:
    d = Path(out) if out else Path(cfg.section("output")["directory"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def _formats(cfg: RunConfig) -> set[str]:
    return set(cfg.section("output")["formats"])


def _seed(cfg: RunConfig, seed: int | None) -> int:
    if seed is None:
        return cfg.section("study")["seed"]
    if not 0 <= seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    return seed


def cmd_simulate(cfg: RunConfig, out: str | None, seed: int | None) -> list[Path]:
    cfg.require("model", "noise", "grid")
    box = cfg.box(need_theta0=True)
    sde = cfg.sde(estimation=False)
    model = builtin_model(cfg.model_name, box)
    master = _seed(cfg, seed)
    d = _out_dir(cfg, out)
    written = []
    for k in range(cfg.section("simulate")["paths"]):
        noise = simulate_fbm(sde.grid, sde.H, replicate_seed(master, k), cfg.values["noise"]["method"])
        X = simulate_sde(model, box.true_theta, sde, noise)
        p = d / f"path_{k:03d}.csv"
        write_csv(p, ["t", "X", "BH"], zip(sde.grid.nodes, X.values, noise.values))
        written.append(p)
    return written


def _result_dict(res, box: ParameterBox, model) -> dict:
    out = {
        "model": model.name,
        "param_names": list(model.param_names),
        "theta_hat": res.theta_hat.tolist(),
        "loglik_at_hat": res.loglik_at_hat,
        "gradient_at_hat": res.grad_at_hat.tolist(),
        "converged": res.converged,
        "hit_boundary": res.hit_boundary,
        "n_evals": res.n_evals,
        "best_start": res.best_start,
        "box": {"lower": box.lower.tolist(), "upper": box.upper.tolist()},
    }
    if res.normalized_error is not None:
        out["theta0"] = box.true_theta.tolist()
        out["normalized_error"] = res.normalized_error.tolist()
    return out


def cmd_estimate(cfg: RunConfig, data: str | None, out: str | None) -> list[Path]:
    cfg.require("model", "noise", "grid")
    if data is None:
        raise ConfigError("estimate needs --data <path.csv>")
    box = cfg.box(need_theta0=False)
    sde = cfg.sde(estimation=True)
    model = builtin_model(cfg.model_name, box)
    X = read_path_csv(data, sde.grid)
    res = maximize_likelihood(make_context(X, sde, model), box, cfg.optimizer(),
                              theta0=box.true_theta if box.true_theta is not None else False)
    p = _out_dir(cfg, out) / "estimate.json"
    write_json(p, _result_dict(res, box, model))
    return [p]


def _closed_form_gamma(name: str, H: float, T: float) -> float | None:
    if name != "constant":
        return None
    c = constants(H)
    if H < 0.5:
        return c.c1 * beta_fn(1.5 - H, 0.5 - H) ** 2 * T ** (2 - 2 * H) / (2 - 2 * H)
    return c.c2**2 * T ** (2 - 2 * H) / (2 - 2 * H)


def cmd_fisher(cfg: RunConfig, out: str | None) -> list[Path]:
    cfg.require("model", "noise", "grid")
    box = cfg.box(need_theta0=True)
    sde = cfg.sde(estimation=True)
    model = builtin_model(cfg.model_name, box)
    fm = gamma_matrix(model, box.true_theta, sde)
    d = _out_dir(cfg, out)
    fmts = _formats(cfg)
    written = []
    payload = {
        "model": model.name,
        "theta0": box.true_theta.tolist(),
        "H": sde.H,
        "T": sde.grid.T,
        "n": sde.grid.n,
        "x0": sde.x0,
        "gamma": fm.gamma.tolist(),
        "gamma_inv": fm.inv.tolist(),
        "eigenvalues": fm.eigenvalues.tolist(),
    }
    closed = _closed_form_gamma(model.name, sde.H, sde.grid.T)
    if closed is not None:
        payload["closed_form_gamma"] = closed
        payload["closed_form_rel_error"] = abs(fm.gamma[0, 0] / closed - 1.0)
    if "json" in fmts:
        written.append(d / "fisher.json")
        write_json(written[-1], payload)
    if "csv" in fmts:
        rows = []
        for name, mat in (("gamma", fm.gamma), ("gamma_inv", fm.inv)):
            for i in range(fm.dim):
                for j in range(fm.dim):
                    rows.append([name, i + 1, j + 1, mat[i, j]])
        for i, ev in enumerate(fm.eigenvalues):
            rows.append(["eigenvalue", i + 1, "", ev])
        written.append(d / "fisher.csv")
        write_csv(written[-1], ["quantity", "i", "j", "value"], rows)
    return written


def study_config(cfg: RunConfig, seed: int | None) -> StudyConfig:
    cfg.require("model", "noise", "grid")
    box = cfg.box(need_theta0=True)
    st = cfg.section("study")
    return StudyConfig(
        model=cfg.model_name,
        box=box,
        H=cfg.hurst(estimation=True),
        epsilons=tuple(cfg.epsilons),
        T=cfg.values["grid"]["T"],
        n=cfg.values["grid"]["n"],
        M=st["M"],
        seed=_seed(cfg, seed),
        x0=cfg.values["model"]["x0"],
        fbm_method=cfg.values["noise"]["method"],
        doubling_check=st["doubling_check"],
        optimizer=cfg.optimizer(),
    )


def _summary_text(report) -> str:
    c = report.config
    lines = [
        f"model {c.model}, theta0 {c.theta0.tolist()}, H {c.H}, T {c.T}, n {c.n}, M {c.M}, seed {c.seed}",
        f"Gamma {report.fisher.gamma.tolist()}",
        f"Gamma^-1 {report.fisher.inv.tolist()}",
    ]
    for b in report.blocks:
        lines.append(f"epsilon {b.epsilon}: {b.n_ok} replicates, {len(b.failures)} failed, "
                     f"{b.boundary_hits} on the boundary{' (UNRELIABLE)' if b.unreliable else ''}")
        for k in range(c.box.dim):
            var = b.cov[k, k]
            target = report.fisher.inv[k, k]
            lines.append(
                f"  u_{k + 1}: mean {b.mean[k]:.4g} (se {b.mean_se[k]:.3g}), "
                f"var {var:.4g} vs {target:.4g} (ratio {var / target:.4f}), "
                f"E u^2 {b.moments[k]['x^2']['empirical']:.4g}, "
                f"KS p {b.ks[k].pvalue:.3g}, "
                f"P(|u|>3sd) {b.tails[k]['3']['empirical']:.3g}"
            )
        lines.append(f"  covariance Frobenius rel distance {b.frobenius_rel:.4g}")
    if report.monotone is not None:
        lines.append(f"epsilon schedule monotone up to CI overlap: {report.monotone}")
    if report.doubling is not None:
        dbl = report.doubling
        lines.append(f"grid doubling n={dbl.n} -> {2 * dbl.n}: covariance moved by {dbl.rel_change:.4g} "
                     f"({'pass' if dbl.passed else 'FAIL'} at {dbl.threshold:g})")
    return "\n".join(lines) + "\n"


def cmd_study(cfg: RunConfig, out: str | None, seed: int | None) -> list[Path]:
    sc = study_config(cfg, seed)
    report = run_study(sc)
    d = _out_dir(cfg, out)
    fmts = _formats(cfg)
    written = []
    if "json" in fmts:
        written.append(d / "report.json")
        write_json(written[-1], report.to_dict())
    if "csv" in fmts:
        written.append(d / "replicates.csv")
        write_replicates_csv(report, written[-1])
        written.append(d / "summary.csv")
        write_summary_csv(report, written[-1])
        rows = []
        for b in report.blocks:
            for k, h in enumerate(b.histograms):
                for c, cnt, dens, nd in zip(h["centers"], h["counts"], h["density"], h["normal_density"]):
                    rows.append([b.epsilon, k + 1, c, cnt, dens, nd])
        written.append(d / "histogram.csv")
        write_csv(written[-1], ["epsilon", "coordinate", "bin_center", "count", "density",
                                "normal_density"], rows)
    if "png" in fmts:
        from .plotting import render_histograms

        for i, b in enumerate(report.blocks):
            written.append(d / f"histogram_{i}.png")
            render_histograms(b.histograms, written[-1],
                              title=f"{sc.model}, H={sc.H:g}, eps={b.epsilon:g}, M={b.n_ok}")
    written.append(d / "summary.txt")
    written[-1].write_text(_summary_text(report), encoding="utf-8", newline="\n")
    return written


# --------------------------------------------------------------------------
# entry point


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fbmdrift", description="Drift estimation under small fractional noise.")
    p.add_argument("command", choices=("simulate", "estimate", "fisher", "study"))
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--data", help="path CSV with columns t, X (estimate only)")
    p.add_argument("--out", help="output directory (overrides output.directory)")
    p.add_argument("--seed", type=_u64, help="master seed (overrides study.seed)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = load_config(args.config)
        if args.command == "simulate":
            written = cmd_simulate(cfg, args.out, args.seed)
        elif args.command == "estimate":
            written = cmd_estimate(cfg, args.data, args.out)
        elif args.command == "fisher":
            written = cmd_fisher(cfg, args.out)
        else:
            written = cmd_study(cfg, args.out, args.seed)
    except (ConfigError, ValueError) as exc:
        print(f"fbmdrift: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"fbmdrift: numerical failure: {exc}", file=sys.stderr)
        return 2
    for p in written:
        print(p)
    return 0


def main_exit() -> None:
    """Console-script wrapper turning the return code of :func:`main` into the exit status."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()

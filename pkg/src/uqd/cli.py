"""Command-line interface: dataset ingestion, config resolution,
subcommand dispatch, and report emission.

Subcommands: ``uqd mle``, ``uqd gp``, ``uqd entropy``, ``uqd bne``,
``uqd simgen``. Reports are JSON envelopes with a schema version, an
echo of the exact resolved configuration, per-query uncertainty reports,
and run diagnostics; curve outputs are CSV. Identical arguments and
seeds produce byte-identical outputs (wall-clock timings go to stderr,
never into a report). Exit codes: 0 success, 2 validation error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bne as bne_mod
from . import entropy as entropy_mod
from . import gp as gp_mod
from . import likelihood as lik_mod
from . import simgen as simgen_mod
from .dataset import Dataset
from .errors import DimensionMismatch, NonFiniteValue, SchemaMismatch, UqdError

SCHEMA_VERSION = "1"

_SCENARIO_ALIASES = {
    "fig3a": "fig3a_regression",
    "fig3b": "fig3b_classification",
    "fig7": "fig7_gp_demo",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully-resolved, validated parameters for one subcommand run."""

    subcommand: str
    params: dict
    schema_version: str = SCHEMA_VERSION


@dataclass(frozen=True)
class ReportEnvelope:
    schema_version: str
    subcommand: str
    config: dict
    reports: list
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "subcommand": self.subcommand,
            "config": self.config,
            "reports": self.reports,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row]
    except OSError as exc:
        raise SchemaMismatch(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaMismatch(f"{path} is empty")
    header = [name.strip() for name in rows[0]]
    return header, rows[1:]


def _parse_matrix(path, header, rows) -> np.ndarray:
    values = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise SchemaMismatch(
                f"{path}: row {i} has {len(row)} fields, header has {len(header)}"
            )
        for j, token in enumerate(row):
            try:
                value = float(token)
            except ValueError as exc:
                raise NonFiniteValue(
                    f"{path}: unreadable value {token!r} at row {i}, column {header[j]!r}"
                ) from exc
            if not np.isfinite(value):
                raise NonFiniteValue(
                    f"{path}: non-finite value at row {i}, column {header[j]!r}"
                )
            values[i - 1, j] = value
    return values


def parse_dataset(path, schema: str) -> Dataset:
    """Read a CSV into a Dataset, validating against a named schema.

    Schemas: ``sample`` (one column of observations), ``xy`` (feature
    columns plus ``y``), ``labeled`` (feature columns plus ``label``),
    ``queries`` (feature columns only), ``bne_train`` (features, ``y``,
    base-predictor columns ``f1..fK``), ``bne_queries`` (features plus
    ``f1..fK``).
    """
    header, rows = _read_csv(path)
    values = _parse_matrix(path, header, rows)

    def columns(names):
        return values[:, [header.index(n) for n in names]]

    if schema == "sample":
        if len(header) != 1:
            raise SchemaMismatch(
                f"{path}: expected a single observation column, got {header}"
            )
        return Dataset(x=values.reshape(-1, 1))

    f_names = sorted(
        (n for n in header if len(n) > 1 and n[0] == "f" and n[1:].isdigit()),
        key=lambda n: int(n[1:]),
    )
    special = {"y", "label", *f_names}
    feat_names = [n for n in header if n not in special]

    if schema == "xy":
        if "y" not in header:
            raise SchemaMismatch(f"{path}: missing required column 'y'")
        if not feat_names:
            raise SchemaMismatch(f"{path}: no feature columns besides 'y'")
        return Dataset(x=columns(feat_names), y=columns(["y"]).ravel())

    if schema == "labeled":
        if "label" not in header:
            raise SchemaMismatch(f"{path}: missing required column 'label'")
        labels = columns(["label"]).ravel()
        if not np.all(labels == labels.astype(int)):
            raise SchemaMismatch(f"{path}: 'label' column must hold integers")
        return Dataset(x=columns(feat_names), labels=labels.astype(int))

    if schema == "queries":
        if not feat_names:
            raise SchemaMismatch(f"{path}: no feature columns")
        return Dataset(x=columns(feat_names))

    if schema in ("bne_train", "bne_queries"):
        if not f_names:
            raise SchemaMismatch(f"{path}: missing base-predictor columns f1..fK")
        expected = [f"f{i}" for i in range(1, len(f_names) + 1)]
        if f_names != expected:
            raise SchemaMismatch(f"{path}: predictor columns must be {expected}")
        if not feat_names:
            raise SchemaMismatch(f"{path}: no feature columns")
        y = None
        if schema == "bne_train":
            if "y" not in header:
                raise SchemaMismatch(f"{path}: missing required column 'y'")
            y = columns(["y"]).ravel()
        return Dataset(x=columns(feat_names), y=y, base_pred=columns(f_names))

    raise SchemaMismatch(f"unknown dataset schema {schema!r}")


def parse_ensemble(path) -> entropy_mod.PosteriorEnsemble:
    """Read an ensemble CSV: one member per row, one column per label
    probability, with an optional leading ``weight`` column."""
    header, rows = _read_csv(path)
    values = _parse_matrix(path, header, rows)
    weights = None
    if header and header[0] == "weight":
        if len(header) < 2:
            raise SchemaMismatch(f"{path}: no probability columns after 'weight'")
        weights = values[:, 0]
        values = values[:, 1:]
    return entropy_mod.PosteriorEnsemble(values, weights=weights)


# ---------------------------------------------------------------------------
# Output emission


def _write_text(path, text):
    Path(path).write_text(text)


def emit_curves(grid, reports, path, means=None) -> None:
    """Write plot-ready band data: one row per query with the feature
    coordinates, optional predictive mean, and the three uncertainty
    columns. An empty grid produces a header-only file."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if len(reports) != (0 if grid.size == 0 else grid.shape[0]):
        raise DimensionMismatch(
            f"{grid.shape[0]} grid rows vs {len(reports)} reports"
        )
    d = grid.shape[1] if grid.size else 1
    x_cols = ["x"] if d == 1 else [f"x{i}" for i in range(1, d + 1)]
    header = x_cols + (["mu"] if means is not None else []) + [
        "total", "aleatoric", "epistemic",
    ]
    lines = [",".join(header)]
    for i, rep in enumerate(reports):
        row = [repr(float(v)) for v in grid[i]]
        if means is not None:
            row.append(repr(float(means[i])))
        row += [repr(float(rep.total)), repr(float(rep.aleatoric)), repr(float(rep.epistemic))]
        lines.append(",".join(row))
    _write_text(path, "\n".join(lines) + "\n")


def _write_dataset_csv(ds: Dataset, path) -> None:
    if ds.labels is not None:
        header = [f"x{i}" for i in range(1, ds.d + 1)] + ["label"]
        lines = [",".join(header)]
        for row, lab in zip(ds.x, ds.labels):
            lines.append(",".join([repr(float(v)) for v in row] + [str(int(lab))]))
    else:
        header = (["x"] if ds.d == 1 else [f"x{i}" for i in range(1, ds.d + 1)]) + ["y"]
        lines = [",".join(header)]
        for row, y in zip(ds.x, ds.y):
            lines.append(",".join([repr(float(v)) for v in row] + [repr(float(y))]))
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Config-file merging


def _load_config_file(path, allowed_keys) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaMismatch(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaMismatch(f"config file {path} must hold a JSON object")
    unknown = set(raw) - set(allowed_keys)
    if unknown:
        raise SchemaMismatch(f"unknown config keys: {sorted(unknown)}")
    return raw


def _resolve(ns, file_cfg, key, default=None, required=False):
    """Flag value if given, else config-file value, else default."""
    value = getattr(ns, key, None)
    if value is None:
        value = file_cfg.get(key, default)
    if value is None and required:
        raise SchemaMismatch(f"missing required parameter {key!r}")
    return value


def _parse_grid_spec(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise SchemaMismatch(f"grid spec must be 'min:max:count', got {spec!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise SchemaMismatch(f"unreadable grid spec {spec!r}") from exc
    if count < 1 or hi <= lo:
        raise SchemaMismatch(f"grid spec needs max > min and count >= 1: {spec!r}")
    return np.linspace(lo, hi, count)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_mle(ns) -> ReportEnvelope:
    file_cfg = _load_config_file(ns.config, ("input", "family", "labels", "level", "out")) if ns.config else {}
    path = _resolve(ns, file_cfg, "input", required=True)
    family_kind = _resolve(ns, file_cfg, "family", required=True)
    level = float(_resolve(ns, file_cfg, "level", default=0.95))
    n_labels = _resolve(ns, file_cfg, "labels")

    ds = parse_dataset(path, "sample")
    data = ds.x[:, 0]
    if family_kind == "bernoulli":
        family = lik_mod.bernoulli()
    elif family_kind == "gaussian":
        family = lik_mod.gaussian()
    elif family_kind == "categorical":
        if n_labels is None:
            raise SchemaMismatch("categorical family needs --labels")
        family = lik_mod.categorical(int(n_labels))
    else:
        raise SchemaMismatch(f"unknown family {family_kind!r}")

    result = lik_mod.mle_fit(family, data)
    region = lik_mod.confidence_region(result, level)
    config = {
        "input": str(path),
        "family": family_kind,
        "labels": None if n_labels is None else int(n_labels),
        "level": level,
    }
    report = {
        "theta_hat": [float(v) for v in result.theta_hat],
        "loglik_at_max": float(result.loglik_at_max),
        "fisher": [[float(v) for v in row] for row in result.fisher],
        "aic": float(result.aic),
        "confidence_region": {
            "level": region.level,
            "intervals": [[lo, hi] for lo, hi in region.intervals],
            "ellipsoid_radius": region.ellipsoid_radius,
        },
    }
    diagnostics = {"n_observations": int(data.size)}
    return ReportEnvelope(SCHEMA_VERSION, "mle", config, [report], diagnostics)


_GP_KEYS = (
    "train", "kernel", "signal_variance", "lengthscale", "bias",
    "noise_variance", "grid", "queries", "center_targets", "out", "curves",
)


def _cmd_gp(ns) -> ReportEnvelope:
    file_cfg = _load_config_file(ns.config, _GP_KEYS) if ns.config else {}
    train_path = _resolve(ns, file_cfg, "train", required=True)
    kind = _resolve(ns, file_cfg, "kernel", default="rbf")
    s2 = float(_resolve(ns, file_cfg, "signal_variance", default=1.0))
    lengthscale = _resolve(ns, file_cfg, "lengthscale")
    bias = _resolve(ns, file_cfg, "bias")
    noise = float(_resolve(ns, file_cfg, "noise_variance", required=True))
    grid_spec = _resolve(ns, file_cfg, "grid")
    queries_path = _resolve(ns, file_cfg, "queries")
    center = bool(_resolve(ns, file_cfg, "center_targets", default=False))
    curves_path = _resolve(ns, file_cfg, "curves")

    if kind == "rbf":
        kernel = gp_mod.Kernel("rbf", signal_variance=s2,
                               lengthscale=None if lengthscale is None else float(lengthscale))
    elif kind == "linear":
        kernel = gp_mod.Kernel("linear", signal_variance=s2,
                               bias=0.0 if bias is None else float(bias))
    elif kind == "constant":
        kernel = gp_mod.Kernel("constant", signal_variance=s2)
    else:
        raise SchemaMismatch(f"unknown kernel {kind!r}")

    train = parse_dataset(train_path, "xy")
    if (grid_spec is None) == (queries_path is None):
        raise SchemaMismatch("provide exactly one of --grid or --queries")
    if grid_spec is not None:
        if train.d != 1:
            raise SchemaMismatch("--grid needs one-dimensional features; use --queries")
        queries = _parse_grid_spec(grid_spec).reshape(-1, 1)
    else:
        queries = parse_dataset(queries_path, "queries").x
        if queries.shape[1] != train.d:
            raise SchemaMismatch(
                f"queries have dimension {queries.shape[1]}, training data {train.d}"
            )

    offset = float(train.y.mean()) if center and train.n else 0.0
    model = gp_mod.gp_fit(train.x, train.y - offset, kernel, noise)

    reports, means, rows = [], [], []
    for q in queries:
        post = gp_mod.gp_predict(model, q)
        rep = gp_mod.gp_decompose(post)
        reports.append(rep)
        means.append(post.mean + offset)
        rows.append({"query": [float(v) for v in q], "mu": float(post.mean + offset),
                     **rep.to_dict()})

    config = {
        "train": str(train_path),
        "kernel": kind,
        "signal_variance": s2,
        "lengthscale": None if lengthscale is None else float(lengthscale),
        "bias": None if bias is None else float(bias),
        "noise_variance": noise,
        "grid": grid_spec,
        "queries": None if queries_path is None else str(queries_path),
        "center_targets": center,
    }
    diagnostics = {
        "n_train": int(train.n),
        "jitter_used": 0.0 if model.factor is None else float(model.factor.jitter_used),
        "target_offset": offset,
    }
    envelope = ReportEnvelope(SCHEMA_VERSION, "gp", config, rows, diagnostics)
    if curves_path:
        emit_curves(queries, reports, curves_path, means=means)
    return envelope


def _cmd_entropy(ns) -> ReportEnvelope:
    file_cfg = _load_config_file(ns.config, ("ensemble", "out")) if ns.config else {}
    path = _resolve(ns, file_cfg, "ensemble", required=True)
    ens = parse_ensemble(path)
    report = entropy_mod.decompose(ens)
    config = {"ensemble": str(path)}
    diagnostics = {"n_members": ens.n_members, "n_labels": ens.n_labels}
    return ReportEnvelope(SCHEMA_VERSION, "entropy", config, [report.to_dict()], diagnostics)


_BNE_MODEL_KEYS = (
    "prior_beta_variance", "noise_variance", "kernel_delta", "kernel_g",
    "y_grid", "knots", "probit_grid", "sampler", "nesting",
)


def _kernel_from_dict(spec, what) -> gp_mod.Kernel:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SchemaMismatch(f"{what} must be an object with a 'kind' key")
    allowed = {"kind", "signal_variance", "lengthscale", "bias"}
    unknown = set(spec) - allowed
    if unknown:
        raise SchemaMismatch(f"unknown {what} keys: {sorted(unknown)}")
    return gp_mod.Kernel(
        spec["kind"],
        signal_variance=float(spec.get("signal_variance", 1.0)),
        lengthscale=None if spec.get("lengthscale") is None else float(spec["lengthscale"]),
        bias=None if spec.get("bias") is None else float(spec["bias"]),
    )


def _axis_from_spec(spec, what, auto_bounds=None) -> np.ndarray:
    """Grid values from an explicit list or a {min, max, count} object;
    bounds may be omitted when an automatic range is available."""
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if not isinstance(spec, dict):
        raise SchemaMismatch(f"{what} must be a list or a {{min,max,count}} object")
    unknown = set(spec) - {"min", "max", "count"}
    if unknown:
        raise SchemaMismatch(f"unknown {what} keys: {sorted(unknown)}")
    count = int(spec.get("count", 0))
    if count < 2:
        raise SchemaMismatch(f"{what} needs count >= 2")
    if "min" in spec and "max" in spec:
        lo, hi = float(spec["min"]), float(spec["max"])
    elif auto_bounds is not None:
        lo, hi = auto_bounds
    else:
        raise SchemaMismatch(f"{what} needs explicit min and max")
    if hi <= lo:
        raise SchemaMismatch(f"{what} needs max > min")
    return np.linspace(lo, hi, count)


def _cmd_bne(ns) -> ReportEnvelope:
    keys = ("train", "queries", "out") + _BNE_MODEL_KEYS
    file_cfg = _load_config_file(ns.config, keys)
    train_path = _resolve(ns, file_cfg, "train", required=True)
    queries_path = _resolve(ns, file_cfg, "queries", required=True)

    nesting = file_cfg.get("nesting", "M2")
    if nesting != "M2":
        raise SchemaMismatch(
            "the CLI always reports the full nested decomposition; "
            "config nesting must be 'M2' (or omitted)"
        )

    train = parse_dataset(train_path, "bne_train")
    queries = parse_dataset(queries_path, "bne_queries")
    predictors = bne_mod.TabulatedPredictors(
        train_x=train.x, train_f=train.base_pred,
        query_x=queries.x, query_f=queries.base_pred,
    )

    for key in ("prior_beta_variance", "noise_variance", "kernel_delta", "kernel_g", "sampler"):
        if key not in file_cfg:
            raise SchemaMismatch(f"missing required config key {key!r}")
    noise = float(file_cfg["noise_variance"])
    sigma = float(np.sqrt(noise))
    y_spec = file_cfg.get("y_grid", {"count": 81})
    y_grid = _axis_from_spec(
        y_spec, "y_grid",
        auto_bounds=(float(train.y.min() - 3.0 * sigma), float(train.y.max() + 3.0 * sigma)),
    )
    knots_spec = file_cfg.get("knots", {"count": 9})
    knots = _axis_from_spec(
        knots_spec, "knots",
        auto_bounds=(float(train.x.min()), float(train.x.max())) if train.d == 1 else None,
    )
    probit_spec = file_cfg.get("probit_grid", {"min": -4.0, "max": 4.0, "count": 17})
    probit_grid = _axis_from_spec(probit_spec, "probit_grid")

    sampler_raw = file_cfg["sampler"]
    allowed = {"n_samples", "burn_in", "proposal_scales", "seed"}
    unknown = set(sampler_raw) - allowed
    if unknown:
        raise SchemaMismatch(f"unknown sampler keys: {sorted(unknown)}")
    scales_raw = sampler_raw.get("proposal_scales", {})
    unknown = set(scales_raw) - {"beta", "delta", "g"}
    if unknown:
        raise SchemaMismatch(f"unknown proposal_scales keys: {sorted(unknown)}")
    sampler = bne_mod.SamplerSettings(
        n_samples=int(sampler_raw.get("n_samples", 1000)),
        burn_in=None if sampler_raw.get("burn_in") is None else int(sampler_raw["burn_in"]),
        proposal_scales=bne_mod.ProposalScales(
            beta=float(scales_raw.get("beta", 0.1)),
            delta=float(scales_raw.get("delta", 0.1)),
            g=float(scales_raw.get("g", 0.05)),
        ),
        seed=int(sampler_raw.get("seed", 0)),
    )

    config = bne_mod.BneConfig(
        predictors=predictors,
        prior_beta_variance=float(file_cfg["prior_beta_variance"]),
        kernel_delta=_kernel_from_dict(file_cfg["kernel_delta"], "kernel_delta"),
        kernel_g=_kernel_from_dict(file_cfg["kernel_g"], "kernel_g"),
        noise_variance=noise,
        y_grid=y_grid,
        knots=knots,
        sampler=sampler,
        nesting="M2",
        probit_grid=probit_grid,
    )
    nested = bne_mod.make_nested_configs(config)
    posteriors = {
        name: bne_mod.bne_sample_posterior(cfg, train.x, train.y)
        for name, cfg in nested.items()
    }

    rows = []
    for q in queries.x:
        rep = bne_mod.epistemic_report_from_posteriors(posteriors, nested, q)
        rows.append({"query": [float(v) for v in q], **rep.to_dict()})

    config_echo = {
        "train": str(train_path),
        "queries": str(queries_path),
        "prior_beta_variance": config.prior_beta_variance,
        "noise_variance": config.noise_variance,
        "kernel_delta": file_cfg["kernel_delta"],
        "kernel_g": file_cfg["kernel_g"],
        "y_grid": [float(v) for v in config.y_grid],
        "knots": [[float(v) for v in row] for row in config.knots],
        "probit_grid": [float(v) for v in config.probit_grid],
        "sampler": {
            "n_samples": sampler.n_samples,
            "burn_in": sampler.effective_burn_in,
            "proposal_scales": {
                "beta": sampler.proposal_scales.beta,
                "delta": sampler.proposal_scales.delta,
                "g": sampler.proposal_scales.g,
            },
            "seed": sampler.seed,
        },
    }
    diagnostics = {
        name: {
            "acceptance_rate": post.acceptance_rate,
            "block_acceptance": dict(sorted(post.block_acceptance.items())),
            **{k: (float(v) if isinstance(v, float) else v) for k, v in post.diagnostics.items()},
        }
        for name, post in posteriors.items()
    }
    return ReportEnvelope(SCHEMA_VERSION, "bne", config_echo, rows, diagnostics)


def _cmd_simgen(ns) -> None:
    file_cfg = _load_config_file(ns.config, ("scenario", "n", "seed", "out")) if ns.config else {}
    alias = _resolve(ns, file_cfg, "scenario", required=True)
    kind = _SCENARIO_ALIASES.get(alias, alias)
    n = int(_resolve(ns, file_cfg, "n", required=True))
    seed = int(_resolve(ns, file_cfg, "seed", default=0))
    out = _resolve(ns, file_cfg, "out", required=True)
    scenario = simgen_mod.make_scenario(kind, n, seed)
    ds = simgen_mod.generate(scenario)
    _write_dataset_csv(ds, out)
    return None


# ---------------------------------------------------------------------------
# Parser and entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uqd",
        description="Compute and decompose predictive uncertainty "
        "(aleatoric vs epistemic, with parametric and structural parts).",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mle", help="maximum-likelihood fit with information and AIC")
    p.add_argument("--input", help="single-column observation CSV")
    p.add_argument("--family", choices=("bernoulli", "gaussian", "categorical"))
    p.add_argument("--labels", type=int, help="label count for the categorical family")
    p.add_argument("--level", type=float, help="confidence level (default 0.95)")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out", help="report JSON path")

    p = sub.add_parser("gp", help="exact GP regression with the variance split")
    p.add_argument("--train", help="training CSV: feature columns plus y")
    p.add_argument("--kernel", choices=("rbf", "linear", "constant"))
    p.add_argument("--signal-variance", dest="signal_variance", type=float)
    p.add_argument("--lengthscale", type=float)
    p.add_argument("--bias", type=float)
    p.add_argument("--noise-variance", dest="noise_variance", type=float)
    p.add_argument("--grid", help="query grid 'min:max:count' (1-D features)")
    p.add_argument("--queries", help="query CSV with feature columns")
    p.add_argument("--center-targets", dest="center_targets", action="store_const",
                   const=True, help="subtract the training-target mean before fitting "
                   "(added back to predictive means)")
    p.add_argument("--curves", help="per-query band CSV path")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out", help="report JSON path")

    p = sub.add_parser("entropy", help="entropy decomposition of an ensemble CSV")
    p.add_argument("--ensemble", help="CSV: one member per row, optional 'weight' column")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out", help="report JSON path")

    p = sub.add_parser("bne", help="Bayesian nonparametric ensemble decomposition")
    p.add_argument("--train", help="training CSV: features, y, f1..fK")
    p.add_argument("--queries", help="query CSV: features, f1..fK")
    p.add_argument("--config", required=True, help="JSON model/sampler config")
    p.add_argument("--out", help="report JSON path")

    p = sub.add_parser("simgen", help="generate a seeded synthetic dataset")
    p.add_argument("--scenario", choices=tuple(_SCENARIO_ALIASES) + tuple(simgen_mod.KINDS))
    p.add_argument("--n", type=int, help="number of points")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--out", help="output CSV path")

    return parser


_HANDLERS = {
    "mle": _cmd_mle,
    "gp": _cmd_gp,
    "entropy": _cmd_entropy,
    "bne": _cmd_bne,
    "simgen": _cmd_simgen,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        envelope = _HANDLERS[ns.subcommand](ns)
        if envelope is not None:
            if ns.out:
                _write_text(ns.out, envelope.to_json())
            else:
                sys.stdout.write(envelope.to_json())
    except UqdError as exc:
        _emit_error(exc)
        return exc.exit_code
    except OSError as exc:
        _emit_error(exc)
        return 2
    elapsed = time.perf_counter() - started
    print(f"[uqd] {ns.subcommand} finished in {elapsed:.3f}s", file=sys.stderr)
    return 0


def _emit_error(exc) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: ``fim``, ``fit``, ``simulate``, ``check-conditions``.
Configs are JSON documents (conventionally ``.cfg``); parsing is strict,
unknown keys are errors.  Every run that writes files also writes a
``manifest.json`` sufficient to reproduce it: config hash (stable under
key reordering), effective seed, tool version, timestamps and output
paths.

Exit codes: 0 ok, 2 config error, 3 degenerate model input,
4 non-identifiable data, 5 runtime failure.
"""

import argparse
import datetime
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, fisher, models, montecarlo
from .estimator import FitConfig, fit
from .exceptions import (
    BitGlmError,
    ConfigError,
    DegenerateLikelihood,
    DegenerateThreshold,
    DomainError,
    ExperimentFailure,
    NonIdentifiable,
    NumericalError,
)
from .types import CensoredDataset, DesignSet

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_NON_IDENTIFIABLE = 4
EXIT_RUNTIME = 5


# ---------------------------------------------------------------------------
# Config loading and validation
# ---------------------------------------------------------------------------

def load_json_config(path):
    """Parse a JSON config file, reporting line/column on syntax errors."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(
            f"{path}: invalid config syntax: {err.msg}",
            location=f"line {err.lineno}, column {err.colno}",
        ) from err
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def config_hash(doc):
    """sha256 of the canonical (sorted-key) JSON encoding."""
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _check_keys(obj, path, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object at {path}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown}", location=path)
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"missing required key(s) {missing}", location=path)


def _floats(value, count, path):
    """A scalar (broadcast to count) or an explicit list of floats."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        if count is None:
            raise ConfigError("scalar needs an explicit 'count'", location=path)
        return np.full(int(count), float(value))
    if isinstance(value, list) and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        return np.asarray(value, dtype=float)
    raise ConfigError("expected a number or a list of numbers", location=path)


def build_model_instance(doc, path="model"):
    """(family, theta0, designs) from a model+thresholds config section."""
    _check_keys(doc, "<root>", required=("model", "thresholds"), optional=("count", "fit"))
    count = doc.get("count")
    model = doc["model"]
    _check_keys(
        model,
        path,
        required=("name",),
        optional=("alpha", "sigma", "theta", "weights", "means", "covariates"),
    )
    name = model["name"]
    if name not in models.REGISTRY:
        raise ConfigError(f"unknown model {name!r}", location=f"{path}.name")
    taus = _floats(doc["thresholds"], count, "thresholds")
    n = taus.shape[0]

    def need(key):
        if key not in model:
            raise ConfigError(f"model {name!r} requires {key!r}", location=path)
        return model[key]

    if name == "gaussian-case1":
        family = models.GaussianCase1(
            _floats(need("weights"), n, f"{path}.weights"), sigma=float(need("sigma"))
        )
        theta0 = np.array([float(need("alpha"))])
    elif name == "gaussian-case2":
        family = models.GaussianCase2(means=_floats(need("means"), n, f"{path}.means"))
        theta0 = np.array([1.0 / float(need("sigma")) ** 2])
    elif name == "gaussian-case3":
        family = models.GaussianCase3(_floats(need("weights"), n, f"{path}.weights"))
        theta0 = models.GaussianCase3.natural_from_alpha_sigma2(
            float(need("alpha")), float(need("sigma")) ** 2
        )
    else:  # poisson
        family = models.PoissonModel(
            covariates=_floats(need("covariates"), n, f"{path}.covariates")
        )
        theta0 = np.array([float(need("theta"))])
    per_obs = getattr(family, "weights", None)
    if per_obs is None:
        per_obs = getattr(family, "means", getattr(family, "covariates", None))
    if per_obs is not None and per_obs.shape[0] != n:
        raise ConfigError(
            f"per-observation arrays list {per_obs.shape[0]} entries but there "
            f"are {n} thresholds",
            location=path,
        )
    return family, theta0, family.design_set(taus)


def _build_fit_config(doc, path="fit", seed_override=None):
    _check_keys(
        doc,
        path,
        optional=(
            "max_iterations",
            "gradient_tolerance",
            "multistart_count",
            "seed",
            "backtracking_factor",
            "sufficient_increase",
        ),
    )
    kwargs = dict(doc)
    if seed_override is not None:
        kwargs["seed"] = int(seed_override)
    try:
        return FitConfig(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err), location=path) from err


_RULE_KEYS = ("kind", "value", "values", "probabilities", "low", "high", "mu", "sd")


def _build_weights_rule(doc, path):
    _check_keys(doc, path, required=("kind",), optional=("value", "values", "low", "high"))
    tupled = {k: (tuple(v) if isinstance(v, list) else v) for k, v in doc.items()}
    return montecarlo.WeightsRule(**tupled)


def _build_threshold_rule(doc, path):
    _check_keys(doc, path, required=("kind",), optional=_RULE_KEYS[1:])
    tupled = {k: (tuple(v) if isinstance(v, list) else v) for k, v in doc.items()}
    return montecarlo.ThresholdRule(**tupled)


_EXPERIMENT_KEYS = dict(
    required=(
        "model",
        "true_params",
        "weights",
        "thresholds",
        "sample_sizes",
        "trials",
        "seed",
    ),
    optional=("name", "error_metric", "estimator", "fit", "max_failure_fraction"),
)


def build_experiment(doc, path="experiment", seed_override=None):
    """(name, ExperimentConfig) from one experiment section."""
    _check_keys(doc, path, **_EXPERIMENT_KEYS)
    name = doc.get("name", "experiment")
    if not isinstance(doc["true_params"], dict):
        raise ConfigError("true_params must be an object", location=f"{path}.true_params")
    fit_cfg = _build_fit_config(doc.get("fit", {}), f"{path}.fit")
    try:
        config = montecarlo.ExperimentConfig(
            model=doc["model"],
            true_params={k: float(v) for k, v in doc["true_params"].items()},
            weights=_build_weights_rule(doc["weights"], f"{path}.weights"),
            thresholds=_build_threshold_rule(doc["thresholds"], f"{path}.thresholds"),
            sample_sizes=tuple(doc["sample_sizes"]),
            trials=int(doc["trials"]),
            seed=int(seed_override if seed_override is not None else doc["seed"]),
            error_metric=doc.get("error_metric", "moment-coordinates"),
            estimator=doc.get("estimator", "censored"),
            fit=fit_cfg,
            max_failure_fraction=float(doc.get("max_failure_fraction", 0.05)),
        )
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err), location=path) from err
    return name, config


def load_experiments(doc, seed_override=None):
    """All experiment sections of a simulate config, in file order."""
    if "experiment" in doc:
        _check_keys(doc, "<root>", required=("experiment",))
        return [build_experiment(doc["experiment"], "experiment", seed_override)]
    _check_keys(doc, "<root>", required=("experiments",))
    if not isinstance(doc["experiments"], list) or not doc["experiments"]:
        raise ConfigError("experiments must be a non-empty list", location="experiments")
    out = []
    for i, section in enumerate(doc["experiments"]):
        out.append(build_experiment(section, f"experiments[{i}]", seed_override))
    names = [n for n, _ in out]
    if len(set(names)) != len(names):
        raise ConfigError("experiment names must be unique", location="experiments")
    return out


# ---------------------------------------------------------------------------
# Data files
# ---------------------------------------------------------------------------

def load_data_file(path, family_section):
    """Read observations: a 'd k' header line, then 'b tau v11 ... vdk' rows.

    ``family_section`` is the config's model object; it supplies fixed
    structure (sigma, means) that the row format does not carry.
    Returns (family, CensoredDataset).
    """
    rows = []
    header = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise ConfigError(
                    f"{path}: header must be 'd k'", location=f"line {lineno}"
                )
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError as err:
                raise ConfigError(
                    f"{path}: header must hold two integers", location=f"line {lineno}"
                ) from err
            continue
        d, k = header
        if len(fields) != 2 + d * k:
            raise ConfigError(
                f"{path}: expected {2 + d * k} fields (b tau v11..v{d}{k})",
                location=f"line {lineno}",
            )
        try:
            b = int(fields[0])
            vals = [float(v) for v in fields[1:]]
        except ValueError as err:
            raise ConfigError(f"{path}: malformed number", location=f"line {lineno}") from err
        if b not in (-1, 1):
            raise ConfigError(f"{path}: bit must be -1 or +1", location=f"line {lineno}")
        rows.append((b, vals[0], np.array(vals[1:]).reshape(d, k)))
    if header is None or not rows:
        raise ConfigError(f"{path}: no observations found")

    d, k = header
    bits = np.array([b for b, _, _ in rows])
    taus = np.array([t for _, t, _ in rows])
    V = np.stack([v for _, _, v in rows])
    n = bits.shape[0]

    name = family_section["name"]
    if name == "gaussian-case1":
        sigma = float(family_section["sigma"])
        family = models.GaussianCase1(V[:, 0, 0] * sigma**2, sigma=sigma)
        designs = DesignSet(V, taus)
    elif name == "gaussian-case2":
        means = _floats(family_section["means"], n, "model.means")
        if means.shape[0] != n:
            raise ConfigError(f"model.means must list {n} entries (one per data row)")
        family = models.GaussianCase2(means=means)
        designs = DesignSet(V, taus, aux=means)
    elif name == "gaussian-case3":
        family = models.GaussianCase3(V[:, 0, 0])
        designs = DesignSet(V, taus)
    elif name == "poisson":
        family = models.PoissonModel(covariates=V[:, 0, 0])
        designs = DesignSet(V, taus)
    else:
        raise ConfigError(f"unknown model {name!r}", location="model.name")
    if (designs.d, designs.k) != (family.d, family.k):
        raise ConfigError(
            f"data file declares d={d}, k={k} but model {name!r} needs "
            f"d={family.d}, k={family.k}"
        )
    family.check_designs(designs)
    return family, CensoredDataset(bits, designs)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _utcnow():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


class _Manifest:
    def __init__(self, command, doc, path, seed):
        self.payload = {
            "tool": "bitglm",
            "version": __version__,
            "command": command,
            "config_path": str(path),
            "config_hash": config_hash(doc),
            "seed": seed,
            "started_at": _utcnow(),
            "finished_at": None,
            "outputs": [],
        }

    def add_output(self, path):
        self.payload["outputs"].append(str(path))

    def write(self, out_dir):
        self.payload["finished_at"] = _utcnow()
        target = Path(out_dir) / "manifest.json"
        target.write_text(json.dumps(self.payload, indent=2) + "\n", encoding="utf-8")
        return target


def _matrix_json(m):
    return [[float(v) for v in row] for row in np.atleast_2d(m)]


def _print(s=""):
    sys.stdout.write(s + "\n")


def _emit(args, payload, human_lines):
    if args.json:
        _print(json.dumps(payload, indent=2))
    else:
        for line in human_lines:
            _print(line)


def _write_json_report(args, manifest, payload, filename):
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        target = out_dir / filename
        target.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        manifest.add_output(target.name)
        manifest.write(out_dir)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _parse_sweep(spec):
    try:
        idx, lo, hi, step = spec.split(":")
        idx = int(idx)
        lo, hi, step = float(lo), float(hi), float(step)
        if step <= 0 or hi < lo or idx < 0:
            raise ValueError
    except ValueError:
        raise ConfigError(
            "--sweep expects INDEX:LO:HI:STEP with STEP > 0 and HI >= LO",
            location="--sweep",
        ) from None
    return idx, lo, hi, step


def _threshold_sweep(family, theta0, designs, spec):
    """Censored information over a grid of one design's threshold.

    No closed threshold-optimality rule exists beyond the known-variance
    mean model, so sweeps are the supported way to explore thresholds for
    the other families.  Reports the information value for scalar models
    and the determinant for larger ones.
    """
    idx, lo, hi, step = spec
    if idx >= designs.n:
        raise ConfigError(f"--sweep index {idx} out of range (n={designs.n})")
    grid = np.arange(lo, hi + step / 2, step)
    rows = []
    for tau in grid:
        taus = designs.taus.copy()
        taus[idx] = tau
        swept = type(designs)(designs.V, taus, designs.aux)
        try:
            r = fisher.fim_censored(family, theta0, swept)
        except (DegenerateThreshold, NumericalError):
            continue
        value = float(r.matrix[0, 0]) if r.k == 1 else r.determinant
        rows.append((float(tau), value))
    return rows


def cmd_fim(args):
    doc = load_json_config(args.config)
    family, theta0, designs = build_model_instance(doc)
    if args.sweep:
        rows = _threshold_sweep(family, theta0, designs, _parse_sweep(args.sweep))
        label = "information" if family.k == 1 else "det_information"
        payload = {"model": family.name, "sweep": [[t, v] for t, v in rows], "value": label}
        if args.json:
            _print(json.dumps(payload, indent=2))
        else:
            _print(f"tau,{label}")
            for t, v in rows:
                _print(f"{t!r},{v!r}")
        manifest = _Manifest("fim", doc, args.config, None)
        _write_json_report(args, manifest, payload, "fim-sweep.json")
        return EXIT_OK
    report = fisher.dpi_check(family, theta0, designs)
    j, i = report.censored, report.uncensored
    payload = {
        "model": family.name,
        "k": j.k,
        "censored": _matrix_json(j.matrix),
        "det_censored": j.determinant,
        "min_eigenvalue_censored": j.min_eigenvalue,
        "uncensored": _matrix_json(i.matrix),
        "det_uncensored": i.determinant,
        "min_eigenvalue_uncensored": i.min_eigenvalue,
        "dpi_min_eigenvalue_gap": report.min_eigenvalue_gap,
        "dpi_passed": report.passed,
    }
    if j.k == 1:
        payload["censored_to_uncensored_ratio"] = float(j.matrix[0, 0] / i.matrix[0, 0])
    lines = [
        f"model: {family.name} (n={designs.n})",
        f"censored information:   {np.array2string(j.matrix, precision=10)}",
        f"  det={j.determinant:.10g}  min eigenvalue={j.min_eigenvalue:.10g}",
        f"uncensored information: {np.array2string(i.matrix, precision=10)}",
        f"  det={i.determinant:.10g}  min eigenvalue={i.min_eigenvalue:.10g}",
        f"information gap min eigenvalue: {report.min_eigenvalue_gap:.3e} "
        f"({'ok' if report.passed else 'VIOLATED'})",
    ]
    if "censored_to_uncensored_ratio" in payload:
        lines.append(f"censored/uncensored ratio: {payload['censored_to_uncensored_ratio']:.12g}")
    _emit(args, payload, lines)
    manifest = _Manifest("fim", doc, args.config, None)
    _write_json_report(args, manifest, payload, "fim.json")
    return EXIT_OK


def cmd_fit(args):
    doc = load_json_config(args.config)
    _check_keys(doc, "<root>", required=("model",), optional=("fit",))
    family, data = load_data_file(args.data, doc["model"])
    fit_cfg = _build_fit_config(doc.get("fit", {}), "fit", seed_override=args.seed)
    result = fit(family, data, fit_cfg)
    moment = family.to_moment(result.theta_hat.values)
    payload = {
        "model": family.name,
        "theta_hat": [float(v) for v in result.theta_hat.values],
        "moment_labels": list(family.moment_labels()),
        "moment_values": [float(v) for v in moment],
        "converged": result.converged,
        "status": result.status,
        "iterations": result.iterations,
        "final_score_norm": result.final_score_norm,
        "log_likelihood": result.log_likelihood,
        "observed_information": _matrix_json(result.observed_information),
    }
    lines = [
        f"model: {family.name} (n={data.n})",
        f"theta_hat (natural): {np.array2string(result.theta_hat.values, precision=10)}",
        "estimate ("
        + ", ".join(family.moment_labels())
        + "): "
        + np.array2string(moment, precision=10),
        f"status: {result.status} after {result.iterations} iterations "
        f"(|score|_inf = {result.final_score_norm:.3e})",
        f"log-likelihood: {result.log_likelihood:.10g}",
        f"observed information: {np.array2string(result.observed_information, precision=6)}",
    ]
    _emit(args, payload, lines)
    manifest = _Manifest("fit", doc, args.config, fit_cfg.seed)
    _write_json_report(args, manifest, payload, "fit.json")
    return EXIT_OK


def cmd_simulate(args):
    doc = load_json_config(args.config)
    experiments = load_experiments(doc, seed_override=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(
        "simulate", doc, args.config, args.seed if args.seed is not None else None
    )
    for name, config in experiments:
        table = montecarlo.run_mse_experiment(config)
        csv_text = table.to_csv()
        target = out_dir / f"{name}.csv"
        target.write_text(csv_text, encoding="utf-8")
        manifest.add_output(target.name)
        _print(f"[{name}] model={config.model} trials={config.trials} -> {target}")
        for line in csv_text.strip().splitlines():
            _print("  " + line)
    path = manifest.write(out_dir)
    _print(f"manifest: {path}")
    return EXIT_OK


def cmd_check_conditions(args):
    doc = load_json_config(args.config)
    family, theta0, designs = build_model_instance(doc)
    report = montecarlo.check_consistency_conditions(family, theta0, designs)
    payload = {
        "model": family.name,
        "max_third_abs_moment": report.max_third_abs_moment,
        "max_design_norm": report.max_design_norm,
        "avg_information": _matrix_json(report.avg_information),
        "min_eigenvalue": report.min_eigenvalue,
        "determinant": report.determinant,
        "prefix_drift": report.prefix_drift,
        "moments_bounded": report.moments_bounded,
        "designs_bounded": report.designs_bounded,
        "information_positive": report.information_positive,
        "passed": report.passed,
    }
    def mark(ok):
        return "pass" if ok else "FAIL"

    lines = [
        f"model: {family.name} (n={designs.n})",
        f"(1) max E[||T||^3] = {report.max_third_abs_moment:.6g} "
        f"... {mark(report.moments_bounded)}",
        f"(2) max ||V||_inf  = {report.max_design_norm:.6g} "
        f"... {mark(report.designs_bounded)}",
        f"(3) avg information min eigenvalue = {report.min_eigenvalue:.6g}, "
        f"det = {report.determinant:.6g}, prefix drift = {report.prefix_drift:.3g} "
        f"... {mark(report.information_positive)}",
        f"overall: {mark(report.passed)}",
    ]
    if family.name == "gaussian-case3":
        posdef = models.information_positivity_check(family, theta0, designs.taus)
        payload["positive_definiteness_check"] = {
            "max_abs_weight": posdef.max_abs_weight,
            "nonzero_weight_fraction": posdef.nonzero_weight_fraction,
            "min_eigenvalue": posdef.min_eigenvalue,
            "passed": posdef.passed,
        }
        lines.append(
            f"positive-definiteness sufficient conditions: {mark(posdef.passed)} "
            f"(nonzero-weight fraction {posdef.nonzero_weight_fraction:.3g}, "
            f"min eigenvalue {posdef.min_eigenvalue:.6g})"
        )
    _emit(args, payload, lines)
    manifest = _Manifest("check-conditions", doc, args.config, None)
    _write_json_report(args, manifest, payload, "conditions.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bitglm",
        description="Estimation and information analysis for 1-bit censored GLMs.",
    )
    parser.add_argument("--version", action="version", version=f"bitglm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=False, out_required=False):
        p.add_argument("--config", required=True, help="JSON config file")
        if data:
            p.add_argument("--data", required=True, help="observation file")
        if out_required:
            p.add_argument("--out", required=True, help="output directory")
        else:
            p.add_argument("--out", default=None, help="output directory for reports")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--json", action="store_true", help="JSON on stdout")

    p = sub.add_parser("fim", help="censored/uncensored information report")
    common(p)
    p.add_argument(
        "--sweep",
        default=None,
        metavar="INDEX:LO:HI:STEP",
        help="sweep one design's threshold over a grid and report the "
        "censored information (determinant for multi-parameter models)",
    )
    p.set_defaults(func=cmd_fim)

    p = sub.add_parser("fit", help="maximum-likelihood fit of a data file")
    common(p, data=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="repeated-trial MSE experiment to CSV")
    common(p, out_required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-conditions", help="consistency-condition report")
    common(p)
    p.set_defaults(func=cmd_check_conditions)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        loc = f" ({err.location})" if err.location else ""
        print(f"config error{loc}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateThreshold, DegenerateLikelihood, NumericalError, DomainError) as err:
        print(f"degenerate model input: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NonIdentifiable as err:
        print(f"non-identifiable data: {err}", file=sys.stderr)
        return EXIT_NON_IDENTIFIABLE
    except (BitGlmError, ExperimentFailure, ValueError, np.linalg.LinAlgError) as err:
        print(f"runtime failure: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

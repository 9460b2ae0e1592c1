"""Command-line entry point: ``fockprint <command> [--config FILE] [flags]``.

Every command accepts ``--config`` pointing at a flat ``key = value`` file whose
keys are the long flag names (dashes or underscores). Flags given on the
command line win over the file; anything left unset takes its default.

Exit codes: 0 ok, 2 bad configuration or layout mismatch, 3 file I/O or file
format problems, 4 learner non-convergence after the retry budget.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import jsonio
from .analytic import N1_LABELS, analytic_invert_n1
from .circuit import (
    BipartiteState,
    SingleModeState,
    brute_force_output,
    entanglement_input,
    output_distribution,
    tomography_input,
)
from .dataset import (
    DEFAULT_ALPHA,
    DEFAULT_S_MAX,
    export_csv,
    generate_dataset,
    load_jsonl,
    sample_bipartite_state,
    sample_single_mode_state,
    save_jsonl,
    shared_circuit,
)
from .errors import (
    ConvergenceWarning,
    CorruptRecordError,
    DatasetIOError,
    FockprintError,
    FormatError,
    InconsistentProbabilitiesError,
    LayoutMismatchError,
)
from .experiment import evaluate, format_table, train
from .ml import KernelSpec, LearnerConfig, Pipeline
from .qmetrics import entanglement_entropy, fidelity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_CONVERGENCE = 4

KIND_ALIASES = {
    "tomography": "tomography",
    "tomo": "tomography",
    "entanglement": "entanglement",
    "ent": "entanglement",
}


class ConfigError(Exception):
    """Bad flag value, bad config file entry, or malformed state spec."""


class RunFailure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _kind(value: str) -> str:
    try:
        return KIND_ALIASES[value.strip().lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown kind {value!r}") from None


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {value!r}")


def _optional_int(value):
    if value is None or str(value).strip().lower() in ("", "none"):
        return None
    return int(value)


def _optional_float(value):
    if value is None or str(value).strip().lower() in ("", "none", "off"):
        return None
    return float(value)


class _Options:
    """Flag registry for one subcommand, remembering types and real defaults.

    Flags are registered with argparse default ``None`` so we can tell which
    ones the user actually passed before merging the config file.
    """

    def __init__(self, parser: argparse.ArgumentParser):
        self.parser = parser
        self.specs: dict[str, tuple] = {}
        parser.add_argument("--config", help="key = value file; command-line flags take precedence")

    def add(self, flag: str, type=str, default=None, help=None, **kw):
        dest = flag.lstrip("-").replace("-", "_")
        self.specs[dest] = (type, default)
        if type is _bool:
            self.parser.add_argument(flag, dest=dest, nargs="?", const=True, type=_bool, default=None, help=help, **kw)
        else:
            self.parser.add_argument(flag, dest=dest, type=type, default=None, help=help, **kw)


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file. Blank lines and ``#`` comments are skipped."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RunFailure(f"cannot read config {path}: {exc}", EXIT_IO) from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve(args: argparse.Namespace, options: _Options) -> argparse.Namespace:
    """Fill unset flags from the config file, then from defaults."""
    file_values = read_config(args.config) if args.config else {}
    for key, raw in file_values.items():
        if key not in options.specs:
            raise ConfigError(f"unknown config key {key!r} for this command")
        if getattr(args, key) is not None:
            continue
        conv = options.specs[key][0]
        try:
            setattr(args, key, conv(raw))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"config key {key}: {exc}") from exc
    for key, (_, default) in options.specs.items():
        if getattr(args, key) is None:
            setattr(args, key, default)
    return args


def run_config(args: argparse.Namespace, options: _Options, skip=()) -> dict:
    """Resolved settings that determine a run's output (paths excluded)."""
    return {k: getattr(args, k) for k in sorted(options.specs) if k not in skip}


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise RunFailure(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise RunFailure(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        return jsonio.loads(text)
    except ValueError as exc:
        raise RunFailure(f"{path} is not valid JSON: {exc}", EXIT_IO) from exc


def _load_dataset(path):
    try:
        return load_jsonl(path)
    except (DatasetIOError, FormatError, CorruptRecordError) as exc:
        raise RunFailure(str(exc), EXIT_IO) from exc


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) in (None, "")]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


# generate


def _setup_generate(sub):
    p = sub.add_parser("generate", help="simulate a dataset of probability patterns")
    o = _Options(p)
    o.add("--kind", _kind, "tomography", "tomography|tomo or entanglement|ent")
    o.add("--n", int, 1, "photon-number cutoff N of the unknown state")
    o.add("--count", int, 100, "number of samples")
    o.add("--alpha", float, DEFAULT_ALPHA, "coherent reference amplitude")
    o.add("--s-max", int, DEFAULT_S_MAX, "largest total photon number kept")
    o.add("--seed", int, 0, "base seed")
    o.add("--out", str, None, "output JSON Lines file")
    o.add("--csv", str, None, "optional CSV export")
    o.add("--workers", _optional_int, None, "worker threads (default from FOCKPRINT_THREADS)")
    p.set_defaults(handler=cmd_generate, options=o)


def cmd_generate(args, options) -> int:
    _require(args, "out")
    if args.count < 0 or args.n < 1 or args.s_max < 0 or args.alpha < 0:
        raise ConfigError("need count >= 0, n >= 1, s_max >= 0, alpha >= 0")
    data = generate_dataset(args.kind, args.n, args.count, args.alpha, args.s_max, args.seed, args.workers)
    save_jsonl(data, args.out)
    if args.csv:
        export_csv(data, args.csv)
    print(f"kind            {data.meta.kind}")
    print(f"samples         {len(data)}")
    print(f"feature length  {data.meta.feature_length}")
    if len(data):
        defect = 1.0 - data.X.sum(axis=1)
        print(f"truncation defect mean {defect.mean():.3e}  max {defect.max():.3e}")
    print(f"wrote {args.out}")
    return EXIT_OK


# train


def _add_learner_flags(o: _Options):
    o.add("--learner", str, "svr", "svr or ert", choices=["svr", "ert"])
    o.add("--kernel", str, "rbf", "SVR kernel", choices=["rbf", "linear", "polynomial"])
    o.add("--gamma", _optional_float, None, "kernel gamma (default 1/(features * variance))")
    o.add("--coef0", float, 1.0, "polynomial kernel offset")
    o.add("--degree", int, 3, "polynomial kernel degree")
    o.add("--C", float, 1.0, "SVR box constraint")
    o.add("--epsilon", float, 0.1, "SVR tube half-width")
    o.add("--tol", float, 1e-3, "SMO KKT tolerance")
    o.add("--max-passes", int, 100, "SMO iteration budget per sample")
    o.add("--retries", int, 2, "refits with a 4x larger budget before giving up")
    o.add("--n-trees", int, 100, "ERT tree count")
    o.add("--max-features", _optional_int, None, "ERT candidate features per split (default all)")
    o.add("--min-split", int, 2, "ERT minimum samples to split a node")
    o.add("--max-depth", _optional_int, None, "ERT depth limit (default unbounded)")
    o.add("--seed", int, 0, "learner seed")
    o.add("--pca", _optional_float, None, "PCA explained-variance target, e.g. 0.999")
    o.add("--standardize", _bool, None, "force standardisation on/off (default: on for SVR or PCA)")
    o.add("--workers", _optional_int, None, "worker threads")


def learner_config(args) -> LearnerConfig:
    try:
        kernel = KernelSpec(args.kernel, args.gamma, args.coef0, args.degree)
        return LearnerConfig(
            kind=args.learner,
            kernel=kernel,
            C=args.C,
            epsilon=args.epsilon,
            tol=args.tol,
            max_passes=args.max_passes,
            n_trees=args.n_trees,
            max_features=args.max_features,
            min_samples_split=args.min_split,
            max_depth=args.max_depth,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _setup_train(sub):
    p = sub.add_parser("train", help="fit a learner on a dataset")
    o = _Options(p)
    o.add("--data", str, None, "training dataset (JSON Lines)")
    o.add("--out", str, None, "model file to write")
    o.add("--report", str, None, "optional JSON training report")
    _add_learner_flags(o)
    p.set_defaults(handler=cmd_train, options=o)


def cmd_train(args, options) -> int:
    _require(args, "data", "out")
    data = _load_dataset(args.data)
    if len(data) < 2:
        raise ConfigError("training needs at least two samples")
    config = learner_config(args)
    if args.pca is not None and not 0.0 < args.pca <= 1.0:
        raise ConfigError("--pca must lie in (0, 1]")
    attempt = 0
    while True:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            model = train(data, config, pca_variance=args.pca, standardize=args.standardize, workers=args.workers)
        if model.converged or attempt >= args.retries:
            break
        attempt += 1
        config = replace(config, max_passes=config.max_passes * 4)
        print(f"not converged; retry {attempt} with max_passes={config.max_passes}", file=sys.stderr)

    _write_text(args.out, jsonio.dumps(model.to_dict()) + "\n")
    report = evaluate(model, data)
    report["split"] = "train"
    report["converged"] = model.converged
    report["run"] = run_config(args, options, skip=("data", "out", "report", "config", "workers"))
    if args.report:
        _write_text(args.report, jsonio.dumps(report) + "\n")
    print(f"learner {config.kind}; {len(model.models)} target models", end="")
    if model.pca is not None:
        print(f"; PCA keeps {model.pca.n_components} of {data.meta.feature_length} features", end="")
    print()
    print(format_table([report], ["train"]))
    print(f"wrote {args.out}")
    if not model.converged:
        print("error: SMO did not converge within the retry budget", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


# eval


def _setup_eval(sub):
    p = sub.add_parser("eval", help="score a model on a dataset")
    o = _Options(p)
    o.add("--model", str, None, "model file")
    o.add("--data", str, None, "evaluation dataset (JSON Lines)")
    o.add("--out", str, None, "JSON report file")
    o.add("--label", str, "test", "column header for the table")
    p.set_defaults(handler=cmd_eval, options=o)


def _load_model(path) -> Pipeline:
    raw = _read_json(path)
    try:
        return Pipeline.from_dict(raw)
    except FormatError as exc:
        raise RunFailure(f"{path}: {exc}", EXIT_IO) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise RunFailure(f"{path}: malformed model file ({exc})", EXIT_IO) from exc


def cmd_eval(args, options) -> int:
    _require(args, "model", "data")
    model = _load_model(args.model)
    data = _load_dataset(args.data)
    if len(data) == 0:
        raise ConfigError("evaluation dataset is empty")
    report = evaluate(model, data)
    report["label"] = args.label
    print(format_table([report], [args.label]))
    if args.out:
        _write_text(args.out, jsonio.dumps(report) + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


# tomo-analytic


def _floats(text: str, count: int | None = None, name: str = "value") -> list[float]:
    try:
        vals = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad {name} list {text!r}") from exc
    if count is not None and len(vals) != count:
        raise ConfigError(f"{name} needs {count} numbers, got {len(vals)}")
    return vals


def _setup_tomo(sub):
    p = sub.add_parser("tomo-analytic", help="invert the one-photon probabilities analytically")
    o = _Options(p)
    o.add("--probs", str, None, "P0000,P1000,P0100,P0010,P0001")
    o.add("--state", str, None, "ground truth r0,r1,phi1; probabilities are simulated from it")
    o.add("--alpha", float, DEFAULT_ALPHA, "coherent reference amplitude")
    p.set_defaults(handler=cmd_tomo_analytic, options=o)


def _one_photon_state(r0: float, r1: float, phi1: float) -> SingleModeState:
    norm = math.hypot(r0, r1)
    if norm == 0:
        raise ConfigError("state has zero norm")
    try:
        return SingleModeState(np.array([r0, r1]) / norm, [0.0, phi1])
    except (ValueError, FockprintError) as exc:
        raise ConfigError(f"bad state: {exc}") from exc


def cmd_tomo_analytic(args, options) -> int:
    if (args.probs is None) == (args.state is None):
        raise ConfigError("give exactly one of --probs or --state")
    if args.alpha <= 0:
        raise ConfigError("--alpha must be positive for the inversion")
    truth = None
    if args.state is not None:
        truth = _one_photon_state(*_floats(args.state, 3, "state"))
        dist = output_distribution(shared_circuit(), tomography_input(truth, args.alpha, 1), 1)
        probs = {c: dist.probability(c) for c in N1_LABELS}
    else:
        probs = dict(zip(N1_LABELS, _floats(args.probs, 5, "probability")))
    try:
        est = analytic_invert_n1(probs, args.alpha)
    except InconsistentProbabilitiesError as exc:
        print(f"warning: inconsistent probabilities: {exc}", file=sys.stderr)
        return EXIT_OK
    if est.degenerate:
        print("warning: degenerate state, phase phi1 is undetermined (set to 0)", file=sys.stderr)
    print(f"r0   {est.r0:.9f}")
    print(f"r1   {est.r1:.9f}")
    print(f"phi1 {est.phi1:.9f}")
    if truth is not None:
        guess = SingleModeState([est.r0, est.r1], [0.0, est.phi1])
        print(f"fidelity {fidelity(truth, guess):.6f}")
    return EXIT_OK


# simulate


def parse_state(spec: str):
    """State from inline JSON or ``@file``.

    ``{"r": [...], "phi": [...]}`` is a single-mode state (phi defaults to 0);
    ``{"kind": "entanglement", "r": [[...]], "phi": [[...]]}`` a two-mode one.
    """
    text = spec
    if spec.startswith("@"):
        try:
            text = Path(spec[1:]).read_text()
        except OSError as exc:
            raise RunFailure(f"cannot read state file {spec[1:]}: {exc}", EXIT_IO) from exc
    try:
        raw = json.loads(text)
        kind = KIND_ALIASES[str(raw.get("kind", "tomography")).lower()]
        r = np.asarray(raw["r"], dtype=float)
        phi = np.asarray(raw.get("phi", np.zeros_like(r)), dtype=float)
        if kind == "tomography":
            return SingleModeState(r, phi)
        return BipartiteState(r, phi)
    except (ValueError, KeyError, TypeError, AttributeError, FockprintError) as exc:
        raise ConfigError(f"malformed state spec: {exc}") from exc


def _setup_simulate(sub):
    p = sub.add_parser("simulate", help="print the output pattern for one state")
    o = _Options(p)
    o.add("--state", str, None, "inline JSON state or @file")
    o.add("--random", _optional_int, None, "draw a random state with this N instead")
    o.add("--kind", _kind, "tomography", "kind of random state")
    o.add("--seed", int, 0, "seed for --random")
    o.add("--alpha", float, DEFAULT_ALPHA, "coherent reference amplitude")
    o.add("--s-max", int, DEFAULT_S_MAX, "largest total photon number")
    o.add("--oracle-check", _bool, False, "compare against brute-force operator expansion")
    o.add("--threshold", float, 0.0, "hide probabilities at or below this value")
    o.add("--out", str, None, "optional JSON dump of the distribution")
    p.set_defaults(handler=cmd_simulate, options=o)


def cmd_simulate(args, options) -> int:
    if (args.state is None) == (args.random is None):
        raise ConfigError("give exactly one of --state or --random")
    if args.s_max < 0 or args.alpha < 0:
        raise ConfigError("need s_max >= 0 and alpha >= 0")
    if args.state is not None:
        state = parse_state(args.state)
    else:
        if args.random < 1:
            raise ConfigError("--random needs N >= 1")
        rng = np.random.default_rng(args.seed)
        sampler = sample_single_mode_state if args.kind == "tomography" else sample_bipartite_state
        state = sampler(args.random, rng)
    if isinstance(state, SingleModeState):
        fock = tomography_input(state, args.alpha, args.s_max)
    else:
        fock = entanglement_input(state, args.alpha, args.s_max)
    net = shared_circuit()
    dist = output_distribution(net, fock, args.s_max)

    for config, p in dist.items():
        if p > args.threshold:
            print(f"|{''.join(map(str, config))}>  {p:.15f}")
    print(f"total             {dist.total:.15f}")
    print(f"truncation defect {dist.truncation_defect:.3e}")
    if isinstance(state, BipartiteState):
        print(f"entanglement entropy {entanglement_entropy(state):.12f}")
    deviation = None
    if args.oracle_check:
        try:
            ref = brute_force_output(net, fock, args.s_max)
        except FockprintError as exc:
            raise ConfigError(f"oracle check unavailable: {exc}") from exc
        deviation = dist.max_deviation(ref)
        print(f"oracle max deviation {deviation:.3e}")
    if args.out:
        doc = {
            "s_max": dist.s_max,
            "alpha": args.alpha,
            "probabilities": {"".join(map(str, c)): p for c, p in dist.items()},
            "truncation_defect": dist.truncation_defect,
            "oracle_max_deviation": deviation,
        }
        _write_text(args.out, jsonio.dumps(doc) + "\n")
    return EXIT_OK


# report


def _setup_report(sub):
    p = sub.add_parser("report", help="side-by-side table of eval reports")
    p.add_argument("reports", nargs="+", help="JSON reports written by eval or train")
    o = _Options(p)
    o.add("--headers", str, None, "comma-separated column headers")
    o.add("--out", str, None, "write the table to this file as well")
    p.set_defaults(handler=cmd_report, options=o)


def cmd_report(args, options) -> int:
    reports = [_read_json(path) for path in args.reports]
    kinds = {("fidelity" in r) for r in reports}
    if len(kinds) != 1:
        raise ConfigError("cannot mix tomography and entanglement reports in one table")
    if args.headers:
        headers = [h.strip() for h in args.headers.split(",")]
        if len(headers) != len(reports):
            raise ConfigError(f"{len(headers)} headers for {len(reports)} reports")
    else:
        headers = [r.get("label") or Path(p).stem for r, p in zip(reports, args.reports)]
    try:
        table = format_table(reports, headers)
    except KeyError as exc:
        raise RunFailure(f"report is missing field {exc}", EXIT_IO) from exc
    print(table)
    if args.out:
        _write_text(args.out, table + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fockprint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for setup in (_setup_generate, _setup_train, _setup_eval, _setup_tomo, _setup_simulate, _setup_report):
        setup(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which is our config code too
        return int(exc.code or 0)
    try:
        resolve(args, args.options)
        return args.handler(args, args.options)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LayoutMismatchError as exc:
        print(f"error: layout mismatch: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DatasetIOError, FormatError, CorruptRecordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FockprintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

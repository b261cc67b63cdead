"""Command-line surface tying the pipeline together.

Subcommands: featurize, fit, predict, cv, transfer-eval, cluster, inspect.
Data goes to stdout (or files named by flags); logs go to stderr. Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical failure.

A JSON config file (--config) may supply any long flag; flags given
explicitly on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backend import backend_name
from .bundle import load_model, read_model_meta, save_model
from .cluster import kernel_heatmap_normalize, spectral_bipartition
from .data import LabeledDataset, SpeciesTable, split_dataset
from .descriptor import DescriptorParams, featurize_dataset
from .errors import DataError, KernpotError, NumericalError
from .evaluation import (
    DEFAULT_ALPHA_GRID,
    DEFAULT_LAMBDA_GRID,
    cross_validate_alpha,
    cross_validate_lambda,
    evaluate_model,
)
from .extxyz import read_extxyz
from .featio import load_features, write_features
from .kernels import (
    BaseKernel,
    KernelSpec,
    gram_matrix,
    median_heuristic,
)
from .krr import fit as krr_fit
from .krr import predict as krr_predict
from .labels import (
    SpeciesEnergyTable,
    fit_species_energy_table,
    fit_standardize,
    identity_transform,
    species_baseline_transform,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _log(*args):
    print(*args, file=sys.stderr)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _descriptor_params(args) -> DescriptorParams:
    centers = np.linspace(args.center_min, args.center_max, args.n_centers, endpoint=False)
    return DescriptorParams(cutoff=args.cutoff, centers=tuple(centers), width=args.width)


def _add_descriptor_flags(p):
    g = p.add_argument_group("descriptor")
    g.add_argument("--cutoff", type=float, default=6.0, help="radial cutoff (Angstrom)")
    g.add_argument("--n-centers", type=int, default=16, help="number of radial centers")
    g.add_argument("--center-min", type=float, default=0.5, help="first radial center")
    g.add_argument("--center-max", type=float, default=6.0,
                   help="exclusive upper edge of the radial center grid")
    g.add_argument("--width", type=float, default=0.35, help="radial gaussian width")


def _add_data_flags(p, features=True):
    p.add_argument("--data", required=True, help="extended-XYZ input file")
    if features:
        p.add_argument("--features", help="FEAT1 bundle to attach instead of the descriptor")


def _add_kernel_flags(p):
    g = p.add_argument_group("kernel")
    g.add_argument("--kernel", choices=["gaussian", "linear"], default="gaussian")
    g.add_argument("--sigma", type=float, default=None,
                   help="gaussian length-scale; defaults to the median heuristic")
    g.add_argument("--mode", choices=["extensive", "intensive"], default="extensive")
    g.add_argument("--alpha", type=float, default=0.0, help="species mixing weight in [0, 1]")
    g.add_argument("--species-norm", choices=["subset", "global"], default="subset")


def _load_dataset(args, table: SpeciesTable | None = None) -> LabeledDataset:
    ds = read_extxyz(args.data, species_table=table)
    if getattr(args, "features", None):
        ds = load_features(args.features, data=ds)
    else:
        ds = featurize_dataset(ds, _descriptor_params(args))
    return ds


def _kernel_spec(args, ds: LabeledDataset, seed: int) -> KernelSpec:
    sigma = args.sigma
    if args.kernel == "gaussian" and sigma is None:
        sigma = median_heuristic(ds.feature_sets(), seed=seed)
        _log(f"median-heuristic sigma = {sigma:.6g}")
    base = BaseKernel(args.kernel, sigma if args.kernel == "gaussian" else None)
    return KernelSpec(
        base=base,
        mode=args.mode,
        alpha=args.alpha,
        n_species=ds.species_table.n_species,
        species_norm=args.species_norm,
    )


def _make_transform(name: str, train: LabeledDataset, baselines_path: str | None = None):
    if name == "identity":
        return identity_transform()
    if name == "standardize":
        return fit_standardize(train)
    if baselines_path:
        try:
            raw = json.loads(Path(baselines_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read baselines file: {exc}") from exc
        table = SpeciesEnergyTable(
            {train.species_table.id_of(sym): float(v) for sym, v in raw.items()}
        )
        return species_baseline_transform(table)
    return species_baseline_transform(fit_species_energy_table(train))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommand bodies ---------------------------------------------------------


def _cmd_featurize(args) -> int:
    ds = read_extxyz(args.data)
    ds = featurize_dataset(ds, _descriptor_params(args))
    write_features(ds, args.out)
    _log(f"wrote {len(ds)} frames to {args.out}")
    return EXIT_OK


def _cmd_fit(args) -> int:
    ds = _load_dataset(args)
    spec = _kernel_spec(args, ds, args.seed)
    transform = _make_transform(args.transform, ds, args.baselines)
    model = krr_fit(
        ds, spec, args.lam,
        transform=transform,
        allow_unregularized=args.allow_unregularized,
        num_threads=args.threads,
    )
    save_model(
        model, args.out,
        species_table=ds.species_table,
        provenance=f"fit --data {args.data} --seed {args.seed}",
    )
    _log(f"fitted on {len(ds)} frames; bundle at {args.out}")
    return EXIT_OK


def _bundle_species_table(model_path) -> SpeciesTable | None:
    meta = read_model_meta(model_path)
    symbols = meta.get("species_table")
    return SpeciesTable(tuple(symbols)) if symbols else None


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    table = _bundle_species_table(args.model)
    ds = _load_dataset(args, table=table)
    preds = krr_predict(model, ds, num_threads=args.threads)
    lines = ["frame,energy_ev"]
    lines += [f"{i},{float(e)!r}" for i, e in enumerate(preds)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_cv(args) -> int:
    ds = _load_dataset(args)
    if not ds.has_energies:
        raise DataError("cross-validation needs energy labels")
    ratios = tuple(_float_list(args.ratios))
    train, val, _test = split_dataset(ds, ratios, args.seed)
    spec = _kernel_spec(args, ds, args.seed).with_alpha(0.0)
    transform = _make_transform(args.transform, train)

    lam_grid = tuple(_float_list(args.lambda_grid)) if args.lambda_grid else DEFAULT_LAMBDA_GRID
    alpha_grid = tuple(_float_list(args.alpha_grid)) if args.alpha_grid else DEFAULT_ALPHA_GRID

    lam_cv = cross_validate_lambda(
        train, val, spec, grid=lam_grid, transform=transform, num_threads=args.threads
    )
    alpha_cv = cross_validate_alpha(
        train, val, spec, lam_cv.best, grid=alpha_grid,
        transform=transform, num_threads=args.threads,
    )

    prefix = args.out_prefix
    for cv in (lam_cv, alpha_cv):
        rows = [f"{cv.param_name},rmse_mev_per_atom,mae_mev_per_atom"]
        rows += [f"{p!r},{r!r},{m!r}" for p, r, m in cv.curve]
        Path(f"{prefix}_{cv.param_name}.csv").write_text("\n".join(rows) + "\n")

    summary = {
        "lambda": lam_cv.best,
        "alpha": alpha_cv.best,
        "rmse_mev_per_atom": alpha_cv.best_rmse,
        "mae_mev_per_atom": alpha_cv.best_mae,
        "sigma": spec.base.sigma,
        "n_train": len(train),
        "n_val": len(val),
        "seed": args.seed,
    }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_transfer_eval(args) -> int:
    model = load_model(args.model)
    table = _bundle_species_table(args.model)
    ds = _load_dataset(args, table=table)
    if not ds.has_energies:
        raise DataError("transfer evaluation needs energy labels on the target")
    report = evaluate_model(model, ds, num_threads=args.threads)
    _emit(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _cmd_cluster(args) -> int:
    ds = _load_dataset(args)
    spec = _kernel_spec(args, ds, args.seed)
    gram = gram_matrix(spec, ds.feature_sets(), num_threads=args.threads)
    heat = kernel_heatmap_normalize(gram)
    labels = spectral_bipartition(gram)

    lines = ["frame,label"] + [f"{i},{int(v)}" for i, v in enumerate(labels)]
    _emit("\n".join(lines) + "\n", args.labels_out)
    if args.heatmap_out:
        rows = [",".join(repr(float(v)) for v in row) for row in heat]
        Path(args.heatmap_out).write_text("\n".join(rows) + "\n")
    if args.png:
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            raise DataError("--png needs matplotlib installed") from None
        fig, ax = plt.subplots(figsize=(5, 4.2))
        im = ax.imshow(heat, origin="lower", cmap="viridis", vmin=0.0, vmax=1.0)
        ax.set_xlabel("frame")
        ax.set_ylabel("frame")
        fig.colorbar(im, ax=ax, label="normalized kernel")
        fig.savefig(args.png, dpi=150, bbox_inches="tight")
        plt.close(fig)
    return EXIT_OK


def _cmd_inspect(args) -> int:
    meta = read_model_meta(args.model)
    sys.stdout.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="kernpot", description=__doc__)
    parser.add_argument("--version", action="version", version=f"kernpot {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying any long flag")
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    common.add_argument("--threads", type=int, default=1, help="cap on internal parallelism")

    p = sub.add_parser("featurize", parents=[common], help="extxyz -> FEAT1 bundle")
    _add_data_flags(p, features=False)
    _add_descriptor_flags(p)
    p.add_argument("--out", required=True, help="output bundle directory")
    p.set_defaults(func=_cmd_featurize)

    p = sub.add_parser("fit", parents=[common], help="train a model bundle")
    _add_data_flags(p)
    _add_descriptor_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-7, help="ridge regularization")
    p.add_argument("--transform", choices=["identity", "standardize", "species-baseline"],
                   default="standardize")
    p.add_argument("--baselines",
                   help="JSON file {symbol: eV} of precomputed species baselines "
                        "(species-baseline transform only; default: fit from data)")
    p.add_argument("--allow-unregularized", action="store_true",
                   help="permit lambda = 0 on well-conditioned problems")
    p.add_argument("--out", required=True, help="output model bundle directory")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="energies for new configurations")
    p.add_argument("--model", required=True, help="model bundle directory")
    _add_data_flags(p)
    _add_descriptor_flags(p)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("cv", parents=[common],
                       help="cross-validate lambda (alpha = 0) then alpha at the best lambda")
    _add_data_flags(p)
    _add_descriptor_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--ratios", default="0.6,0.2,0.2", help="train/val/test split ratios")
    p.add_argument("--transform", choices=["identity", "standardize", "species-baseline"],
                   default="standardize")
    p.add_argument("--lambda-grid", help="comma-separated lambda grid")
    p.add_argument("--alpha-grid", help="comma-separated alpha grid")
    p.add_argument("--out-prefix", default="cv", help="prefix for curve CSV files")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("transfer-eval", parents=[common],
                       help="evaluate a fitted bundle on a target dataset")
    p.add_argument("--model", required=True, help="source model bundle")
    _add_data_flags(p)
    _add_descriptor_flags(p)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=_cmd_transfer_eval)

    p = sub.add_parser("cluster", parents=[common],
                       help="two-class spectral clustering of a trajectory")
    _add_data_flags(p)
    _add_descriptor_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--labels-out", help="labels CSV (default stdout)")
    p.add_argument("--heatmap-out", help="normalized kernel matrix CSV")
    p.add_argument("--png", help="heatmap PNG (needs matplotlib)")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("inspect", parents=[common], help="print bundle metadata")
    p.add_argument("--model", required=True, help="model bundle directory")
    p.set_defaults(func=_cmd_inspect)

    return parser


def _apply_config(parser: _Parser, argv: list[str]) -> list[str]:
    """Fold --config file values in as subparser defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise _UsageError("--config needs a path")
    try:
        values = json.loads(Path(argv[idx + 1]).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read config file: {exc}") from exc
    if not isinstance(values, dict):
        raise DataError("config file must hold a JSON object")
    # Re-parse with config values as defaults; explicit flags still win.
    for action in parser._subparsers._group_actions:
        for name, sub in action.choices.items():
            if argv and argv[0] == name:
                defaults = {k.replace("-", "_"): v for k, v in values.items()}
                if "lambda" in defaults:  # argparse dest for --lambda
                    defaults["lam"] = defaults.pop("lambda")
                known = {a.dest for a in sub._actions}
                unknown = set(defaults) - known
                if unknown:
                    raise _UsageError(f"config keys not recognized: {sorted(unknown)}")
                sub.set_defaults(**defaults)
                for a in sub._actions:
                    if a.dest in defaults:
                        a.required = False
    return argv


def run_cli(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        _log(f"kernpot {__version__} [{backend_name()} backend]")
        return args.func(args)
    except _UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except NumericalError as exc:
        _log(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    except DataError as exc:
        _log(f"data error: {exc}")
        return EXIT_DATA
    except KernpotError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA
    except ValueError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())

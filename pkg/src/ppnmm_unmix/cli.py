"""
Command-line front end: ``synth``, ``unmix`` and ``eval`` subcommands.

Every flag can also be given in a JSON file passed with ``--config``; keys are
the long flag names with dashes replaced by underscores, and flags given on
the command line win. Each run writes ``manifest.json`` listing the full
parameter set and a SHA-256 digest of every output. Outputs carry no
timestamps, so identical flags give byte-identical files.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
"""
import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import formats
from .core import linear_mix, ppnm_forward
from .metrics import (
    EvalReport,
    fcls_baseline,
    format_table,
    label_accuracy,
    per_class_errors,
    reconstruction_error,
    rmse,
)
from .sampler import SamplerConfig, posterior_estimates, run_chain
from .synth import PRESETS, SceneSpec, generate_scene, make_synthetic_library, preset

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


class UsageError(Exception):
    """Bad flags, bad configuration or inconsistent inputs (exit 2)."""


def _version():
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "unknown"


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _require(path, what):
    if not Path(path).exists():
        raise UsageError(f"{what} not found: {path}")


def _cube_exists(stem, what):
    meta, data = formats._cube_paths(stem)
    _require(meta, what)
    _require(data, what)


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out, command, params, files):
    digests = {}
    for name in sorted(files):
        digests[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()
    _write_json(
        out / "manifest.json",
        {"command": command, "version": _version(), "parameters": params, "outputs": digests},
    )


# -- synth ----------------------------------------------------------------------


def _scene_spec(args):
    base = preset(args.preset, args.seed if args.seed is not None else 0) if args.preset else SceneSpec()
    fields = dict(vars(base))
    overrides = {
        "seed": args.seed,
        "model": args.model,
        "b": args.b,
        "gamma": args.gamma,
        "sigma2": args.sigma2,
        "beta": args.beta,
        "width": args.width,
        "height": args.height,
        "bands": args.bands,
        "n_sweeps": args.sweeps,
    }
    fields.update({k: v for k, v in overrides.items() if v is not None})
    if args.model is not None and args.model.lower() != "gbm" and args.gamma is None:
        fields["gamma"] = []
    return SceneSpec(**fields)


def _pad_abundances(spec, R):
    A = spec.abundance_matrix
    if A.shape[1] < R:
        A = np.hstack([A, np.zeros((A.shape[0], R - A.shape[1]))])
    elif A.shape[1] > R:
        if np.any(A[:, R:] != 0):
            raise UsageError(f"scene abundances use {A.shape[1]} endmembers but the library has {R}")
        A = A[:, :R]
    return A


def cmd_synth(args):
    try:
        spec = _scene_spec(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.library:
        _require(args.library, "library")
        lib = formats.read_library(args.library)
        if lib.bands != spec.bands:
            spec.bands = lib.bands
    else:
        lib = make_synthetic_library(spec.bands, args.endmembers, spec.seed)
    spec.class_abundances = _pad_abundances(spec, lib.n_endmembers).tolist()
    try:
        truth = generate_scene(spec, lib, np.random.default_rng(spec.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats.write_cube(out / "clean", truth.clean_cube)
    formats.write_cube(out / "noisy", truth.noisy_cube)
    formats.write_labels_csv(out / "labels.csv", truth.labels)
    formats.write_matrix_csv(out / "abundances.csv", truth.abundances, header=lib.names)
    formats.write_library(out / "library.csv", lib)
    scene = json.loads(spec.to_json())
    scene["realized_snr_db"] = truth.snr_db()
    _write_json(out / "scene.json", scene)
    files = [
        "clean.json",
        "clean.bin",
        "noisy.json",
        "noisy.bin",
        "labels.csv",
        "abundances.csv",
        "library.csv",
        "scene.json",
    ]
    params = {
        "preset": args.preset,
        "library": str(args.library) if args.library else None,
        "endmembers": lib.n_endmembers,
        "scene": json.loads(spec.to_json()),
    }
    _write_manifest(out, "synth", params, files)
    print(f"wrote scene to {out} (realized SNR {truth.snr_db():.2f} dB)")


# -- unmix ----------------------------------------------------------------------


def _sampler_config(args, seed):
    try:
        return SamplerConfig(
            n_classes=args.K,
            n_mc=args.iters,
            burn_in=args.burn_in,
            eta=args.eta,
            beta=args.beta,
            ig_prior=(args.ig_shape, args.ig_scale),
            proposal=args.proposal,
            proposal_scale=args.proposal_scale,
            adapt_target=args.adapt_target,
            mh_steps=args.mh_steps,
            collapse_b=args.collapse_b,
            schedule=args.schedule,
            init=args.init,
            seed=seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_chain_outputs(out, chain, lib, K):
    out.mkdir(parents=True, exist_ok=True)
    est = posterior_estimates(chain)
    formats.write_matrix_csv(out / "abundances.csv", est.abundances, header=lib.names)
    formats.write_labels_csv(out / "labels.csv", est.labels)
    formats.write_labels_pgm(out / "labels.pgm", est.labels, K)
    scalars = {
        "b": est.b,
        "sigma2": est.sigma2,
        "sigma_b2": float(chain.sigma_b2.mean()),
        "acceptance_rates": chain.acceptance_rates().tolist(),
        "n_samples": chain.n_samples,
    }
    _write_json(out / "scalars.json", scalars)
    formats.write_matrix_csv(out / "trace.csv", chain.trace_matrix(), header=chain.trace_header())
    formats.write_matrix_csv(
        out / "label_counts.csv", chain.label_counts, header=[f"class_{k + 1}" for k in range(K)]
    )
    n_mc = chain.log_posterior.shape[0]
    diag = np.column_stack([np.arange(1, n_mc + 1), chain.log_posterior, chain.acceptance, chain.proposal_scales])
    header = (
        ["iteration", "log_posterior"]
        + [f"acceptance_{k + 1}" for k in range(K)]
        + [f"scale_{k + 1}" for k in range(K)]
    )
    formats.write_matrix_csv(out / "diagnostics.csv", diag, header=header)
    return [
        "abundances.csv",
        "labels.csv",
        "labels.pgm",
        "scalars.json",
        "trace.csv",
        "label_counts.csv",
        "diagnostics.csv",
    ]


def _run_one(cube, lib, config):
    return run_chain(cube, lib, config)


def cmd_unmix(args):
    _cube_exists(args.cube, "cube")
    _require(args.library, "library")
    if args.chains < 1:
        raise UsageError("--chains must be at least 1")
    cube = formats.read_cube(args.cube)
    lib = formats.read_library(args.library)
    if cube.bands != lib.bands:
        raise UsageError(f"cube has {cube.bands} bands but library has {lib.bands}")
    if args.K > cube.n_pixels:
        raise UsageError(f"{args.K} classes for {cube.n_pixels} pixels")
    seeds = [args.seed + i for i in range(args.chains)]
    configs = [_sampler_config(args, s) for s in seeds]

    if args.chains == 1:
        chains = [_run_one(cube, lib, configs[0])]
    else:
        with ProcessPoolExecutor(max_workers=min(args.chains, args.workers or args.chains)) as pool:
            chains = list(pool.map(_run_one, [cube] * args.chains, [lib] * args.chains, configs))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, chain in enumerate(chains):
        sub = "" if args.chains == 1 else f"chain-{i + 1}/"
        files += [sub + f for f in _write_chain_outputs(out / sub, chain, lib, args.K)]
    params = {
        "cube": str(args.cube),
        "library": str(args.library),
        "chains": args.chains,
        "seeds": seeds,
        "sampler": {
            k: (v.__dict__ if hasattr(v, "__dict__") else v)
            for k, v in vars(configs[0]).items()
            if k != "seed"
        },
    }
    _write_manifest(out, "unmix", params, files)
    print(f"wrote estimates to {out}")


# -- eval -----------------------------------------------------------------------


def _truth_paths(truth):
    truth = Path(truth)
    paths = {
        "labels": truth / "labels.csv",
        "abundances": truth / "abundances.csv",
        "library": truth / "library.csv",
        "clean": truth / "clean",
        "noisy": truth / "noisy",
    }
    if not truth.is_dir():
        raise UsageError(f"ground truth directory not found: {truth}")
    for key in ("labels", "abundances", "library"):
        _require(paths[key], "ground truth file")
    _cube_exists(paths["clean"], "ground truth clean cube")
    return paths


def cmd_eval(args):
    est_dir = Path(args.estimates)
    for name in ("abundances.csv", "labels.csv", "scalars.json"):
        _require(est_dir / name, "estimate file")
    truth = _truth_paths(args.truth)
    lib = formats.read_library(args.library or truth["library"])
    clean = formats.read_cube(truth["clean"])
    true_labels = formats.read_labels_csv(truth["labels"])
    true_A = formats.read_matrix_csv(truth["abundances"])
    est_labels = formats.read_labels_csv(est_dir / "labels.csv")
    est_A = formats.read_matrix_csv(est_dir / "abundances.csv")
    b = float(json.loads((est_dir / "scalars.json").read_text())["b"])

    if est_A.shape[1] != true_A.shape[1] or est_A.shape[1] != lib.n_endmembers:
        raise UsageError(
            f"estimates have {est_A.shape[1]} endmembers, truth {true_A.shape[1]}, library {lib.n_endmembers}"
        )
    if est_labels.shape != true_labels.shape or est_labels.size != clean.n_pixels:
        raise UsageError(f"label maps differ in shape: {est_labels.shape} vs {true_labels.shape}")
    if lib.bands != clean.bands:
        raise UsageError(f"library has {lib.bands} bands but the clean cube has {clean.bands}")
    K = max(est_A.shape[0], true_A.shape[0])
    if est_labels.max() >= est_A.shape[0] or true_labels.max() >= true_A.shape[0]:
        raise UsageError("label map refers to a class with no abundance row")

    est_pixels = est_A[est_labels.ravel()]
    true_pixels = true_A[true_labels.ravel()]
    recon = ppnm_forward(lib, est_A, b)[est_labels.ravel()]
    report = EvalReport(
        rmse=rmse(est_pixels, true_pixels),
        re=reconstruction_error(recon, clean),
        label_accuracy=float(label_accuracy(est_labels, true_labels, K)),
        per_class_abundance_error=per_class_errors(est_pixels, true_pixels, true_labels, true_A.shape[0]),
    )
    reports = [report]
    out = Path(args.out) if args.out else est_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json() + "\n")
    files = ["report.json", "report.txt"]
    if args.with_fcls:
        _cube_exists(truth["noisy"], "ground truth noisy cube")
        noisy = formats.read_cube(truth["noisy"])
        try:
            fit = fcls_baseline(noisy, lib)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        fcls = EvalReport(
            rmse=rmse(fit.abundances, true_pixels),
            re=reconstruction_error(linear_mix(lib, fit.abundances), clean),
            label_accuracy=None,
            per_class_abundance_error=per_class_errors(fit.abundances, true_pixels, true_labels, true_A.shape[0]),
            method="fcls",
        )
        reports.append(fcls)
        (out / "fcls_report.json").write_text(fcls.to_json() + "\n")
        files.append("fcls_report.json")
    table = format_table(reports)
    (out / "report.txt").write_text(table)
    params = {
        "estimates": str(args.estimates),
        "truth": str(args.truth),
        "library": str(args.library or truth["library"]),
        "with_fcls": bool(args.with_fcls),
    }
    if out != est_dir:
        _write_manifest(out, "eval", params, files)
    else:
        _write_json(out / "eval_manifest.json", {"command": "eval", "version": _version(), "parameters": params})
    sys.stdout.write(table)


# -- parser ---------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="ppnmm-unmix", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labelled scene")
    p.add_argument("--config", help="JSON file with flag values")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=False)
    p.add_argument("--model", choices=["lmm", "gbm", "ppnmm"], type=str.lower)
    p.add_argument("--b", type=float, help="PPNMM nonlinearity")
    p.add_argument("--gamma", type=_float_list, help="GBM coefficients, comma-separated, one per active pair")
    p.add_argument("--sigma2", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--bands", type=int)
    p.add_argument("--sweeps", type=int, help="Potts sweeps for the label map")
    p.add_argument("--endmembers", type=int, default=8, help="synthetic library size")
    p.add_argument("--library", help="use this library CSV instead of a synthetic one")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("unmix", help="run the sampler on a cube")
    p.add_argument("--config", help="JSON file with flag values")
    p.add_argument("--cube")
    p.add_argument("--library")
    p.add_argument("--out")
    p.add_argument("--K", "--classes", dest="K", type=int, default=3)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--eta", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=1.1)
    p.add_argument("--ig-shape", type=float, default=1.0)
    p.add_argument("--ig-scale", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--workers", type=int, default=None, help="processes for --chains (default: one per chain)")
    p.add_argument("--proposal", choices=["block", "curvature", "isotropic"], default="block")
    p.add_argument("--proposal-scale", type=float, default=None)
    p.add_argument("--adapt-target", type=float, default=0.3)
    p.add_argument("--mh-steps", type=int, default=10)
    p.add_argument("--collapse-b", action="store_true")
    p.add_argument("--schedule", choices=["raster", "checkerboard"], default="raster")
    p.add_argument("--init", choices=["kmeans", "prior"], default="kmeans")
    p.set_defaults(func=cmd_unmix)

    p = sub.add_parser("eval", help="score estimates against ground truth")
    p.add_argument("--config", help="JSON file with flag values")
    p.add_argument("--estimates")
    p.add_argument("--truth")
    p.add_argument("--library", help="library CSV (default: the one in the truth directory)")
    p.add_argument("--out", help="report directory (default: the estimates directory)")
    p.add_argument("--with-fcls", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


REQUIRED = {"synth": ["out"], "unmix": ["cube", "library", "out"], "eval": ["estimates", "truth"]}


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise UsageError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: invalid JSON ({exc})") from None
        if not isinstance(cfg, dict):
            raise UsageError(f"{args.config}: expected a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {unknown}")
        if isinstance(cfg.get("gamma"), list):
            cfg["gamma"] = ",".join(str(g) for g in cfg["gamma"])
        # command-line flags override the file
        subparser.set_defaults(**{k: v for k, v in cfg.items() if k != "command"})
        args = parser.parse_args(argv)
    missing = [name for name in REQUIRED[args.command] if not getattr(args, name)]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


def main(argv=None):
    try:
        args = parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

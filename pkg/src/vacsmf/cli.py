"""Command-line entry points: simulate | fit | evaluate | report."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import evaluate as ev
from . import figures
from . import io as vio
from .gibbs import run_chain
from .io import DataError, RunConfig
from .priors import PriorVariant
from .simulate import (
    DEFAULT_TRUTH_SEED,
    TrueModel,
    apply_verification,
    build_mechanism,
    generate_population,
    resample_semisynthetic,
)

OUT_DIR_ENV = "VACSMF_OUT_DIR"


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacsmf",
        description="Cause-specific mortality fractions from partially verified "
                    "verbal autopsy records",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate synthetic study replicates")
    sim.add_argument("--out", default=_default_out(), help=f"output dir (or ${OUT_DIR_ENV})")
    sim.add_argument("--case", choices=["i", "ii"], default="i")
    sim.add_argument("--replicates", type=int, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--t", type=int, default=10, help="number of time periods")
    sim.add_argument("--a", type=int, default=8, help="number of age groups")
    sim.add_argument("--p", type=int, default=10, help="number of symptoms")
    sim.add_argument("--k", type=int, default=10, help="generating latent classes")
    sim.add_argument("--n-per-stratum", type=int, default=100)
    sim.add_argument("--truth-seed", type=int, default=DEFAULT_TRUTH_SEED)
    sim.add_argument("--resample", metavar="CSV", default=None,
                     help="resample this labeled dataset instead of simulating one")
    sim.add_argument("--fraction", type=float, default=0.5,
                     help="per-stratum resampling fraction (with --resample)")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="run the sampler on one dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--out", default=_default_out())
    fit.add_argument("--model", default="rw1", choices=[v.value for v in PriorVariant])
    fit.add_argument("--k", type=int, default=10)
    fit.add_argument("--iters", type=int, default=8000)
    fit.add_argument("--burnin", type=int, default=3000)
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--chains", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--t", type=int, default=None, help="override inferred time periods")
    fit.add_argument("--a", type=int, default=None, help="override inferred age groups")
    fit.set_defaults(func=cmd_fit)

    eva = sub.add_parser("evaluate", help="bias/CRPS tables for one or more fits")
    eva.add_argument("--truth", required=True, help="truth JSON from simulate")
    eva.add_argument("--fit", action="append", required=True, metavar="DIR")
    eva.add_argument("--out", default=_default_out())
    eva.add_argument("--no-figures", action="store_true")
    eva.set_defaults(func=cmd_evaluate)

    rep = sub.add_parser("report", help="latent profiles and CSMF plot data for one fit")
    rep.add_argument("--fit", required=True, metavar="DIR")
    rep.add_argument("--out", default=_default_out())
    rep.add_argument("--truth", default=None, help="optional truth JSON for overlays")
    rep.add_argument("--no-figures", action="store_true")
    rep.set_defaults(func=cmd_report)
    return parser


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    streams = np.random.SeedSequence(args.seed).spawn(args.replicates)
    mechanisms = []
    if args.resample is not None:
        base = vio.parse_dataset(args.resample)
        truth = None
    else:
        truth = TrueModel.generate(
            n_symptoms=args.p, n_time=args.t, n_age=args.a, n_classes=args.k,
            n_per_stratum=args.n_per_stratum, seed=args.truth_seed,
        )
        vio.write_truth(out / "truth.json", truth)
        base = None
    for r in range(args.replicates):
        rng = np.random.default_rng(streams[r])
        if base is not None:
            labeled = resample_semisynthetic(base, args.fraction, rng)
            n_time, n_age, p = base.n_time, base.n_age, base.n_symptoms
        else:
            labeled = generate_population(truth, rng)
            n_time, n_age, p = args.t, args.a, args.p
        mech = build_mechanism(n_time, n_age, p, args.case, rng)
        masked = apply_verification(labeled, mech, rng)
        mechanisms.append(mech)
        vio.write_dataset(out / f"data_r{r:03d}.csv", masked)
        vio.write_true_causes(out / f"labels_r{r:03d}.csv", labeled)
    vio.write_mechanisms(out / "mechanisms.json", mechanisms)
    print(f"wrote {args.replicates} replicate(s) to {out}")
    return 0


def cmd_fit(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = RunConfig(
        dataset=str(args.data), output_dir=str(out), model=args.model,
        n_classes=args.k, iterations=args.iters, burnin=args.burnin,
        thin=args.thin, chains=args.chains, seed=args.seed,
        n_time=args.t, n_age=args.a,
    )
    spec = config.prior_spec()
    chain_cfg = config.chain_config()
    dataset = vio.parse_dataset(args.data, n_time=args.t, n_age=args.a)
    draws = run_chain(dataset, spec, chain_cfg)
    vio.write_draws(out / "draws.csv", draws)
    vio.write_summary(out / "summary.csv", draws)
    vio.write_latent_means(out / "phi_mean.csv", out / "lambda_mean.csv", draws)
    vio.write_run_config(out / "run_config.json", config)
    print(f"fit {args.model} on {args.data}: {draws.n_draws} draws -> {out}")
    return 0


def _load_fit(fit_dir: Path):
    config = vio.read_run_config(fit_dir / "run_config.json")
    prevalence, _, _ = vio.read_draws(fit_dir / "draws.csv")
    summary = vio.read_summary(fit_dir / "summary.csv")
    return config, prevalence, summary


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    truth = vio.read_truth(args.truth)
    bias_rows, time_rows, crps_rows = [], [], []
    by_dataset: dict[str, dict[str, tuple]] = {}
    for fit_dir in map(Path, args.fit):
        config, prevalence, summary = _load_fit(fit_dir)
        n_grid = summary.sort_values(["s", "t", "a"])["n"].to_numpy().reshape(truth.prevalence.shape)
        unv = summary.sort_values(["s", "t", "a"])["n_unverified"].to_numpy().reshape(n_grid.shape)
        overall = ev.aggregate_overall(prevalence, n_grid)
        true_overall = float((truth.prevalence * n_grid).sum() / n_grid.sum())
        by_time = ev.aggregate_by_time(prevalence, n_grid)
        true_by_time = (truth.prevalence * n_grid).sum(axis=(0, 2)) / n_grid.sum(axis=(0, 2))
        bias_rows.append({
            "model": config.model, "dataset": config.dataset,
            "estimate": float(overall.mean()), "truth": true_overall,
            "bias": float(ev.bias(overall.mean(), true_overall)),
        })
        for t in range(by_time.shape[1]):
            time_rows.append({
                "model": config.model, "dataset": config.dataset, "t": t + 1,
                "estimate": float(by_time[:, t].mean()), "truth": float(true_by_time[t]),
                "bias": float(ev.bias(by_time[:, t].mean(), true_by_time[t])),
            })
        scores = {}
        for s in range(2):
            for t in range(n_grid.shape[1]):
                for a in range(n_grid.shape[2]):
                    score = ev.crps(prevalence[:, s, t, a], truth.prevalence[s, t, a])
                    scores[(s + 1, t + 1, a + 1)] = score
                    crps_rows.append({
                        "model": config.model, "dataset": config.dataset,
                        "s": s + 1, "t": t + 1, "a": a + 1,
                        "n": int(n_grid[s, t, a]),
                        "unverified_frac": float(unv[s, t, a] / n_grid[s, t, a])
                        if n_grid[s, t, a] else float("nan"),
                        "crps": score,
                    })
        by_dataset.setdefault(config.dataset, {})[config.model] = scores
    improvement_rows = []
    baseline_name = PriorVariant.UNSTRUCTURED.value
    for dataset, fits in by_dataset.items():
        if baseline_name not in fits:
            continue
        base_scores = fits[baseline_name]
        for model, scores in fits.items():
            if model == baseline_name:
                continue
            for key, score in scores.items():
                improvement_rows.append({
                    "model": model, "dataset": dataset,
                    "s": key[0], "t": key[1], "a": key[2],
                    "crps_model": score, "crps_baseline": base_scores[key],
                    "improvement": base_scores[key] - score,
                })
    bias_df = pd.DataFrame(bias_rows)
    time_df = pd.DataFrame(time_rows)
    crps_df = pd.DataFrame(crps_rows)
    bias_df.to_csv(out / "bias_overall.csv", index=False)
    time_df.to_csv(out / "bias_time.csv", index=False)
    crps_df.to_csv(out / "crps.csv", index=False)
    imp_df = pd.DataFrame(improvement_rows)
    imp_df.to_csv(out / "crps_improvement.csv", index=False)
    if not args.no_figures:
        figures.plot_bias_box(bias_df, out / "bias_overall.png")
        if not imp_df.empty:
            merged = imp_df.merge(
                crps_df[["model", "dataset", "s", "t", "a", "n", "unverified_frac"]],
                on=["model", "dataset", "s", "t", "a"], how="left",
            )
            figures.plot_crps_improvement(merged, out / "crps_improvement.png")
    print(f"evaluated {len(args.fit)} fit(s) -> {out}")
    return 0


def cmd_report(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fit_dir = Path(args.fit)
    summary = vio.read_summary(fit_dir / "summary.csv")
    phi_frame = pd.read_csv(fit_dir / "phi_mean.csv")
    lam_frame = pd.read_csv(fit_dir / "lambda_mean.csv")
    n_time = int(summary["t"].max())
    n_age = int(summary["a"].max())
    n_classes = int(phi_frame["class"].max())
    n_symptoms = int(phi_frame["symptom"].max())
    phi = (phi_frame.sort_values(["cause", "class", "symptom"])["probability"]
           .to_numpy().reshape(2, n_classes, n_symptoms))
    n_strata = int(lam_frame["stratum"].max())
    lam = (lam_frame.sort_values(["cause", "class", "stratum"])["weight"]
           .to_numpy().reshape(2, n_classes, n_strata))
    profiles, weights = ev.latent_profile_tables(phi, lam, n_time, n_age)
    profiles.to_csv(out / "phi_profiles.csv", index=False)
    weights.to_csv(out / "lambda_stacks.csv", index=False)
    trajectories = summary.sort_values(["s", "a", "t"])[
        ["s", "a", "t", "n", "mean", "lower", "upper"]
    ]
    trajectories.to_csv(out / "csmf_trajectories.csv", index=False)
    if not args.no_figures:
        truth = vio.read_truth(args.truth).prevalence if args.truth else None
        figures.plot_csmf_trajectories(summary, out / "csmf_trajectories.png", truth)
        figures.plot_symptom_profiles(profiles, out / "phi_profiles.png")
        figures.plot_class_weight_stacks(weights, out / "lambda_stacks.png")
    print(f"report for {fit_dir} -> {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: invalid: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: internal: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

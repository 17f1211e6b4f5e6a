"""Command-line entry point (``nodewise``)."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import io
from .classifier import LinearModel, micro_f1, predict, train
from .exact import ExactPropagationPlan, propagate_exact
from .ghd import DEFAULT_HARD_CAP, DEFAULT_TAIL_TOL, build_ghd_table
from .graph import connectivity_report, load_edge_list
from .pipeline import PipelineError, RunConfig, run_pipeline
from .sampling import SamplerConfig, neighbor_weight_profile, propagate_sampled
from .sbm import generate_sbm_fixture
from .spectral import DEFAULT_L_CAP, compute_lengths

logger = logging.getLogger("nodewise")


def _add_diffusion_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega", type=float, default=1.15)
    p.add_argument("--rho", type=float, default=0.06)
    p.add_argument("--lambda-mode", choices=["exact", "heuristic"], default="heuristic")
    p.add_argument("--tau", type=float, default=1.0, help="tau-distance threshold (exact lambda mode)")
    p.add_argument("--tau-prime", type=float, default=1.7, help="merged length scale (heuristic mode)")
    p.add_argument("--l-cap", type=int, default=DEFAULT_L_CAP)
    p.add_argument("--ghd-tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    p.add_argument("--ghd-hard-cap", type=int, default=DEFAULT_HARD_CAP)


def _add_sampler_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=int, default=None, help="override the walk budget")
    p.add_argument("--renormalize-early-stop", action="store_true")


def _add_io_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--targets", default="all", help="file of node ids, or 'all'")
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=["tsv", "binary"], default=None)
    p.add_argument("--threads", type=int, default=1)


def _prepare(args):
    g = load_edge_list(args.graph)
    connectivity_report(g)
    x = io.read_matrix(args.features)
    targets = io.read_targets(args.targets, g.n)
    tau = args.tau if args.lambda_mode == "exact" else args.tau_prime
    lengths = compute_lengths(g, targets, mode=args.lambda_mode, tau=tau, l_cap=args.l_cap)
    table = build_ghd_table(args.omega, args.rho, args.ghd_tail_tol, args.ghd_hard_cap)
    return g, x, lengths, table


def cmd_propagate_exact(args) -> int:
    g, x, lengths, table = _prepare(args)
    z = propagate_exact(g, x, ExactPropagationPlan.from_lengths(lengths, table), threads=args.threads)
    io.write_embedding(args.output, z, lengths.targets, args.format)
    return 0


def _sampler(args) -> SamplerConfig:
    return SamplerConfig(
        epsilon=args.epsilon,
        eta=args.eta,
        delta=args.delta,
        seed=args.seed,
        renormalize_on_early_stop=args.renormalize_early_stop,
        theta_override=args.theta,
    )


def cmd_propagate_sample(args) -> int:
    g, x, lengths, table = _prepare(args)
    cfg = _sampler(args)
    res = propagate_sampled(g, x, lengths, table, cfg, threads=args.threads, return_stats=True)
    io.write_embedding(args.output, res.z, lengths.targets, args.format)
    print(json.dumps({
        "theta": cfg.theta,
        "K": cfg.K,
        "walks": int(res.walks.sum()),
        "neighbors_kept": int(res.kept.sum()),
        "early_stops": res.early_stops,
    }))
    return 0


def _rows_for(z, ids, wanted, labels):
    index = {int(u): i for i, u in enumerate(ids)}
    missing = [int(u) for u in wanted if int(u) not in index]
    if missing:
        raise KeyError(f"embedding has no rows for nodes {missing[:5]}")
    return z[[index[int(u)] for u in wanted]], np.array([labels[int(u)] for u in wanted])


def cmd_train(args) -> int:
    t0 = time.perf_counter()
    z, ids = io.read_embedding(args.embeddings)
    labels = io.read_labels(args.labels)
    split = io.read_split(args.split)
    z_tr, y_tr = _rows_for(z, ids, split["train"], labels)
    z_va = y_va = None
    if split["val"].size:
        z_va, y_va = _rows_for(z, ids, split["val"], labels)
    model = train(
        z_tr, y_tr, lr=args.lr, epochs=args.epochs, l2=args.l2,
        num_classes=max(labels.values()) + 1, z_val=z_va, labels_val=y_va,
    )
    io.write_json(args.model_out, model.to_dict())
    score = micro_f1(predict(model, z_va), y_va) if z_va is not None else micro_f1(predict(model, z_tr), y_tr)
    print(json.dumps({"micro_f1": score, "epochs": args.epochs, "best_epoch": model.best_epoch,
                      "seconds": time.perf_counter() - t0}))
    return 0


def cmd_eval(args) -> int:
    t0 = time.perf_counter()
    model = LinearModel.from_dict(json.loads(Path(args.model).read_text()))
    z, ids = io.read_embedding(args.embeddings)
    labels = io.read_labels(args.labels)
    split = io.read_split(args.split)
    z_s, y_s = _rows_for(z, ids, split[args.subset], labels)
    out = {"micro_f1": micro_f1(predict(model, z_s), y_s), "epochs": model.hyper.get("epochs"),
           "seconds": time.perf_counter() - t0}
    print(json.dumps(out))
    return 0


def cmd_pipeline(args) -> int:
    values = {}
    if args.config:
        values = io.read_kv_config(args.config)
        base = Path(args.config).parent
        for key in ("graph", "features", "labels", "split", "output", "report"):
            if key in values and not Path(values[key]).is_absolute():
                values[key] = str(base / values[key])
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig.from_mapping(values)
    report = run_pipeline(cfg)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_stats_ghd(args) -> int:
    table = build_ghd_table(args.omega, args.rho, args.tail_tol, args.hard_cap)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        out.write("ell,weight\n")
        for ell, w in enumerate(table.weights):
            out.write(f"{ell},{w:.17g}\n")
    finally:
        if args.output:
            out.close()
    return 0


def cmd_stats_profile(args) -> int:
    g = load_edge_list(args.graph)
    tau = args.tau if args.lambda_mode == "exact" else args.tau_prime
    lengths = compute_lengths(g, [args.node], mode=args.lambda_mode, tau=tau, l_cap=args.l_cap)
    table = build_ghd_table(args.omega, args.rho, args.ghd_tail_tol, args.ghd_hard_cap)
    rows = neighbor_weight_profile(g, table, args.node, int(lengths.lengths[0]), _sampler(args))
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        out.write("rank,weight,cumulative\n")
        for rank, w, c in rows:
            out.write(f"{int(rank)},{w:.17g},{c:.17g}\n")
    finally:
        if args.output:
            out.close()
    return 0


def cmd_gen_sbm(args) -> int:
    fx = generate_sbm_fixture(args.blocks, args.per_block, args.p_in, args.p_out, args.feature_noise, args.seed)
    paths = fx.write(args.out)
    print(json.dumps({k: str(v) for k, v in paths.items()}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nodewise", description="Node-wise graph diffusion")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate-exact", help="exact truncated diffusion")
    _add_io_args(p)
    _add_diffusion_args(p)
    p.set_defaults(func=cmd_propagate_exact)

    p = sub.add_parser("propagate-sample", help="random-walk sampled diffusion")
    _add_io_args(p)
    _add_diffusion_args(p)
    _add_sampler_args(p)
    p.set_defaults(func=cmd_propagate_sample)

    p = sub.add_parser("train", help="fit the softmax head on embeddings")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--l2", type=float, default=5e-4)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--subset", choices=list(io.SPLIT_NAMES), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="load, propagate, train, evaluate, report")
    p.add_argument("--config", help="key=value config file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "renormalize_early_stop":
            p.add_argument(flag, action="store_const", const=True, default=None)
        else:
            p.add_argument(flag, dest=f.name, default=None)
    p.set_defaults(func=cmd_pipeline)

    stats = sub.add_parser("stats", help="diagnostic tables")
    ssub = stats.add_subparsers(dest="stats_command", required=True)
    p = ssub.add_parser("ghd", help="hop weights as CSV")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--tail-tol", type=float, default=DEFAULT_TAIL_TOL)
    p.add_argument("--hard-cap", type=int, default=DEFAULT_HARD_CAP)
    p.add_argument("--output")
    p.set_defaults(func=cmd_stats_ghd)

    p = ssub.add_parser("profile", help="sampled neighbor weight profile as CSV")
    p.add_argument("--graph", required=True)
    p.add_argument("--node", type=int, required=True)
    p.add_argument("--output")
    _add_diffusion_args(p)
    _add_sampler_args(p)
    p.set_defaults(func=cmd_stats_profile)

    p = sub.add_parser("gen-sbm", help="write a stochastic block model fixture")
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--per-block", type=int, default=100)
    p.add_argument("--p-in", type=float, default=0.1)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--feature-noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_sbm)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, IndexError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

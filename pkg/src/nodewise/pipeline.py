"""End-to-end run: load, lengths, propagate, train, evaluate, report."""
from __future__ import annotations

import dataclasses
import logging
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .classifier import micro_f1, predict, train
from .exact import ExactPropagationPlan, propagate_exact
from .ghd import DEFAULT_HARD_CAP, DEFAULT_TAIL_TOL, build_ghd_table
from .graph import DisconnectedGraphWarning, connectivity_report, load_edge_list
from .sampling import SamplerConfig, propagate_sampled
from .spectral import DEFAULT_L_CAP, compute_lengths, estimate_lambda_exact

logger = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    graph: str | None = None
    features: str | None = None
    labels: str | None = None
    split: str | None = None
    output: str | None = None
    report: str | None = None
    targets: str = "split"
    mode: str = "sample"
    lambda_mode: str = "heuristic"
    omega: float = 1.15
    rho: float = 0.06
    tau: float = 1.0
    tau_prime: float = 1.7
    epsilon: float = 0.02
    eta: float = 2.0
    delta: float = 0.01
    theta_scale: float = 1.0
    renormalize_early_stop: bool = False
    seed: int = 0
    threads: int = 1
    l_cap: int = DEFAULT_L_CAP
    ghd_tail_tol: float = DEFAULT_TAIL_TOL
    ghd_hard_cap: int = DEFAULT_HARD_CAP
    lr: float = 0.1
    epochs: int = 300
    l2: float = 5e-4

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        kwargs = {}
        for key, raw in values.items():
            if key not in cls.__dataclass_fields__:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(raw, cls.__dataclass_fields__[key].default)
        return cls(**kwargs)

    def validate(self) -> None:
        for name in ("graph", "features", "labels", "split"):
            if getattr(self, name) is None:
                raise ValueError(f"missing required path {name!r}")
        if self.mode not in ("exact", "sample"):
            raise ValueError(f"mode must be exact or sample, got {self.mode!r}")
        if self.lambda_mode not in ("exact", "heuristic"):
            raise ValueError(f"lambda_mode must be exact or heuristic, got {self.lambda_mode!r}")
        if self.theta_scale <= 0:
            raise ValueError("theta_scale must be positive")

    def sampler(self) -> SamplerConfig:
        cfg = SamplerConfig(
            epsilon=self.epsilon,
            eta=self.eta,
            delta=self.delta,
            seed=self.seed,
            renormalize_on_early_stop=self.renormalize_early_stop,
        )
        if self.theta_scale != 1.0:
            cfg = dataclasses.replace(cfg, theta_override=max(1, round(cfg.theta * self.theta_scale)))
        return cfg


def _coerce(raw, default):
    if not isinstance(raw, str):
        return raw
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


@dataclass
class RunReport:
    config: dict
    timings: dict = field(default_factory=dict)
    graph_stats: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


class _Stage:
    def __init__(self, report: RunReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


def run_pipeline(cfg: RunConfig, embeddings_out: dict | None = None) -> RunReport:
    """Run every stage; failures surface as ``PipelineError`` tagged with the stage.

    When ``embeddings_out`` is a dict it receives ``z`` and ``ids``.
    """
    report = RunReport(config=dataclasses.asdict(cfg))
    t_start = time.perf_counter()

    with _Stage(report, "config"):
        cfg.validate()

    with _Stage(report, "load"):
        for name in ("graph", "features", "labels", "split"):
            if not Path(getattr(cfg, name)).exists():
                raise FileNotFoundError(f"{name} file not found: {getattr(cfg, name)}")
        g = load_edge_list(cfg.graph)
        x = io.read_matrix(cfg.features)
        if x.shape[0] != g.n:
            raise ValueError(f"features have {x.shape[0]} rows, graph has {g.n} nodes")
        label_map = io.read_labels(cfg.labels)
        split = io.read_split(cfg.split)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DisconnectedGraphWarning)
            conn = connectivity_report(g)
        for w in caught:
            logger.warning("%s", w.message)
            report.warnings.append(str(w.message))
        report.graph_stats = {**g.stats(), "components": conn.count}

    with _Stage(report, "lengths"):
        if cfg.targets == "split":
            targets = np.concatenate([split[k] for k in io.SPLIT_NAMES])
        else:
            targets = io.read_targets(cfg.targets, g.n)
        lam = None
        if cfg.lambda_mode == "exact":
            est = estimate_lambda_exact(g)
            lam = est.lam
            report.counters["lambda"] = lam
            report.counters["lambda_iterations"] = est.iterations
        tau = cfg.tau if cfg.lambda_mode == "exact" else cfg.tau_prime
        lengths = compute_lengths(g, targets, mode=cfg.lambda_mode, tau=tau, lam=lam, l_cap=cfg.l_cap)
        table = build_ghd_table(cfg.omega, cfg.rho, cfg.ghd_tail_tol, cfg.ghd_hard_cap)
        report.counters["L"] = lengths.L
        report.counters["targets"] = int(targets.size)
        if table.hit_hard_cap:
            report.warnings.append("GHD table hit its hard cap before the tail tolerance")

    with _Stage(report, "propagation"):
        if cfg.mode == "exact":
            z = propagate_exact(g, x, ExactPropagationPlan.from_lengths(lengths, table), threads=cfg.threads)
        else:
            sampler = cfg.sampler()
            res = propagate_sampled(g, x, lengths, table, sampler, threads=cfg.threads, return_stats=True)
            z = res.z
            report.counters.update(
                theta=sampler.theta,
                K=sampler.K,
                walks=int(res.walks.sum()),
                neighbors_kept=int(res.kept.sum()),
                early_stops=res.early_stops,
            )
        row = {int(u): i for i, u in enumerate(targets)}

    def rows(ids):
        missing = [int(u) for u in ids if int(u) not in row]
        if missing:
            raise KeyError(f"no embedding for nodes {missing[:5]}")
        return z[[row[int(u)] for u in ids]], np.array([label_map[int(u)] for u in ids])

    with _Stage(report, "training"):
        z_tr, y_tr = rows(split["train"])
        z_va, y_va = rows(split["val"]) if split["val"].size else (None, None)
        model = train(
            z_tr, y_tr, lr=cfg.lr, epochs=cfg.epochs, l2=cfg.l2,
            num_classes=max(label_map.values()) + 1, z_val=z_va, labels_val=y_va, seed=cfg.seed,
        )

    with _Stage(report, "evaluation"):
        for name in io.SPLIT_NAMES:
            if split[name].size:
                z_s, y_s = rows(split[name])
                report.metrics[f"{name}_micro_f1"] = micro_f1(predict(model, z_s), y_s)
        report.metrics["micro_f1"] = report.metrics.get("test_micro_f1")
        report.metrics["best_epoch"] = model.best_epoch

    with _Stage(report, "write"):
        if cfg.output:
            out = Path(cfg.output)
            out.mkdir(parents=True, exist_ok=True)
            io.write_embedding(out / "embeddings.tsv", z, targets)
            io.write_json(out / "model.json", model.to_dict())
        report.timings["total"] = time.perf_counter() - t_start
        if cfg.report:
            io.write_json(cfg.report, report.to_dict())
        elif cfg.output:
            io.write_json(Path(cfg.output) / "report.json", report.to_dict())

    if embeddings_out is not None:
        embeddings_out["z"] = z
        embeddings_out["ids"] = targets
    return report

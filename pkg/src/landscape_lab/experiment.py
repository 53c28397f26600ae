"""Declarative experiment runner: sweeps, certificates and report files.

A single INI-style config file (key = value under [section] headers)
declares dataset x network x augmentation x lambda x seeds. Running it
produces, in the output directory:

* rows.csv      one line per run: optimizer outcome plus its certificate
* summary.txt   aligned per-(arm, lambda) aggregate table
* manifest.txt  flat key = value echo of the config, tolerances, dataset
                hash and timestamp (the only non-reproducible field)

Row order is (arm, lambda index, seed) regardless of scheduling, and
rows.csv/summary.txt are byte-identical across reruns of the same config.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__ as _package_version
from .augment import AugmentedLoss
from .certify import CertificateThresholds, full_certificate
from .datasets import (
    Dataset,
    gen_circles,
    gen_conflicting,
    gen_linearly_separable,
    gen_poly_separable,
    gen_xor,
    load,
    serialize,
)
from .losses import Augmentation, EmpiricalLossConfig, HingeLoss
from .networks import NetworkSpec
from .optimize import OptimizerConfig, minimize, random_init

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ReportRow",
    "parse_config",
    "build_dataset",
    "describe",
    "run_experiment",
    "compare_baseline",
    "ROW_COLUMNS",
]


class ConfigError(ValueError):
    """Invalid experiment config; the message starts with the field path."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: dict
    network: NetworkSpec
    hinge_power: int
    augmentation: Augmentation
    lambdas: tuple[float, ...]
    seeds: int
    seed_offset: int
    optimizer: OptimizerConfig
    thresholds: CertificateThresholds
    out_dir: Path
    threads: int


@dataclass(frozen=True)
class ReportRow:
    run_id: str
    arm: str
    lam: float
    seed: int
    termination: str
    iterations: int
    final_loss: float
    grad_norm: float
    min_hessian_eig: float | None
    inactivity: float
    max_tensor_residual: float
    max_residual_ratio: float
    train_error: float
    oracle_error: float
    verdict: str


ROW_COLUMNS = (
    "run_id",
    "arm",
    "lambda",
    "seed",
    "termination",
    "iterations",
    "final_loss",
    "grad_norm",
    "min_hessian_eig",
    "inactivity",
    "max_tensor_residual",
    "max_residual_ratio",
    "train_error",
    "oracle_error",
    "verdict",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _get(parser, section, key, convert, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"{section}.{key}: required field is missing")
        return default
    raw = parser.get(section, key).strip()
    try:
        return convert(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} ({exc})") from exc


def _parse_widths(raw: str) -> tuple[int, ...]:
    raw = raw.strip()
    if not raw:
        return ()
    return tuple(int(w.strip()) for w in raw.split(","))


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in raw.split(",") if v.strip())


def parse_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config: cannot read {path}")

    if not parser.has_section("dataset"):
        raise ConfigError("dataset: section is missing")
    generator = _get(parser, "dataset", "generator", str, required=True)
    known = ("xor", "linearly_separable", "circles", "poly_separable", "conflicting", "file")
    if generator not in known:
        raise ConfigError(f"dataset.generator: unknown generator {generator!r}; expected one of {known}")
    dataset_cfg = {"generator": generator}
    for key, conv in (
        ("path", str),
        ("n", int),
        ("d", int),
        ("margin", float),
        ("degree", int),
        ("seed", int),
        ("n_groups", int),
        ("dups", int),
        ("flip_fraction", float),
    ):
        value = _get(parser, "dataset", key, conv)
        if value is not None:
            dataset_cfg[key] = value
    if generator == "file" and "path" not in dataset_cfg:
        raise ConfigError("dataset.path: required when generator = file")

    widths = _get(parser, "network", "widths", _parse_widths, default=())
    activation = _get(parser, "network", "activation", str, default="tanh")
    leaky_slope = _get(parser, "network", "leaky_slope", float, default=0.01)
    d = dataset_cfg.get("d", 2)
    try:
        network = NetworkSpec(d, widths, activation, leaky_slope)
    except ValueError as exc:
        raise ConfigError(f"network: {exc}") from exc

    hinge_power = _get(parser, "loss", "hinge_power", int, default=3)
    aug_name = _get(parser, "loss", "augmentation", str, default="skip_exp")
    degree = _get(parser, "loss", "monomial_degree", int)
    try:
        if aug_name == "skip_monomial":
            if degree is None:
                raise ConfigError("loss.monomial_degree: required for skip_monomial")
            augmentation = Augmentation.skip_monomial(degree)
        else:
            augmentation = Augmentation(aug_name)
        HingeLoss(hinge_power)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"loss: {exc}") from exc
    lambdas = _get(parser, "loss", "lambdas", _parse_floats, default=(0.01,))
    if not lambdas:
        raise ConfigError("loss.lambdas: need at least one value")
    if augmentation.kind != "none" and any(lam <= 0 for lam in lambdas):
        raise ConfigError("loss.lambdas: augmented losses need lambda > 0")

    seeds = _get(parser, "optimizer", "seeds", int, default=1)
    if seeds < 1:
        raise ConfigError("optimizer.seeds: seed count must be >= 1")
    seed_offset = _get(parser, "optimizer", "seed_offset", int, default=0)
    try:
        optimizer = OptimizerConfig(
            max_iters=_get(parser, "optimizer", "max_iters", int, default=6000),
            grad_tol=_get(parser, "optimizer", "grad_tol", float, default=1e-8),
            init_scale=_get(parser, "optimizer", "init_scale", float, default=0.01),
            perturbation_radius=_get(parser, "optimizer", "perturbation_radius", float, default=1e-3),
            patience=_get(parser, "optimizer", "patience", int, default=25),
            max_perturbations=_get(parser, "optimizer", "max_perturbations", int, default=10),
            newton_gate=_get(parser, "optimizer", "newton_gate", float, default=0.1),
        )
    except ValueError as exc:
        raise ConfigError(f"optimizer: {exc}") from exc

    try:
        thresholds = CertificateThresholds(
            grad_tol=_get(parser, "certificate", "grad_tol", float, default=1e-8),
            hessian_tol=_get(parser, "certificate", "hessian_tol", float, default=1e-4),
            inactivity_tol=_get(parser, "certificate", "inactivity_tol", float, default=1e-3),
            tensor_rel_tol=_get(parser, "certificate", "tensor_rel_tol", float, default=1e-4),
            max_order=_get(parser, "certificate", "max_order", int, default=4),
            restarts=_get(parser, "certificate", "restarts", int, default=32),
        )
    except ValueError as exc:
        raise ConfigError(f"certificate: {exc}") from exc

    out_dir = Path(_get(parser, "output", "dir", str, default="out"))
    threads = _get(parser, "output", "threads", int, default=1)
    if threads < 1:
        raise ConfigError("output.threads: must be >= 1")

    return ExperimentConfig(
        dataset=dataset_cfg,
        network=network,
        hinge_power=hinge_power,
        augmentation=augmentation,
        lambdas=lambdas,
        seeds=seeds,
        seed_offset=seed_offset,
        optimizer=optimizer,
        thresholds=thresholds,
        out_dir=out_dir,
        threads=threads,
    )


def build_dataset(cfg: dict) -> Dataset:
    name = cfg["generator"]
    if name == "file":
        return load(cfg["path"])
    if name == "xor":
        return gen_xor()
    if name == "linearly_separable":
        return gen_linearly_separable(
            cfg.get("n", 32), cfg.get("d", 2), cfg.get("margin", 0.5), cfg.get("seed", 0)
        )
    if name == "circles":
        return gen_circles(cfg.get("n", 32), cfg.get("seed", 0))
    if name == "poly_separable":
        return gen_poly_separable(
            cfg.get("n", 32),
            cfg.get("d", 2),
            cfg.get("degree", 2),
            cfg.get("seed", 0),
            cfg.get("margin", 0.5),
        )
    if name == "conflicting":
        return gen_conflicting(
            cfg.get("n_groups", 4),
            cfg.get("dups", 4),
            cfg.get("flip_fraction", 0.25),
            cfg.get("seed", 0),
            cfg.get("d", 2),
        )
    raise ConfigError(f"dataset.generator: unknown generator {name!r}")


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _arm_loss_config(config: ExperimentConfig, arm: Augmentation, lam: float) -> EmpiricalLossConfig:
    eff_lam = lam if arm.kind != "none" else 0.0
    return EmpiricalLossConfig(HingeLoss(config.hinge_power), eff_lam, arm)


def _run_cell(dataset, config, arm: Augmentation, lam_index: int, lam: float, seed: int) -> ReportRow:
    cfg = _arm_loss_config(config, arm, lam)
    lossfn = AugmentedLoss(dataset, config.network, cfg)
    init = random_init(config.network, arm, config.optimizer.init_scale, seed)
    run = minimize(lossfn, init, config.optimizer, seed=seed)
    cert = full_certificate(dataset, config.network, cfg, run, config.thresholds)
    return ReportRow(
        run_id=f"{arm.kind}-l{lam_index}-s{seed}",
        arm=arm.kind,
        lam=lam,
        seed=seed,
        termination=run.reason,
        iterations=run.iterations,
        final_loss=run.loss,
        grad_norm=cert.grad_norm,
        min_hessian_eig=cert.min_hessian_eig,
        inactivity=cert.inactivity,
        max_tensor_residual=max(cert.tensor_residuals),
        max_residual_ratio=cert.max_residual_ratio,
        train_error=cert.train_error,
        oracle_error=cert.oracle_error,
        verdict=cert.verdict,
    )


def _row_line(row: ReportRow) -> str:
    eig = "" if row.min_hessian_eig is None else _fmt(row.min_hessian_eig)
    return ",".join(
        (
            row.run_id,
            row.arm,
            _fmt(row.lam),
            str(row.seed),
            row.termination,
            str(row.iterations),
            _fmt(row.final_loss),
            _fmt(row.grad_norm),
            eig,
            _fmt(row.inactivity),
            _fmt(row.max_tensor_residual),
            _fmt(row.max_residual_ratio),
            _fmt(row.train_error),
            _fmt(row.oracle_error),
            row.verdict,
        )
    )


def rows_to_csv(rows: list[ReportRow]) -> str:
    out = io.StringIO()
    out.write(",".join(ROW_COLUMNS) + "\n")
    for row in rows:
        out.write(_row_line(row) + "\n")
    return out.getvalue()


def summarize(rows: list[ReportRow]) -> str:
    """Aligned aggregate table, one line per (arm, lambda)."""
    cells: dict[tuple[str, float], list[ReportRow]] = {}
    for row in rows:
        cells.setdefault((row.arm, row.lam), []).append(row)
    header = (
        f"{'arm':<14} {'lambda':>10} {'runs':>5} {'converged':>9} {'certified':>9} "
        f"{'err>0':>7} {'stuck':>5} {'mean|a|':>12}"
    )
    lines = [header, "-" * len(header)]
    for (arm, lam), group in cells.items():
        n = len(group)
        converged = [r for r in group if r.termination == "converged"]
        certified = sum(1 for r in group if r.verdict == "certified-global")
        err_pos = sum(1 for r in group if r.train_error > 0)
        stuck = sum(1 for r in converged if r.train_error > 0)
        mean_a = np.mean([r.inactivity for r in converged]) if converged else float("nan")
        lines.append(
            f"{arm:<14} {lam:>10g} {n:>5d} {len(converged):>9d} {certified / n:>9.3f} "
            f"{err_pos / n:>7.3f} {stuck:>5d} {mean_a:>12.3e}"
        )
    return "\n".join(lines) + "\n"


def _manifest(config: ExperimentConfig, dataset: Dataset, rows: list[ReportRow], verb: str) -> str:
    lines = [
        "format = landscape-lab manifest v1",
        f"verb = {verb}",
        f"created_at = {time.strftime('%Y-%m-%dT%H:%M:%S%z')}",
        f"package_version = {_package_version}",
        f"dataset_sha256 = {hashlib.sha256(serialize(dataset).encode()).hexdigest()}",
        f"row_count = {len(rows)}",
    ]
    for key, value in sorted(config.dataset.items()):
        lines.append(f"config.dataset.{key} = {value}")
    net = config.network
    lines.append(f"config.network.widths = {','.join(str(w) for w in net.layer_widths)}")
    lines.append(f"config.network.activation = {net.activation}")
    lines.append(f"config.network.leaky_slope = {_fmt(net.leaky_slope)}")
    lines.append(f"config.loss.hinge_power = {config.hinge_power}")
    lines.append(f"config.loss.augmentation = {config.augmentation.kind}")
    if config.augmentation.degree is not None:
        lines.append(f"config.loss.monomial_degree = {config.augmentation.degree}")
    lines.append(f"config.loss.lambdas = {','.join(_fmt(l) for l in config.lambdas)}")
    opt = config.optimizer
    for key in ("max_iters", "grad_tol", "init_scale", "perturbation_radius", "patience",
                "max_perturbations", "armijo_c", "hessian_tol", "newton_gate"):
        value = getattr(opt, key)
        lines.append(f"config.optimizer.{key} = {_fmt(value) if isinstance(value, float) else value}")
    lines.append(f"config.optimizer.seeds = {config.seeds}")
    lines.append(f"config.optimizer.seed_offset = {config.seed_offset}")
    thr = config.thresholds
    for key in ("grad_tol", "hessian_tol", "inactivity_tol", "tensor_rel_tol", "max_order", "restarts"):
        value = getattr(thr, key)
        lines.append(f"threshold.{key} = {_fmt(value) if isinstance(value, float) else value}")
    lines.append(f"config.output.threads = {config.threads}")
    return "\n".join(lines) + "\n"


def _execute_sweep(config: ExperimentConfig, arms: list[Augmentation], verb: str):
    dataset = build_dataset(config.dataset)
    if dataset.d != config.network.input_dim:
        raise ConfigError(
            f"network: input_dim {config.network.input_dim} does not match dataset d={dataset.d}"
        )
    jobs = [
        (arm, li, lam, seed)
        for arm in arms
        for li, lam in enumerate(config.lambdas)
        for seed in range(config.seed_offset, config.seed_offset + config.seeds)
    ]
    rows: list[ReportRow | None] = [None] * len(jobs)
    failure: Exception | None = None
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = {
                pool.submit(_run_cell, dataset, config, arm, li, lam, seed): idx
                for idx, (arm, li, lam, seed) in enumerate(jobs)
            }
            for future, idx in futures.items():
                try:
                    rows[idx] = future.result()
                except Exception as exc:  # noqa: BLE001 - partial results are kept
                    failure = exc
    else:
        for idx, (arm, li, lam, seed) in enumerate(jobs):
            try:
                rows[idx] = _run_cell(dataset, config, arm, li, lam, seed)
            except Exception as exc:  # noqa: BLE001
                failure = exc

    done = [row for row in rows if row is not None]
    config.out_dir.mkdir(parents=True, exist_ok=True)
    (config.out_dir / "rows.csv").write_text(rows_to_csv(done), encoding="ascii")
    (config.out_dir / "summary.txt").write_text(summarize(done), encoding="ascii")
    (config.out_dir / "manifest.txt").write_text(_manifest(config, dataset, done, verb), encoding="ascii")
    return done, failure


def run_experiment(config: ExperimentConfig):
    """Run the sweep for the configured augmentation and write report files.

    Returns (rows, failure); failure is the first exception raised by any
    run, with all completed rows already flushed to disk.
    """
    return _execute_sweep(config, [config.augmentation], "run")


def compare_baseline(config: ExperimentConfig):
    """Run the unaugmented baseline and the augmented arm on shared inits.

    Both arms use the same seeds, and random_init draws the base-network
    portion first, so the two arms start from identical base parameters.
    """
    if config.augmentation.kind == "none":
        arms = [Augmentation.none()]  # degenerate config: both arms identical
    else:
        arms = [Augmentation.none(), config.augmentation]
    return _execute_sweep(config, arms, "compare")


def describe(config: ExperimentConfig) -> str:
    """Human-readable dry-run plan; touches nothing on disk."""
    arms = 1 if config.augmentation.kind == "none" else 2
    ds = ", ".join(f"{k}={v}" for k, v in sorted(config.dataset.items()))
    widths = ",".join(str(w) for w in config.network.layer_widths) or "(linear)"
    lines = [
        f"dataset: {ds}",
        f"network: input_dim={config.network.input_dim} widths={widths} "
        f"activation={config.network.activation}",
        f"loss: hinge_power={config.hinge_power} augmentation={config.augmentation.kind}"
        + (f" degree={config.augmentation.degree}" if config.augmentation.degree is not None else ""),
        f"lambdas: {', '.join(_fmt(l) for l in config.lambdas)}",
        f"seeds: {config.seeds} starting at {config.seed_offset}",
        f"output: {config.out_dir}",
        "",
        f"run: {len(config.lambdas) * config.seeds} runs planned",
        f"compare: {len(config.lambdas) * config.seeds * arms} runs planned",
    ]
    return "\n".join(lines) + "\n"

"""Randomized verification campaigns: configuration, trial execution and reports."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
import yaml
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..channel_div import SearchOptions
from ..constants import CHECK_TOL, MAX_DIM
from ..divergence import DivergenceKind, MeasuredOptions, RenyiOrder
from ..errors import ConfigError, QChainError
from ..quantum import (
    DensityOperator,
    PositiveMapRep,
    random_channel,
    random_full_rank_state,
    random_positive_map,
    random_state,
    random_unital_channel,
    random_unitary,
)
from ..serialization import format_number, to_json
from .base import kind_admits
from .models import CheckResult
from .verifier import Verifier

MapFamily = Literal["cptp", "transpose_positive", "mixed"]
DEFAULT_ORDERS = ["0.6", "1", "1.5", "2", "4", "inf"]
CSV_COLUMNS = ["check", "dim", "alpha", "trial", "lhs_bits", "rhs_bits", "slack", "pass"]


# --- Check registry ---


@dataclass(frozen=True)
class TrialContext:
    verifier: Verifier
    rng: np.random.Generator
    dim: int
    order: RenyiOrder | None
    family: MapFamily
    trial: int
    digest: str

    def pair(self) -> tuple[DensityOperator, DensityOperator]:
        """Generic rho and a full-rank sigma with bounded condition number."""
        return random_state(self.dim, seed=self.rng), random_full_rank_state(self.dim, seed=self.rng)

    def maps(self) -> tuple[PositiveMapRep, PositiveMapRep]:
        transpose = self.family == "transpose_positive" or (self.family == "mixed" and self.trial % 2 == 1)
        make = random_positive_map if transpose else random_channel
        return make(self.dim, seed=self.rng), make(self.dim, seed=self.rng)


Runner = Callable[[TrialContext], CheckResult]


@dataclass(frozen=True)
class CheckDefinition:
    run: Runner
    admits: Callable[[RenyiOrder], bool] | None = None
    explores: Callable[[RenyiOrder], bool] = lambda order: False
    max_dim: int = MAX_DIM


def _above_one(order: RenyiOrder) -> bool:
    return order.is_infinite or order.alpha > 1.0


def _run_pinching_inequality(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    return ctx.verifier.check_pinching_inequality(rho, sigma, digest=ctx.digest)


def _run_pinching_lemma(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    e, f = ctx.maps()
    return ctx.verifier.check_pinching_lemma(e, f, rho, sigma, ctx.order, digest=ctx.digest)


def _run_matsumoto(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    return ctx.verifier.check_matsumoto(rho, sigma, ctx.order, digest=ctx.digest)


def _run_meta_chain(kind: DivergenceKind) -> Runner:
    def run(ctx: TrialContext) -> CheckResult:
        rho, sigma = ctx.pair()
        e, f = ctx.maps()
        if kind is DivergenceKind.GEOMETRIC:
            return ctx.verifier.check_geometric_chain(e, f, rho, sigma, ctx.order, digest=ctx.digest)
        return ctx.verifier.check_meta_chain(e, f, rho, sigma, ctx.order, kind, digest=ctx.digest)

    return run


def _run_sandwiched_chain(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    e, f = ctx.maps()
    return ctx.verifier.check_sandwiched_chain(
        e, f, rho, sigma, ctx.order, explore=not _above_one(ctx.order), digest=ctx.digest
    )


def _run_preprocessing_chain(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    e, f = ctx.maps()
    basis = random_unitary(ctx.dim, ctx.rng)
    return ctx.verifier.check_preprocessing_chain(e, f, rho, sigma, ctx.order, basis=basis, digest=ctx.digest)


def _run_regularized_chain(ctx: TrialContext) -> CheckResult:
    rho, sigma = ctx.pair()
    e, f = ctx.maps()
    return ctx.verifier.check_regularized_chain(e, f, rho, sigma, ctx.order, n=2, digest=ctx.digest)


def _run_spectrum_trend(ctx: TrialContext) -> CheckResult:
    _, sigma = ctx.pair()
    return ctx.verifier.check_spectrum_trend(sigma, ctx.order, n=2, digest=ctx.digest)


def _run_unital_entropy(ctx: TrialContext) -> CheckResult:
    rho = random_state(ctx.dim, seed=ctx.rng)
    e = random_unital_channel(ctx.dim, seed=ctx.rng)
    f = random_unital_channel(ctx.dim, seed=ctx.rng)
    return ctx.verifier.check_unital_entropy(e, f, rho, ctx.order, digest=ctx.digest)


def _run_data_processing(kind: DivergenceKind) -> Runner:
    def run(ctx: TrialContext) -> CheckResult:
        rho, sigma = ctx.pair()
        channel = random_channel(ctx.dim, seed=ctx.rng)
        return ctx.verifier.check_data_processing(channel, rho, sigma, ctx.order, kind, digest=ctx.digest)

    return run


def _run_ordering(pair: str) -> Runner:
    def run(ctx: TrialContext) -> CheckResult:
        rho, sigma = ctx.pair()
        return ctx.verifier.check_ordering(rho, sigma, ctx.order, pair, digest=ctx.digest)

    return run


def _run_classical_reduction(ctx: TrialContext) -> CheckResult:
    u = random_unitary(ctx.dim, ctx.rng)
    p = ctx.rng.dirichlet(np.ones(ctx.dim))
    q = ctx.rng.dirichlet(np.ones(ctx.dim))
    rho = DensityOperator.from_matrix((u * p) @ u.conj().T)
    sigma = DensityOperator.from_matrix((u * q) @ u.conj().T)
    return ctx.verifier.check_classical_reduction(rho, sigma, ctx.order, digest=ctx.digest)


def _run_regularized_sequence(ctx: TrialContext) -> CheckResult:
    e, f = ctx.maps()
    return ctx.verifier.check_regularized_sequence(e, f, ctx.order, digest=ctx.digest)


_SANDWICHED = DivergenceKind.SANDWICHED
_GEOMETRIC = DivergenceKind.GEOMETRIC

CHECKS: dict[str, CheckDefinition] = {
    "pinching_inequality": CheckDefinition(_run_pinching_inequality),
    "pinching_lemma": CheckDefinition(_run_pinching_lemma, admits=lambda o: not o.is_one),
    "matsumoto": CheckDefinition(_run_matsumoto, admits=lambda o: True),
    "meta_chain_sandwiched": CheckDefinition(
        _run_meta_chain(_SANDWICHED), admits=lambda o: kind_admits(_SANDWICHED, o)
    ),
    "meta_chain_geometric": CheckDefinition(
        _run_meta_chain(_GEOMETRIC), admits=lambda o: kind_admits(_GEOMETRIC, o)
    ),
    "sandwiched_chain": CheckDefinition(
        _run_sandwiched_chain,
        admits=lambda o: not o.is_one,
        explores=lambda o: not _above_one(o),
    ),
    "preprocessing_chain": CheckDefinition(
        _run_preprocessing_chain, admits=lambda o: kind_admits(_SANDWICHED, o)
    ),
    "regularized_chain": CheckDefinition(_run_regularized_chain, admits=_above_one, max_dim=8),
    "spectrum_trend": CheckDefinition(_run_spectrum_trend, admits=_above_one, max_dim=8),
    "unital_entropy": CheckDefinition(_run_unital_entropy, admits=lambda o: o.is_one or _above_one(o)),
    "data_processing_sandwiched": CheckDefinition(
        _run_data_processing(_SANDWICHED), admits=lambda o: kind_admits(_SANDWICHED, o)
    ),
    "data_processing_geometric": CheckDefinition(
        _run_data_processing(_GEOMETRIC), admits=lambda o: kind_admits(_GEOMETRIC, o)
    ),
    "ordering_measured_sandwiched": CheckDefinition(
        _run_ordering("measured_sandwiched"), admits=lambda o: kind_admits(_SANDWICHED, o)
    ),
    "ordering_sandwiched_geometric": CheckDefinition(
        _run_ordering("sandwiched_geometric"), admits=lambda o: kind_admits(_GEOMETRIC, o)
    ),
    "classical_reduction": CheckDefinition(_run_classical_reduction, admits=lambda o: True),
    "regularized_sequence": CheckDefinition(_run_regularized_sequence, admits=lambda o: True, max_dim=4),
}


# --- Configuration ---


class CheckSpec(BaseModel):
    """One campaign entry; unset fields fall back to the campaign-wide values."""

    name: str
    trials: int | None = Field(default=None, ge=0)
    dims: list[int] | None = None
    orders: list[str] | None = None
    map_family: MapFamily | None = None

    @field_validator("name")
    @classmethod
    def _known(cls, value: str) -> str:
        if value not in CHECKS:
            raise ValueError(f"unknown check '{value}'; known: {', '.join(CHECKS)}")
        return value


def _validate_orders(orders: list[str] | None) -> list[str] | None:
    if orders is None:
        return None
    for spec in orders:
        try:
            RenyiOrder.parse(spec)
        except QChainError as exc:
            raise ValueError(str(exc)) from exc
    return orders


def _validate_dims(dims: list[int] | None) -> list[int] | None:
    if dims is None:
        return None
    for d in dims:
        if not 1 <= d <= MAX_DIM:
            raise ValueError(f"dimension {d} outside 1..{MAX_DIM}")
    return dims


class CampaignConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    checks: list[str | CheckSpec] = Field(default_factory=lambda: list(CHECKS))
    trials: int = Field(default=200, ge=0)
    dims: list[int] = Field(default_factory=lambda: [2, 3])
    orders: list[str] = Field(default_factory=lambda: list(DEFAULT_ORDERS))
    map_family: MapFamily = "cptp"
    rng_seed: int = Field(default=0, ge=0, lt=2**64)
    tol: float = Field(default=CHECK_TOL, gt=0.0)
    threads: int | None = Field(default=None, ge=1)
    search_restarts: int = Field(default=4, ge=0)
    search_refine_iters: int = Field(default=50, ge=0)
    measured_restarts: int = Field(default=2, ge=1)
    measured_refine_iters: int = Field(default=50, ge=0)

    @field_validator("orders")
    @classmethod
    def _orders(cls, value: list[str]) -> list[str]:
        return _validate_orders(value)

    @field_validator("dims")
    @classmethod
    def _dims(cls, value: list[int]) -> list[int]:
        return _validate_dims(value)

    @model_validator(mode="after")
    def _specs(self) -> "CampaignConfig":
        for spec in self.specs():
            _validate_orders(spec.orders)
            _validate_dims(spec.dims)
        return self

    def specs(self) -> list[CheckSpec]:
        """Checks with every campaign-wide default filled in."""
        resolved = []
        for entry in self.checks:
            spec = CheckSpec(name=entry) if isinstance(entry, str) else entry
            resolved.append(
                CheckSpec(
                    name=spec.name,
                    trials=self.trials if spec.trials is None else spec.trials,
                    dims=spec.dims or list(self.dims),
                    orders=spec.orders or list(self.orders),
                    map_family=spec.map_family or self.map_family,
                )
            )
        return resolved

    def verifier(self) -> Verifier:
        return Verifier(
            tol=self.tol,
            search=SearchOptions(restarts=self.search_restarts, refine_iters=self.search_refine_iters),
            measured_opts=MeasuredOptions(
                restarts=self.measured_restarts,
                refine_iters=self.measured_refine_iters,
                seed=self.rng_seed % 2**32,
            ),
        )


def load_campaign_config(path: Path) -> CampaignConfig:
    """Load a campaign document from JSON or YAML.

    Raises:
        ConfigError: if the file cannot be parsed or fails validation.
    """
    path = Path(path)
    try:
        text = path.read_text()
        data = yaml.safe_load(text) if path.suffix in (".yaml", ".yml") else json.loads(text)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read campaign config {path}: {exc}") from exc
    try:
        return CampaignConfig.model_validate(data or {})
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise ConfigError(f"invalid campaign config {path}: {location}: {first['msg']}") from exc


# --- Reports ---


class CampaignRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    check: str
    dim: int
    alpha: str
    trial: int
    lhs_bits: float
    rhs_bits: float
    slack: float
    passed: bool = Field(alias="pass")
    gated: bool
    instance_digest: str
    error: str | None = None


class CheckSummary(BaseModel):
    check: str
    trials: int = 0
    passed: int = 0
    failed: int = 0
    exploration: int = 0
    worst_slack: float = math.inf
    failing_digests: list[str] = Field(default_factory=list)


class CampaignReport(BaseModel):
    rng_seed: int
    summaries: list[CheckSummary] = Field(default_factory=list)
    rows: list[CampaignRow] = Field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def all_passed(self) -> bool:
        return all(s.failed == 0 for s in self.summaries)

    @property
    def total_trials(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class _Task:
    check: str
    check_idx: int
    cell_idx: int
    dim: int
    order: RenyiOrder | None
    family: MapFamily
    trial: int


def _cells(spec: CheckSpec, definition: CheckDefinition) -> list[tuple[int, RenyiOrder | None]]:
    dims = [d for d in spec.dims if d <= definition.max_dim]
    if definition.admits is None:
        return [(d, None) for d in dims]
    orders = [RenyiOrder.parse(o) for o in spec.orders]
    return [(d, o) for d in dims for o in orders if definition.admits(o)]


def _plan(config: CampaignConfig) -> list[_Task]:
    tasks = []
    for check_idx, spec in enumerate(config.specs()):
        definition = CHECKS[spec.name]
        for cell_idx, (dim, order) in enumerate(_cells(spec, definition)):
            tasks.extend(
                _Task(spec.name, check_idx, cell_idx, dim, order, spec.map_family, trial)
                for trial in range(spec.trials)
            )
    return tasks


def _execute(task: _Task, verifier: Verifier, rng_seed: int) -> CampaignRow:
    rng = np.random.default_rng([rng_seed, task.check_idx, task.cell_idx, task.trial])
    alpha = task.order.label if task.order is not None else ""
    digest = f"seed={rng_seed}/{task.check_idx}/{task.cell_idx}/{task.trial};dim={task.dim};alpha={alpha or '-'}"
    ctx = TrialContext(verifier, rng, task.dim, task.order, task.family, task.trial, digest)
    try:
        result = CHECKS[task.check].run(ctx)
    except QChainError as exc:
        logger.error(f"{task.check} raised {exc.code} on {digest}: {exc}")
        return CampaignRow(
            check=task.check,
            dim=task.dim,
            alpha=alpha,
            trial=task.trial,
            lhs_bits=math.nan,
            rhs_bits=math.nan,
            slack=-math.inf,
            passed=False,
            gated=True,
            instance_digest=digest,
            error=exc.code,
        )
    return CampaignRow(
        check=task.check,
        dim=task.dim,
        alpha=alpha,
        trial=task.trial,
        lhs_bits=result.lhs_bits,
        rhs_bits=result.rhs_bits,
        slack=result.slack,
        passed=result.passed,
        gated=result.gated,
        instance_digest=digest,
    )


def _summarize(rows: list[CampaignRow], checks: list[str]) -> list[CheckSummary]:
    summaries = {name: CheckSummary(check=name) for name in checks}
    for row in rows:
        summary = summaries[row.check]
        summary.trials += 1
        if not row.gated:
            summary.exploration += 1
            continue
        summary.worst_slack = min(summary.worst_slack, row.slack)
        if row.passed:
            summary.passed += 1
        else:
            summary.failed += 1
            summary.failing_digests.append(row.instance_digest)
    return list(summaries.values())


def run_check(
    name: str,
    dim: int,
    order: RenyiOrder | None = None,
    *,
    seed: int = 0,
    family: MapFamily = "cptp",
    verifier: Verifier | None = None,
) -> CheckResult:
    """Run one registered check on a random instance drawn from ``seed``.

    Raises:
        ConfigError: for unknown checks or cells the check does not admit.
    """
    definition = CHECKS.get(name)
    if definition is None:
        raise ConfigError(f"unknown check '{name}'; known: {', '.join(CHECKS)}")
    if not 1 <= dim <= definition.max_dim:
        raise ConfigError(f"{name} supports dimensions 1..{definition.max_dim}, got {dim}")
    if definition.admits is None:
        order = None
    elif order is None:
        raise ConfigError(f"{name} needs an order")
    elif not definition.admits(order):
        raise ConfigError(f"{name} does not admit alpha={order.label}")

    rng = np.random.default_rng(seed)
    digest = f"seed={seed};dim={dim};alpha={order.label if order is not None else '-'}"
    ctx = TrialContext(verifier or Verifier(), rng, dim, order, family, 0, digest)
    return definition.run(ctx)


def default_thread_count() -> int:
    return os.cpu_count() or 1


def run_campaign(config: CampaignConfig, threads: int | None = None) -> CampaignReport:
    """Run every configured check over its (dim, order) cells.

    Trials use independent RNG substreams keyed by (rng_seed, check, cell, trial), so the
    report does not depend on the thread count.
    """
    started = time.perf_counter()
    tasks = _plan(config)
    workers = config.threads or threads or default_thread_count()
    verifier = config.verifier()
    logger.info(f"Campaign: {len(tasks)} trials on {workers} thread(s), seed {config.rng_seed}")

    if workers == 1 or len(tasks) <= 1:
        rows = [_execute(task, verifier, config.rng_seed) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda task: _execute(task, verifier, config.rng_seed), tasks))

    names = list(dict.fromkeys(spec.name for spec in config.specs()))
    summaries = _summarize(rows, names)
    for summary in summaries:
        logger.info(
            f"{summary.check}: {summary.passed} passed, {summary.failed} failed, "
            f"{summary.exploration} exploratory (worst slack {summary.worst_slack:.3e})"
        )
    return CampaignReport(
        rng_seed=config.rng_seed,
        summaries=summaries,
        rows=rows,
        runtime_seconds=time.perf_counter() - started,
    )


def _csv_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return str(format_number(value))
    return str(value)


def write_csv(report: CampaignReport, path: Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            data = row.model_dump(by_alias=True)
            writer.writerow([_csv_value(data[col]) for col in CSV_COLUMNS])


def write_json(report: CampaignReport, path: Path) -> None:
    payload = report.model_dump(by_alias=True)
    payload["all_passed"] = report.all_passed
    Path(path).write_text(to_json(payload) + "\n")


def write_report(report: CampaignReport, path: Path) -> None:
    """Write CSV for a ``.csv`` suffix, JSON otherwise."""
    if Path(path).suffix.lower() == ".csv":
        write_csv(report, path)
    else:
        write_json(report, path)

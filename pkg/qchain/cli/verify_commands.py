"""Verification commands: verify, campaign, explore-conjecture."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import typer
from loguru import logger

from qchain.cli import EXIT_CHECK_FAILED, app, cli_errors, emit_json, parse_order
from qchain.cli.div_commands import SEED_MAX
from qchain.config import get_search_config, get_thread_count, get_tolerance
from qchain.core.channel_div import SearchOptions, channel_divergence
from qchain.core.divergence import DivergenceKind, RenyiOrder, sandwiched
from qchain.core.errors import ConfigError
from qchain.core.quantum import (
    DensityOperator,
    PositiveMapRep,
    joint_eigenbasis,
    measurement_map,
    pinch,
    random_channel,
    random_full_rank_state,
    random_state,
    tensor_power,
)
from qchain.core.serialization import load_channel, load_state
from qchain.core.verify import (
    CHECKS,
    CampaignConfig,
    CheckResult,
    Verifier,
    compute_slack,
    load_campaign_config,
    run_campaign,
    run_check,
    write_report,
)
from qchain.core.verify.chain import add_bits
from qchain.ui import campaign_summary, settings_panel, status_spinner, step_complete

DEFAULT_CAMPAIGN = "default.json"


@dataclass
class Instance:
    """User-supplied operands for a single check."""

    rho: Optional[DensityOperator]
    sigma: Optional[DensityOperator]
    e: Optional[PositiveMapRep]
    f: Optional[PositiveMapRep]
    order: Optional[RenyiOrder]
    n: int

    def need(self, *names: str) -> tuple:
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            flags = ", ".join("--alpha" if name == "order" else f"--{name}" for name in missing)
            raise ConfigError(f"this check needs {flags}")
        return tuple(getattr(self, name) for name in names)


InstanceRunner = Callable[[Verifier, Instance], CheckResult]


def _above_one(order: RenyiOrder) -> bool:
    return order.is_infinite or order.alpha > 1.0


def _meta_chain(kind: DivergenceKind) -> InstanceRunner:
    def run(v: Verifier, inst: Instance) -> CheckResult:
        e, f, rho, sigma, order = inst.need("e", "f", "rho", "sigma", "order")
        if kind is DivergenceKind.GEOMETRIC:
            return v.check_geometric_chain(e, f, rho, sigma, order)
        return v.check_meta_chain(e, f, rho, sigma, order, kind)

    return run


def _data_processing(kind: DivergenceKind) -> InstanceRunner:
    def run(v: Verifier, inst: Instance) -> CheckResult:
        e, rho, sigma, order = inst.need("e", "rho", "sigma", "order")
        return v.check_data_processing(e, rho, sigma, order, kind)

    return run


def _ordering(pair: str) -> InstanceRunner:
    def run(v: Verifier, inst: Instance) -> CheckResult:
        rho, sigma, order = inst.need("rho", "sigma", "order")
        return v.check_ordering(rho, sigma, order, pair)

    return run


def _sandwiched_chain(v: Verifier, inst: Instance) -> CheckResult:
    e, f, rho, sigma, order = inst.need("e", "f", "rho", "sigma", "order")
    return v.check_sandwiched_chain(e, f, rho, sigma, order, explore=not order.is_one and not _above_one(order))


INSTANCE_RUNNERS: dict[str, InstanceRunner] = {
    "pinching_inequality": lambda v, i: v.check_pinching_inequality(*i.need("rho", "sigma")),
    "pinching_lemma": lambda v, i: v.check_pinching_lemma(*i.need("e", "f", "rho", "sigma", "order")),
    "matsumoto": lambda v, i: v.check_matsumoto(*i.need("rho", "sigma", "order")),
    "meta_chain_sandwiched": _meta_chain(DivergenceKind.SANDWICHED),
    "meta_chain_geometric": _meta_chain(DivergenceKind.GEOMETRIC),
    "sandwiched_chain": _sandwiched_chain,
    "preprocessing_chain": lambda v, i: v.check_preprocessing_chain(*i.need("e", "f", "rho", "sigma", "order")),
    "regularized_chain": lambda v, i: v.check_regularized_chain(*i.need("e", "f", "rho", "sigma", "order"), n=i.n),
    "spectrum_trend": lambda v, i: v.check_spectrum_trend(*i.need("sigma", "order"), n=i.n),
    "unital_entropy": lambda v, i: v.check_unital_entropy(*i.need("e", "f", "rho", "order")),
    "data_processing_sandwiched": _data_processing(DivergenceKind.SANDWICHED),
    "data_processing_geometric": _data_processing(DivergenceKind.GEOMETRIC),
    "ordering_measured_sandwiched": _ordering("measured_sandwiched"),
    "ordering_sandwiched_geometric": _ordering("sandwiched_geometric"),
    "classical_reduction": lambda v, i: v.check_classical_reduction(*i.need("rho", "sigma", "order")),
    "regularized_sequence": lambda v, i: v.check_regularized_sequence(*i.need("e", "f", "order")),
}


def _verifier() -> Verifier:
    search = get_search_config()
    return Verifier(
        tol=get_tolerance("check_tol"),
        search=SearchOptions(restarts=min(search.restarts, 4), refine_iters=min(search.refine_iters, 50)),
    )


@app.command("verify")
def verify(
    check: str = typer.Argument(..., help="Check name, e.g. sandwiched_chain"),
    alpha: Optional[str] = typer.Option(None, "--alpha", "-a", help="Order: decimal, 1 or inf"),
    rho: Optional[Path] = typer.Option(None, "--rho", exists=True, dir_okay=False, help="State JSON for rho"),
    sigma: Optional[Path] = typer.Option(None, "--sigma", exists=True, dir_okay=False, help="State JSON for sigma"),
    e: Optional[Path] = typer.Option(None, "--e", exists=True, dir_okay=False, help="Map JSON for E"),
    f: Optional[Path] = typer.Option(None, "--f", exists=True, dir_okay=False, help="Map JSON for F"),
    n: int = typer.Option(2, "--n", min=1, max=3, help="Tensor power for regularized checks"),
    dim: int = typer.Option(2, "--dim", "-d", min=1, help="Dimension of a generated instance"),
    seed: int = typer.Option(0, "--seed", min=0, max=SEED_MAX, help="Seed of a generated instance"),
    family: str = typer.Option("cptp", "--family", help="Generated maps: cptp, transpose_positive or mixed"),
) -> None:
    """Run one inequality check on the given instance files, or on a random instance from --seed/--dim.

    [bold]Examples:[/bold]
      qchain verify pinching_inequality --rho plus.json --sigma mixed.json
      qchain verify sandwiched_chain --alpha 2 --dim 3 --seed 7
    """
    with cli_errors():
        if check not in CHECKS:
            raise ConfigError(f"unknown check '{check}'; known: {', '.join(CHECKS)}")
        if family not in ("cptp", "transpose_positive", "mixed"):
            raise ConfigError(f"unknown map family '{family}'")
        order = parse_order(alpha) if alpha is not None else None
        verifier = _verifier()
        if any(path is not None for path in (rho, sigma, e, f)):
            instance = Instance(
                rho=load_state(rho) if rho else None,
                sigma=load_state(sigma) if sigma else None,
                e=load_channel(e) if e else None,
                f=load_channel(f) if f else None,
                order=order,
                n=n,
            )
            result = INSTANCE_RUNNERS[check](verifier, instance)
        else:
            result = run_check(check, dim, order, seed=seed, family=family, verifier=verifier)
    emit_json(result.to_dict())
    if result.failed:
        raise typer.Exit(EXIT_CHECK_FAILED)


def _load_default_campaign() -> CampaignConfig:
    resource = resources.files("qchain.campaigns").joinpath(DEFAULT_CAMPAIGN)
    with resources.as_file(resource) as path:
        return load_campaign_config(path)


@app.command("campaign")
def campaign(
    config: Optional[Path] = typer.Option(
        None, "--config", "-c", exists=True, dir_okay=False, help="Campaign JSON/YAML (default: shipped acceptance campaign)"
    ),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Report path; .csv for CSV, anything else JSON"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, max=SEED_MAX, help="Override the campaign rng_seed"),
    trials: Optional[int] = typer.Option(None, "--trials", min=0, help="Override every check's trial count"),
) -> None:
    """Run a randomized verification campaign.

    Exit code is 0 iff every gated check passes. QCHAIN_THREADS caps parallel trials.

    [bold]Example:[/bold]
      qchain campaign --config default.json --out report.csv
    """
    with cli_errors():
        cfg = load_campaign_config(config) if config else _load_default_campaign()
        if seed is not None:
            cfg = cfg.model_copy(update={"rng_seed": seed})
        if trials is not None:
            specs = [spec.model_copy(update={"trials": trials}) for spec in cfg.specs()]
            cfg = cfg.model_copy(update={"checks": specs, "trials": trials})
        threads = get_thread_count()

        settings_panel(
            "Campaign",
            {
                "Config": config or f"qchain/campaigns/{DEFAULT_CAMPAIGN}",
                "Checks": len(cfg.specs()),
                "Seed": cfg.rng_seed,
                "Threads": cfg.threads or threads,
            },
        )
        with status_spinner("Running trials"):
            report = run_campaign(cfg, threads=threads)
        if out is not None:
            out.parent.mkdir(parents=True, exist_ok=True)
            write_report(report, out)

    campaign_summary(report.summaries, report.runtime_seconds)
    if out is not None:
        step_complete("Report written", out)
    emit_json(
        {
            "rng_seed": report.rng_seed,
            "total_trials": report.total_trials,
            "all_passed": report.all_passed,
            "summaries": report.summaries,
        }
    )
    if not report.all_passed:
        raise typer.Exit(EXIT_CHECK_FAILED)


def _pinching_measurement_lhs(
    e: PositiveMapRep, f: PositiveMapRep, rho: DensityOperator, sigma: DensityOperator, order: RenyiOrder, n: int
) -> float:
    """(1/n) D~(E^n(Λ rho^n)||F^n(Λ sigma^n)) with Λ measuring in the joint eigenbasis of sigma^n and its pinch of rho^n."""
    rho_n, sigma_n = tensor_power(rho, n), tensor_power(sigma, n)
    measure_n = measurement_map(joint_eigenbasis(sigma_n, pinch(sigma_n, rho_n)))
    e_n, f_n = tensor_power(e, n), tensor_power(f, n)
    value = sandwiched(e_n.apply(measure_n.apply(rho_n)), f_n.apply(measure_n.apply(sigma_n)), order).value
    return value / n


@app.command("explore-conjecture")
def explore_conjecture(
    alpha: str = typer.Option("1", "--alpha", "-a", help="Order: decimal, 1 or inf"),
    rho: Optional[Path] = typer.Option(None, "--rho", exists=True, dir_okay=False, help="State JSON for rho"),
    sigma: Optional[Path] = typer.Option(None, "--sigma", exists=True, dir_okay=False, help="State JSON for sigma"),
    e: Optional[Path] = typer.Option(None, "--e", exists=True, dir_okay=False, help="Channel JSON for E"),
    f: Optional[Path] = typer.Option(None, "--f", exists=True, dir_okay=False, help="Channel JSON for F"),
    n_max: int = typer.Option(2, "--n", min=1, max=2, help="Largest number of copies"),
    dim: int = typer.Option(2, "--dim", "-d", min=1, max=4, help="Dimension of a generated instance"),
    seed: int = typer.Option(0, "--seed", min=0, max=SEED_MAX, help="Seed of a generated instance"),
    restarts: int = typer.Option(4, "--restarts", min=0, help="Channel search restarts per n"),
) -> None:
    """Print both sides of the regularized pre-processed chain rule for n <= 2 copies.

    Reports gaps only. Nothing here is asserted, so the exit code is 0 whatever the values.
    """
    with cli_errors():
        order = parse_order(alpha)
        rng_states = np.random.default_rng(seed)
        rho_state = load_state(rho) if rho else random_state(dim, seed=rng_states)
        sigma_state = load_state(sigma) if sigma else random_full_rank_state(dim, seed=rng_states)
        e_map = load_channel(e) if e else random_channel(dim, seed=rng_states)
        f_map = load_channel(f) if f else random_channel(dim, seed=rng_states)

        input_term = sandwiched(rho_state, sigma_state, order).value
        unprocessed = sandwiched(e_map.apply(rho_state), f_map.apply(sigma_state), order).value
        rows = []
        with status_spinner("Evaluating tensor powers"):
            for n in range(1, n_max + 1):
                lhs = _pinching_measurement_lhs(e_map, f_map, rho_state, sigma_state, order, n)
                estimate = channel_divergence(
                    tensor_power(e_map, n),
                    tensor_power(f_map, n),
                    order,
                    DivergenceKind.SANDWICHED,
                    SearchOptions(restarts=restarts, refine_iters=50, rng_seed=seed),
                )
                rhs = add_bits(input_term, estimate.value_bits / n)
                rows.append(
                    {
                        "n": n,
                        "measured_lhs_bits": lhs,
                        "rhs_bits": rhs,
                        "upper_gap": compute_slack(lhs, rhs),
                        "lower_gap": compute_slack(unprocessed, lhs),
                    }
                )
                logger.info(f"explore n={n}: lhs {lhs:.9g}, rhs {rhs:.9g}")
    emit_json(
        {
            "alpha": order.label,
            "exploration": True,
            "input_term": input_term,
            "unprocessed_bits": unprocessed,
            "levels": rows,
        }
    )

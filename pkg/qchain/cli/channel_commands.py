"""Channel divergence estimates: plain, stabilized, amortized and regularized."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Optional

import typer

from qchain.cli import app, cli_errors, emit_json, parse_order
from qchain.cli.div_commands import SEED_MAX
from qchain.config import get_search_config
from qchain.core.channel_div import (
    ChannelDivEstimate,
    SearchOptions,
    amortized_divergence,
    channel_divergence,
    regularized_sequence,
    stabilized_channel_divergence,
)
from qchain.core.divergence import DivergenceKind
from qchain.core.errors import ConfigError
from qchain.core.serialization import load_channel, state_to_dict
from qchain.ui import status_spinner


class ChannelKind(str, Enum):
    sandwiched = "sandwiched"
    geometric = "geometric"


class ChannelMode(str, Enum):
    plain = "plain"
    stab = "stab"
    amortized = "amortized"


def _estimate_payload(est: ChannelDivEstimate) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "value_bits": est.value_bits,
        "mode": est.mode,
        "kind": est.kind.value,
        "alpha": est.order.label,
        "restarts": est.restarts_used,
        "evaluations": est.evaluations,
        "witness": state_to_dict(est.witness),
    }
    if est.reference_witness is not None:
        payload["reference_witness"] = state_to_dict(est.reference_witness)
    if est.input_divergence is not None:
        payload["input_divergence"] = est.input_divergence
    return payload


@app.command("channel-div")
def channel_div(
    e: Path = typer.Option(..., "--e", exists=True, dir_okay=False, help="Channel JSON for E"),
    f: Path = typer.Option(..., "--f", exists=True, dir_okay=False, help="Channel JSON for F"),
    alpha: str = typer.Option(..., "--alpha", "-a", help="Order: decimal, 1 or inf"),
    kind: ChannelKind = typer.Option(ChannelKind.sandwiched, "--kind", "-k", help="Output divergence family"),
    mode: ChannelMode = typer.Option(ChannelMode.plain, "--mode", "-m", help="plain, stab (with reference) or amortized"),
    restarts: Optional[int] = typer.Option(None, "--restarts", min=0, help="Random restarts (default from config)"),
    refine_iters: Optional[int] = typer.Option(
        None, "--refine-iters", min=0, help="Optimizer evaluations per restart (default from config)"
    ),
    seed: int = typer.Option(0, "--seed", min=0, max=SEED_MAX, help="RNG seed"),
    regularize: Optional[int] = typer.Option(
        None, "--regularize", min=1, help="Report f_1..f_N for tensor powers up to N"
    ),
) -> None:
    """Estimate a channel divergence (a certified lower bound) and its witness input.

    [bold]Example:[/bold]
      qchain channel-div --e id.json --f depol.json --alpha inf --mode stab
    """
    with cli_errors():
        order = parse_order(alpha)
        defaults = get_search_config()
        opts = SearchOptions(
            restarts=defaults.restarts if restarts is None else restarts,
            refine_iters=defaults.refine_iters if refine_iters is None else refine_iters,
            rng_seed=seed,
        )
        e_map, f_map = load_channel(e), load_channel(f)
        div_kind = DivergenceKind(kind.value)

        if regularize is not None:
            if mode is ChannelMode.amortized:
                raise ConfigError("--regularize supports the plain and stab modes only")
            seq_mode = "plain" if mode is ChannelMode.plain else "stabilized"
            with status_spinner(f"Regularizing up to n={regularize}"):
                seq = regularized_sequence(e_map, f_map, order, div_kind, regularize, opts, mode=seq_mode)
            payload: dict[str, Any] = {
                "mode": seq.mode,
                "kind": div_kind.value,
                "alpha": order.label,
                "values": seq.values,
                "monotone_gaps": seq.monotone_gaps(),
                "estimates": [_estimate_payload(est) for est in seq.estimates],
            }
        else:
            estimator = {
                ChannelMode.plain: channel_divergence,
                ChannelMode.stab: stabilized_channel_divergence,
                ChannelMode.amortized: amortized_divergence,
            }[mode]
            with status_spinner(f"Searching inputs ({opts.restarts} restarts)"):
                payload = _estimate_payload(estimator(e_map, f_map, order, div_kind, opts))
    emit_json(payload)

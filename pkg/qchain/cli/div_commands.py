"""Scalar commands: div, entropy, pinch, matsumoto."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Optional

import typer

from qchain.cli import EXIT_CHECK_FAILED, app, cli_errors, emit_json, parse_order
from qchain.config import get_tolerance
from qchain.core.divergence import (
    DivValue,
    MeasuredOptions,
    RenyiOrder,
    classical_renyi,
    geometric,
    measured,
    renyi_entropy,
    sandwiched,
)
from qchain.core.errors import ConfigError
from qchain.core.quantum import pinch, spectrum
from qchain.core.reverse_test import build_reverse_test, verify_reverse_test
from qchain.core.serialization import load_state, parse_distribution, state_to_dict

SEED_MAX = 2**64 - 1
DEFAULT_MATSUMOTO_ORDERS = "0.5,0.9,1,1.5,2"


class DivKind(str, Enum):
    classical = "classical"
    sandwiched = "sandwiched"
    geometric = "geometric"
    measured = "measured"


def _value_payload(value: DivValue, **extra: Any) -> dict[str, Any]:
    diagnostics = {"support_violation": value.support_violation, **value.diagnostics, **extra}
    if value.quasi_value is not None:
        diagnostics["quasi_value"] = value.quasi_value
    return {"value_bits": value.value, "diagnostics": diagnostics}


def _require_states(rho: Optional[Path], sigma: Optional[Path], command: str) -> None:
    if rho is None or sigma is None:
        raise ConfigError(f"{command} needs both --rho and --sigma")


@app.command("div")
def div(
    kind: DivKind = typer.Option(..., "--kind", "-k", help="Divergence family"),
    alpha: str = typer.Option(..., "--alpha", "-a", help="Order: decimal, 1 or inf"),
    rho: Optional[Path] = typer.Option(None, "--rho", exists=True, dir_okay=False, help="State JSON for rho"),
    sigma: Optional[Path] = typer.Option(None, "--sigma", exists=True, dir_okay=False, help="State JSON for sigma"),
    p: Optional[str] = typer.Option(None, "--p", help="Classical P: inline JSON array or .json file"),
    q: Optional[str] = typer.Option(None, "--q", help="Classical Q: inline JSON array or .json file"),
    restarts: int = typer.Option(4, "--restarts", min=1, help="Random bases for the measured divergence"),
    refine_iters: int = typer.Option(200, "--refine-iters", min=0, help="Optimizer evaluations per basis"),
    seed: int = typer.Option(0, "--seed", min=0, max=SEED_MAX, help="RNG seed"),
) -> None:
    """Compute a Rényi divergence in bits.

    [bold]Examples:[/bold]
      qchain div --kind sandwiched --alpha 2 --rho plus.json --sigma mixed.json
      qchain div --kind classical --alpha 1 --p "[0.75,0.25]" --q "[0.5,0.5]"
    """
    with cli_errors():
        order = parse_order(alpha)
        if kind is DivKind.classical:
            if p is None or q is None:
                raise ConfigError("classical divergence needs --p and --q")
            payload = _value_payload(classical_renyi(parse_distribution(p), parse_distribution(q), order))
        else:
            _require_states(rho, sigma, f"{kind.value} divergence")
            rho_state, sigma_state = load_state(rho), load_state(sigma)
            if kind is DivKind.sandwiched:
                payload = _value_payload(sandwiched(rho_state, sigma_state, order))
            elif kind is DivKind.geometric:
                payload = _value_payload(geometric(rho_state, sigma_state, order))
            else:
                opts = MeasuredOptions(restarts=restarts, refine_iters=refine_iters, seed=seed % 2**32)
                result = measured(rho_state, sigma_state, order, opts)
                payload = _value_payload(result.value, lower_bound=True, restarts=restarts)
    emit_json(payload)


@app.command("entropy")
def entropy(
    rho: Path = typer.Option(..., "--rho", exists=True, dir_okay=False, help="State JSON"),
    alpha: str = typer.Option(..., "--alpha", "-a", help="Order: decimal, 1 or inf"),
) -> None:
    """Compute the Rényi entropy H_alpha(rho) in bits."""
    with cli_errors():
        order = parse_order(alpha)
        value = renyi_entropy(load_state(rho), order)
    emit_json({"entropy_bits": value, "alpha": order.label})


@app.command("pinch")
def pinch_command(
    rho: Path = typer.Option(..., "--rho", exists=True, dir_okay=False, help="State to pinch"),
    sigma: Path = typer.Option(..., "--sigma", exists=True, dir_okay=False, help="State defining the eigenspaces"),
) -> None:
    """Pinch rho in the eigenspaces of sigma and count sigma's distinct eigenvalues."""
    with cli_errors():
        cluster_tol = get_tolerance("cluster_tol")
        rho_state, sigma_state = load_state(rho), load_state(sigma)
        pinched = pinch(sigma_state, rho_state, cluster_tol)
        count = spectrum(sigma_state, cluster_tol).count
    emit_json({"state": state_to_dict(pinched), "spec_count": count})


@app.command("matsumoto")
def matsumoto(
    rho: Path = typer.Option(..., "--rho", exists=True, dir_okay=False, help="State JSON for rho"),
    sigma: Path = typer.Option(..., "--sigma", exists=True, dir_okay=False, help="State JSON for sigma"),
    orders: str = typer.Option(
        DEFAULT_MATSUMOTO_ORDERS, "--orders", help="Comma-separated orders to verify against the geometric divergence"
    ),
) -> None:
    """Build the reverse test (Gamma, P, Q) achieving the geometric divergence and verify it."""
    with cli_errors():
        parsed = [RenyiOrder.parse(o.strip()) for o in orders.split(",") if o.strip()]
        rho_state, sigma_state = load_state(rho), load_state(sigma)
        rt = build_reverse_test(rho_state, sigma_state, get_tolerance("cluster_tol"))
        report = verify_reverse_test(rt, rho_state, sigma_state, parsed)
    emit_json(
        {
            "lambdas": rt.lambdas,
            "P": rt.p.probs,
            "Q": rt.q.probs,
            "gamma_states": [state_to_dict(s) for s in rt.gamma_states],
            "report": report.to_dict(),
        }
    )
    if not report.passed:
        raise typer.Exit(EXIT_CHECK_FAILED)

"""Rich UI helpers for the qchain CLI.

Everything here prints to stderr: stdout carries only JSON and CSV payloads.
"""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

from rich.console import Console
from rich.panel import Panel
from rich.status import Status
from rich.table import Table

console = Console(stderr=True)


@contextmanager
def status_spinner(message: str) -> Iterator[Status]:
    """Spinner for long computations such as campaigns and channel searches."""
    with console.status(f"[cyan]{message}[/cyan]") as status:
        yield status


def step_start(name: str, details: Optional[Dict[str, str]] = None) -> None:
    console.print(f"\n[bold cyan]{name}[/bold cyan]")
    if details:
        for key, value in details.items():
            console.print(f"  [dim]{key}:[/dim] {value}")


def step_complete(message: str, output_path: Optional[str | Path] = None) -> None:
    console.print(f"[green]{message}[/green]")
    if output_path:
        console.print(f"  [dim]Output:[/dim] {output_path}")


def step_error(message: str, details: Optional[str] = None) -> None:
    console.print(f"[bold red]Error:[/bold red] {message}")
    if details:
        console.print(f"  [dim]{details}[/dim]")


def step_warning(message: str) -> None:
    console.print(f"[yellow]Warning:[/yellow] {message}")


def settings_panel(title: str, settings: Dict[str, Any]) -> None:
    """Key/value panel, used for campaign settings."""
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column("Key", style="dim")
    table.add_column("Value")

    for key, value in settings.items():
        table.add_row(key, str(value))

    console.print(Panel(table, title=f"[bold]{title}[/bold]", border_style="cyan"))


def campaign_summary(summaries: list, runtime_seconds: float) -> None:
    """Per-check pass/fail table followed by a verdict panel."""
    table = Table(title="Campaign summary", header_style="bold")
    table.add_column("Check")
    table.add_column("Trials", justify="right")
    table.add_column("Passed", justify="right", style="green")
    table.add_column("Failed", justify="right", style="red")
    table.add_column("Exploratory", justify="right", style="yellow")
    table.add_column("Worst slack", justify="right")

    failed = 0
    for summary in summaries:
        failed += summary.failed
        table.add_row(
            summary.check,
            str(summary.trials),
            str(summary.passed),
            str(summary.failed),
            str(summary.exploration),
            f"{summary.worst_slack:.3e}",
        )
    console.print(table)

    if failed:
        console.print(
            Panel(f"{failed} gated trial(s) failed", title="[bold red]Campaign Failed[/bold red]", border_style="red")
        )
    else:
        console.print(
            Panel(
                f"All gated checks passed in {runtime_seconds:.1f}s",
                title="[bold green]Campaign Complete[/bold green]",
                border_style="green",
            )
        )

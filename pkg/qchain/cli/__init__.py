"""Typer-based CLI for qchain.

Command structure:
    qchain div / entropy / pinch / matsumoto     # scalar divergences and reverse tests
    qchain channel-div ...                        # channel divergence estimates
    qchain verify / campaign / explore-conjecture # inequality checks
    qchain config show|set|reset                  # user configuration

JSON and CSV payloads go to stdout; logs, tables and errors go to stderr.
"""

from __future__ import annotations

import json
import sys
from contextlib import contextmanager
from typing import Any, Iterator, List, Optional

import typer
from dotenv import load_dotenv
from loguru import logger

from qchain import config as user_config
from qchain.core.divergence import RenyiOrder
from qchain.core.errors import ConfigError, QChainError
from qchain.core.serialization import to_json
from qchain.logging_config import configure_logging
from qchain.ui import console, step_complete

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

app = typer.Typer(
    name="qchain",
    help="Quantum Rényi divergences, reverse tests, channel divergences and chain-rule verification",
    rich_markup_mode="rich",
    no_args_is_help=True,
)

config_app = typer.Typer(
    name="config",
    help="Configuration commands (tolerances, search settings)",
    rich_markup_mode="rich",
    no_args_is_help=True,
)

app.add_typer(config_app, name="config")

_verbose = False


def get_verbose() -> bool:
    """Get the global verbose flag."""
    return _verbose


@app.callback()
def main_callback(
    verbose: bool = typer.Option(
        False,
        "--verbose",
        "-v",
        help="Enable verbose output (show INFO logs in terminal)",
    ),
) -> None:
    """Quantum Rényi divergences and chain rules, verified numerically."""
    global _verbose
    _verbose = verbose

    load_dotenv()
    configure_logging(verbose=verbose)


def emit_json(payload: Any) -> None:
    """Write a payload to stdout with report number formatting."""
    typer.echo(to_json(payload))


def emit_error(code: str, message: str) -> None:
    typer.echo(json.dumps({"error": code, "message": message}), err=True)


@contextmanager
def cli_errors() -> Iterator[None]:
    """Report library errors as JSON on stderr and exit with the usage code."""
    try:
        yield
    except QChainError as exc:
        logger.error(f"{exc.code}: {exc}")
        emit_error(exc.code, str(exc))
        raise typer.Exit(EXIT_USAGE)
    except OSError as exc:
        emit_error("io_error", str(exc))
        raise typer.Exit(EXIT_USAGE)


def parse_order(spec: str) -> RenyiOrder:
    """Parse ``--alpha`` (decimal, ``1`` or ``inf``); raises QChainError subclasses."""
    return RenyiOrder.parse(spec)


# --- Config commands ---


@config_app.command("show")
def config_show() -> None:
    """Print the active configuration as JSON."""
    emit_json(user_config.load_config())
    console.print(f"[dim]Config file:[/dim] {user_config.CONFIG_PATH}")


@config_app.command("set")
def config_set(
    assignment: str = typer.Argument(..., help="KEY=VALUE, e.g. search.restarts=64"),
) -> None:
    """Set one configuration value."""
    key, sep, value = assignment.partition("=")
    with cli_errors():
        if not sep:
            raise ConfigError("config set expects KEY=VALUE")
        parsed = user_config.set_config_value(key.strip(), value.strip())
    step_complete(f"{key.strip()} = {parsed}", user_config.CONFIG_PATH)


@config_app.command("reset")
def config_reset() -> None:
    """Restore the default configuration."""
    user_config.reset_config()
    step_complete("Configuration reset to defaults", user_config.CONFIG_PATH)


# Import command modules to register commands
from qchain.cli import div_commands  # noqa: E402, F401
from qchain.cli import channel_commands  # noqa: E402, F401
from qchain.cli import verify_commands  # noqa: E402, F401


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the CLI; returns the process exit code."""
    try:
        app(args=argv, prog_name="qchain")
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except KeyboardInterrupt:
        console.print("\n[bold yellow]Interrupted by user.[/bold yellow]")
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())

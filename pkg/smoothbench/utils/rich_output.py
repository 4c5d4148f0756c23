# File: smoothbench/utils/rich_output.py

import json
from typing import Any, Iterable, Sequence

from rich.console import Console
from rich.syntax import Syntax
from rich.table import Table

from smoothbench.config import settings

# Progress and diagnostics go to stderr so CSV/JSON on stdout stays clean.
console = Console(stderr=True)


def log(tag: str, message: str, *, always: bool = False) -> None:
    if always or settings.VERBOSE:
        console.print(f"[dim][{tag}][/dim] {message}")


def warn(tag: str, message: str) -> None:
    console.print(f"[yellow][{tag}] ⚠️  {message}[/yellow]")


def error(message: str) -> None:
    console.print(f"[bold red]ERROR:[/bold red] {message}")


def _fmt(value: Any) -> str:
    if value is None:
        return "[italic red]failed[/italic red]"
    if isinstance(value, float):
        return f"{value:.4e}"
    return str(value)


def print_table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    table = Table(title=title, show_lines=False)
    for i, col in enumerate(columns):
        table.add_column(col, style="bold cyan" if i == 0 else "white", justify="right")
    for row in rows:
        table.add_row(*(_fmt(v) for v in row))
    console.print(table)


def print_json(payload: dict[str, Any]) -> None:
    syntax = Syntax(json.dumps(payload, indent=2), "json", theme="monokai", line_numbers=False)
    console.print(syntax)

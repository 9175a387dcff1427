"""Logging utilities for pubench.

Pretty-printed, box-drawn log output for benchmark runs: run headers,
the resolved configuration, per-trial outcomes, the summary grid and the
property-check report.
"""

import logging
from collections.abc import Mapping, Sequence
from typing import Any

logger = logging.getLogger(__name__)

_WIDTH = 58


def _box_line(text: str) -> str:
    return f"║  {text[:_WIDTH]:<{_WIDTH}} ║"


def log_header(title: str, subtitle: str | None = None) -> None:
    """Log a pretty header for a command.

    Args:
        title: The title to display.
        subtitle: Optional second line (e.g. the config path).
    """
    logger.info("")
    logger.info("╔════════════════════════════════════════════════════════════╗")
    logger.info(f"║  📊 {title:^54} ║")
    if subtitle:
        logger.info(f"║  {subtitle[:56]:^56} ║")
    logger.info("╚════════════════════════════════════════════════════════════╝")


def log_config(values: Mapping[str, Any]) -> None:
    """Log the resolved configuration, one key per line.

    Args:
        values: Field name to value.
    """
    logger.info("")
    logger.info("┌─ ⚙️  Configuration ─────────────────────────────────────────")
    for key, value in values.items():
        if value is None:
            continue
        if isinstance(value, tuple | list):
            value = ", ".join(str(v) for v in value)
        logger.info(f"│  {key:<16} {value}")
    logger.info("└" + "─" * 60)


def log_trial(
    algorithm: str,
    split: int,
    draw: int,
    failure: str | None = None,
    best: Mapping[str, float] | None = None,
) -> None:
    """Log the outcome of one trial.

    Args:
        algorithm: Algorithm token.
        split: Split index.
        draw: Hyperparameter draw index.
        failure: Failure reason, if the trial failed.
        best: Best validation value per criterion.
    """
    label = f"{algorithm} split={split} draw={draw}"
    if failure is not None:
        logger.warning(f"❌ {label}: {failure}")
        return
    detail = ", ".join(f"{name}={value:.4f}" for name, value in (best or {}).items())
    logger.info(f"✅ {label}: {detail}")


def log_summary(
    columns: Sequence[str],
    rows: Mapping[str, Mapping[str, tuple[float, float]]],
) -> None:
    """Log the summary grid with metrics shown as percentages.

    Args:
        columns: ``criterion:metric`` column names in display order.
        rows: Algorithm token to column to (mean, std).
    """
    logger.info("")
    logger.info("╔════════════════════════════════════════════════════════════╗")
    logger.info("║  📋 SUMMARY (test metric at the selected checkpoint)       ║")
    logger.info("╠════════════════════════════════════════════════════════════╣")
    if not rows:
        logger.info(_box_line("(no successful trials)"))
    for algorithm, cells in rows.items():
        logger.info(_box_line(f"🔹 {algorithm}"))
        for column in columns:
            if column not in cells:
                continue
            mean, std = cells[column]
            logger.info(_box_line(f"   {column:<22} {100 * mean:6.2f} ± {100 * std:5.2f}"))
    logger.info("╚════════════════════════════════════════════════════════════╝")


def log_checks(results: Sequence[tuple[str, bool, str]]) -> None:
    """Log property-check results.

    Args:
        results: (name, passed, detail) per check.
    """
    passed = sum(1 for _, ok, _ in results if ok)
    logger.info("")
    logger.info("┌─ 🔬 Property checks ───────────────────────────────────────")
    for name, ok, detail in results:
        status = "✓" if ok else "✗"
        log = logger.info if ok else logger.error
        log(f"│  {status} {name:<40} {detail}")
    logger.info("└" + "─" * 60)
    logger.info(f"✨ {passed}/{len(results)} checks passed")


def log_outputs(paths: Sequence[Any]) -> None:
    """Log the files a command wrote.

    Args:
        paths: Written paths.
    """
    logger.info("")
    for path in paths:
        logger.info(f"💾 Wrote {path}")


def log_error(error: str) -> None:
    """Log an error message.

    Args:
        error: The error message.
    """
    logger.error("")
    logger.error("╔════════════════════════════════════════════════════════════╗")
    logger.error("║  ❌ ERROR                                                   ║")
    logger.error("╠════════════════════════════════════════════════════════════╣")
    remaining = " ".join(error.split()) or "unknown error"
    while remaining:
        logger.error(_box_line(remaining))
        remaining = remaining[_WIDTH:]
    logger.error("╚════════════════════════════════════════════════════════════╝")

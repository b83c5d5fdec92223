import logging
from typing import Literal

import numpy as np

from equistab.core.config import settings
from equistab.schemas.orbit import Indicators
from equistab.schemas.report import FloquetRow, MorseRow, ReportTable
from equistab.schemas.solver import FloquetOptions
from equistab.services.action import ReducedAction, virial_ratio
from equistab.services.floquet import MonodromyResult, StabilityVerdict, monodromy, stability_verdict
from equistab.services.morse import MorseResult, morse_fundamental, morse_period
from equistab.services.orbit_service import ResolvedOrbit

logger = logging.getLogger(__name__)

Domain = Literal["fundamental", "period", "both"]


def morse_row(result: MorseResult) -> MorseRow:
    return MorseRow(
        domain=result.domain,
        index=result.index,
        max_negative=result.max_negative,
        near_zero_count=result.near_zero_count,
        eps_zero=result.eps_zero,
        dimension=int(result.eigenvalues.size),
    )


def floquet_row(result: MonodromyResult, verdict: StabilityVerdict, top: int = 6) -> FloquetRow:
    symplectic = None if np.isnan(result.symplectic_residual) else result.symplectic_residual
    return FloquetRow(
        max_modulus=result.max_modulus,
        log10_max_modulus=result.log10_max_modulus,
        verdict=verdict.label,
        mode=result.integrator["mode"],
        steps=result.integrator["steps"],
        det_residual=result.det_residual,
        det_drift=result.det_drift,
        symplectic_residual=symplectic,
        pairing_residual=result.pairing_residual,
        multipliers=[(float(v.real), float(v.imag)) for v in result.multipliers[:top]],
    )


def compute_morse(
    resolved: ResolvedOrbit,
    domain: Domain = "both",
    grid: int | None = None,
    eps_zero: float | None = None,
) -> list[MorseResult]:
    results = []
    if domain in ("fundamental", "both"):
        results.append(morse_fundamental(resolved.loop, resolved.spec, eps_zero=eps_zero))
    if domain in ("period", "both"):
        results.append(morse_period(resolved.loop, resolved.spec, M=grid, eps_zero=eps_zero))
    return results


def build_report(
    resolved: ResolvedOrbit,
    options: FloquetOptions | None = None,
    grid: int | None = None,
    eps_zero: float | None = None,
) -> ReportTable:
    """Every indicator of one orbit, in the fundamental-domain action convention."""
    spec, loop = resolved.spec, resolved.loop
    reduced = ReducedAction(spec)
    z = reduced.coordinates(loop)
    value, gradient = reduced.value_and_gradient(z)

    fundamental, period = compute_morse(resolved, "both", grid=grid, eps_zero=eps_zero)
    result = monodromy(loop, spec, options)
    verdict = stability_verdict(result, settings.STABILITY_TOL)

    logger.info("report.built", extra={"orbit": resolved.problem.name, "action": value})
    return ReportTable(
        name=resolved.problem.name,
        n=spec.n,
        d=spec.d,
        masses=[float(m) for m in spec.masses],
        group_order=spec.group.order,
        quotient_order=spec.l,
        generators=spec.group.describe(),
        action=value,
        gradient_norm=float(np.linalg.norm(gradient)),
        virial_ratio=virial_ratio(loop, spec),
        morse_fundamental=morse_row(fundamental),
        morse_period=morse_row(period),
        floquet=floquet_row(result, verdict),
    )


def indicators_of(table: ReportTable) -> Indicators:
    return Indicators(
        action=table.action,
        gradient_norm=table.gradient_norm,
        virial_ratio=table.virial_ratio,
        morse_fundamental=table.morse_fundamental.index if table.morse_fundamental else None,
        morse_fundamental_max_negative=table.morse_fundamental.max_negative if table.morse_fundamental else None,
        morse_period=table.morse_period.index if table.morse_period else None,
        morse_period_max_negative=table.morse_period.max_negative if table.morse_period else None,
        max_multiplier=table.floquet.max_modulus if table.floquet else None,
        verdict=table.floquet.verdict if table.floquet else None,
    )


def _number(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}" if abs(value) < 1e5 else f"{value:.4e}"


def render_morse(row: MorseRow) -> str:
    label = "fundamental domain" if row.domain == "fundamental" else "full period"
    return f"Morse index ({label}): {row.index}   max negative eigenvalue: {_number(row.max_negative)}"


def render_floquet(row: FloquetRow) -> str:
    return f"max |Floquet multiplier|: {_number(row.max_modulus)}   ({row.verdict})"


def render_text(table: ReportTable) -> str:
    lines = [
        f"orbit: {table.name or '<unnamed>'}",
        f"n = {table.n}, d = {table.d}, masses = {table.masses}",
        f"|G| = {table.group_order}, l = {table.quotient_order}",
        *(f"  {line}" for line in table.generators),
        f"action: {table.action:.4f}",
        f"gradient norm: {table.gradient_norm:.3e}",
    ]
    for row in (table.morse_fundamental, table.morse_period):
        if row is not None:
            lines.append(render_morse(row))
    if table.floquet is not None:
        lines.append(render_floquet(table.floquet))
    return "\n".join(lines)

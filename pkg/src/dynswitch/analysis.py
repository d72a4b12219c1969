"""Expected running time, switching performance, and virtual-best reports.

Pure functions over immutable run-log records.  ERT is total evaluations
over all runs divided by the number of successful runs; unsuccessful runs
contribute the evaluations they actually consumed (equal to the budget
unless the algorithm converged early on its own).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .tracing import DEFAULT_GRID, TargetGrid


def ert(runs, budget) -> float:
    """ERT from (hitting_time, evals_consumed) pairs; inf if no successes.

    Successful runs contribute min(T_i, budget); unsuccessful ones the
    evaluations they consumed, capped at the budget.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("ert needs at least one run")
    total = 0.0
    successes = 0
    for hitting_time, consumed in runs:
        if consumed > budget:
            raise ValueError(
                f"run consumed {consumed} evaluations, over the budget {budget}"
            )
        if math.isfinite(hitting_time):
            total += min(hitting_time, budget)
            successes += 1
        else:
            total += min(consumed, budget)
    return total / successes if successes else math.inf


def _hits(rec) -> dict:
    """hit_at as a dict, whether the record is parsed or fresh-serialized."""
    hits = rec["hit_at"]
    if isinstance(hits, dict):
        return hits
    return {float(e): int(n) for e, n in hits}


def ert_curve(records, budget=None, grid: TargetGrid = DEFAULT_GRID) -> dict:
    """Per grid exponent: (ert, successes, runs) pooled over the records."""
    if not records:
        raise ValueError("no records to aggregate")
    records = [dict(rec, hit_at=_hits(rec)) for rec in records]
    curve = {}
    for e in grid.exponents:
        runs = []
        for rec in records:
            b = budget if budget is not None else rec["budget"]
            hit = rec["hit_at"].get(e, math.inf)
            runs.append((hit, min(rec["evals_used"], b)))
        b = budget if budget is not None else max(r["budget"] for r in records)
        value = ert(runs, b)
        successes = sum(1 for h, _ in runs if math.isfinite(h))
        curve[e] = (value, successes, len(runs))
    return curve


def build_ert_tables(records, budget=None, grid: TargetGrid = DEFAULT_GRID):
    """Group run records by (algorithm_label, function, dimension)."""
    groups = {}
    for rec in records:
        key = (rec["algorithm_label"], rec["function_id"], rec["dimension"])
        groups.setdefault(key, []).append(rec)
    return {
        key: ert_curve(recs, budget=budget, grid=grid)
        for key, recs in groups.items()
    }


def _ert_at(curve, exponent):
    entry = curve.get(exponent)
    return math.inf if entry is None else entry[0]


def theoretical_performance(curve_a1, curve_a2, tau_exponent, phi_exponent) -> float:
    """ERT(A1, tau) + ERT(A2, phi) - ERT(A2, tau), floored at ERT(A1, tau)."""
    if not tau_exponent > phi_exponent:
        raise ValueError("tau must be an easier target than phi")
    v1 = _ert_at(curve_a1, tau_exponent)
    v2 = _ert_at(curve_a2, phi_exponent)
    if math.isinf(v1) or math.isinf(v2):
        return math.inf
    v3 = _ert_at(curve_a2, tau_exponent)
    if math.isinf(v3):
        return math.inf
    return max(v1, v1 + v2 - v3)


def best_tau(curve_a1, curve_a2, phi_exponent,
             grid: TargetGrid = DEFAULT_GRID):
    """(tau_exponent, value) minimizing the theoretical switching cost.

    Ties break toward the larger tau (the earlier switch).
    """
    best_exp, best_val = None, math.inf
    for e in grid.exponents:  # descending: largest tau first
        if not e > phi_exponent:
            continue
        val = theoretical_performance(curve_a1, curve_a2, e, phi_exponent)
        if val < best_val:
            best_exp, best_val = e, val
    return best_exp, best_val


@dataclass
class VbsReport:
    """Static vs dynamic virtual best for one (function, dimension) cell."""

    function_id: int
    dimension: int
    static_algorithm: str
    static_ert: float
    dyn_a1: str
    dyn_a2: str
    dyn_tau_exponent: float | None   # None for the identity (no-switch) pair
    dyn_theoretical_ert: float
    theoretical_gain: float
    actual_ert: float | None = None
    actual_gain: float | None = None


def relative_gain(reference: float, value: float) -> float:
    """(reference - value) / reference; -inf when value is infinite."""
    if math.isinf(reference):
        raise ValueError("reference ERT must be finite")
    if math.isinf(value):
        return -math.inf
    return (reference - value) / reference


def gains(static_ert, theoretical_ert, actual_ert=None):
    """The three relative measures used in reporting.

    Returns (theoretical_gain_vs_static, actual_gain_vs_static,
    actual_vs_theoretical); the actual entries are None when no executed
    ERT is supplied.
    """
    tg = relative_gain(static_ert, theoretical_ert)
    if actual_ert is None:
        return tg, None, None
    ag = relative_gain(static_ert, actual_ert)
    if math.isinf(theoretical_ert):
        avt = -math.inf if math.isfinite(actual_ert) else math.nan
    else:
        avt = relative_gain(theoretical_ert, actual_ert)
    return tg, ag, avt


def vbs_dyn(tables_for_cell, function_id, dimension, phi_exponent,
            grid: TargetGrid = DEFAULT_GRID) -> VbsReport:
    """Exhaustive search over ordered (A1, A2) pairs (identity included)
    and all grid switching points for one function-dimension cell."""
    if not tables_for_cell:
        raise ValueError("need at least one algorithm table")
    static_algorithm, static_ert = min(
        ((label, _ert_at(curve, phi_exponent))
         for label, curve in tables_for_cell.items()),
        key=lambda item: (item[1], item[0]),
    )
    best = None  # (value, a1, a2, tau_exponent)
    for a1, curve1 in sorted(tables_for_cell.items()):
        # identity pair: no switch, value is the plain ERT at phi
        identity = _ert_at(curve1, phi_exponent)
        if best is None or identity < best[0]:
            best = (identity, a1, a1, None)
        for a2, curve2 in sorted(tables_for_cell.items()):
            if a2 == a1:
                continue
            tau_exp, val = best_tau(curve1, curve2, phi_exponent, grid)
            if tau_exp is not None and val < best[0]:
                best = (val, a1, a2, tau_exp)
    dyn_val, a1, a2, tau_exp = best
    if math.isinf(static_ert):
        theoretical_gain = 0.0 if math.isinf(dyn_val) else math.inf
    else:
        theoretical_gain = relative_gain(static_ert, dyn_val)
    return VbsReport(
        function_id=function_id,
        dimension=dimension,
        static_algorithm=static_algorithm,
        static_ert=static_ert,
        dyn_a1=a1,
        dyn_a2=a2,
        dyn_tau_exponent=tau_exp,
        dyn_theoretical_ert=dyn_val,
        theoretical_gain=theoretical_gain,
    )


def build_vbs_reports(tables, phi_exponent, grid: TargetGrid = DEFAULT_GRID):
    """One VbsReport per (function, dimension) present in the tables."""
    cells = {}
    for (label, f, d), curve in tables.items():
        cells.setdefault((f, d), {})[label] = curve
    return [
        vbs_dyn(algos, f, d, phi_exponent, grid)
        for (f, d), algos in sorted(cells.items())
    ]


def heatmap_data(reports, use_actual=False):
    """Gain matrix cells for plotting: value capped below at 0, with flags.

    Returns {(function_id, dimension): {"value", "negative", "infinite"}}.
    """
    cells = {}
    for rep in reports:
        gain = rep.actual_gain if use_actual else rep.theoretical_gain
        if gain is None:
            continue
        infinite = math.isinf(gain) and gain < 0
        negative = (gain < 0) and not math.isinf(gain)
        value = 0.0 if (negative or infinite) else gain
        cells[(rep.function_id, rep.dimension)] = {
            "value": value,
            "negative": negative,
            "infinite": infinite,
        }
    return cells


def use_case_table(reports):
    """Count (A1, A2) pairs leading the dynamic VBS; identity pairs are
    'no switch' and excluded."""
    table = {}
    for rep in reports:
        if rep.dyn_a1 == rep.dyn_a2:
            continue
        entry = table.setdefault((rep.dyn_a1, rep.dyn_a2),
                                 {"count": 0, "cells": []})
        entry["count"] += 1
        entry["cells"].append((rep.function_id, rep.dimension))
    for entry in table.values():
        entry["cells"].sort()
    return table

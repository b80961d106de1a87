"""Pearson, Spearman and Kendall tau-b at summary, system and global level.

Coefficients raise :class:`UndefinedCorrelation` when they are undefined
(a constant input), and the granularity functions report how many inputs
were usable instead of imputing values.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from sumscore.errors import UndefinedCorrelation, UsageError

Coefficient = Callable[[Sequence[float], Sequence[float]], float]


def _check_pair(x: Sequence[float], y: Sequence[float]) -> None:
    if len(x) != len(y):
        raise UsageError(f"correlated vectors differ in length ({len(x)} vs {len(y)})")
    if len(x) < 2:
        raise UsageError("at least two paired observations are required")


def _clamp(r: float) -> float:
    return max(-1.0, min(1.0, r))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    _check_pair(x, y)
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("zero variance")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    return _clamp(sxy / math.sqrt(sxx * syy))


def rank_with_ties(v: Sequence[float]) -> List[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    if not v:
        raise UsageError("cannot rank an empty vector")
    order = sorted(range(len(v)), key=lambda i: v[i])
    ranks = [0.0] * len(v)
    start = 0
    while start < len(order):
        end = start
        while end + 1 < len(order) and v[order[end + 1]] == v[order[start]]:
            end += 1
        rank = (start + end) / 2 + 1
        for k in range(start, end + 1):
            ranks[order[k]] = rank
        start = end + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    _check_pair(x, y)
    return pearson(rank_with_ties(x), rank_with_ties(y))


def _tied_pairs(sorted_values: Sequence) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def _count_inversions(values: List[float]) -> int:
    """Strict inversions (i < j, v[i] > v[j]); sorts ``values`` in place."""
    n = len(values)
    if n < 2:
        return 0
    mid = n // 2
    left, right = values[:mid], values[mid:]
    swaps = _count_inversions(left) + _count_inversions(right)
    i = j = k = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            values[k] = left[i]
            i += 1
        else:
            values[k] = right[j]
            swaps += len(left) - i
            j += 1
        k += 1
    values[k:] = left[i:] + right[j:]
    return swaps


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    """Tie-corrected Kendall tau via merge-sort inversion counting."""
    _check_pair(x, y)
    n = len(x)
    pairs = sorted(zip(x, y))
    n0 = n * (n - 1) // 2
    ties_x = _tied_pairs([p[0] for p in pairs])
    ties_xy = _tied_pairs(pairs)
    ys = [p[1] for p in pairs]
    discordant = _count_inversions(ys)
    ties_y = _tied_pairs(ys)
    denom = (n0 - ties_x) * (n0 - ties_y)
    if denom == 0:
        raise UndefinedCorrelation("all pairs tied")
    numerator = n0 - ties_x - ties_y + ties_xy - 2 * discordant
    return _clamp(numerator / math.sqrt(denom))


COEFFICIENTS: Dict[str, Coefficient] = {
    "pearson": pearson,
    "spearman": spearman,
    "kendall": kendall_tau_b,
}


@dataclass(frozen=True)
class ScoreTable:
    """Values of one metric path keyed by (summarizer_id, instance_id)."""

    metric_path: str
    values: Dict[Tuple[str, str], float]
    n_missing: int = 0

    @property
    def summarizer_ids(self) -> Set[str]:
        return {s for s, _ in self.values}

    @property
    def instance_ids(self) -> Set[str]:
        return {i for _, i in self.values}


@dataclass
class LevelResult:
    value: Optional[float]
    n_used: int
    n_skipped: int
    reason: Optional[str] = None


def _common_cells(tx: ScoreTable, ty: ScoreTable) -> List[Tuple[str, str]]:
    return sorted(set(tx.values) & set(ty.values))


def _resolve(coef) -> Coefficient:
    if callable(coef):
        return coef
    try:
        return COEFFICIENTS[coef]
    except KeyError:
        raise UsageError(f"unknown coefficient {coef!r}; expected one of {sorted(COEFFICIENTS)}") from None


def summary_level(tx: ScoreTable, ty: ScoreTable, coef) -> LevelResult:
    """Average over inputs of the cross-system correlation within each input."""
    fn = _resolve(coef)
    by_input: Dict[str, List[Tuple[str, str]]] = defaultdict(list)
    for cell in _common_cells(tx, ty):
        by_input[cell[1]].append(cell)
    all_inputs = tx.instance_ids | ty.instance_ids
    coefficients = []
    for instance_id in sorted(by_input):
        cells = by_input[instance_id]
        if len(cells) < 2:
            continue
        try:
            coefficients.append(fn([tx.values[c] for c in cells], [ty.values[c] for c in cells]))
        except UndefinedCorrelation:
            continue
    n_skipped = len(all_inputs) - len(coefficients)
    if not coefficients:
        return LevelResult(None, 0, n_skipped, "no input has two or more systems with a defined correlation")
    return LevelResult(sum(coefficients) / len(coefficients), len(coefficients), n_skipped)


def system_averages(table: ScoreTable, cells: Sequence[Tuple[str, str]]) -> Dict[str, float]:
    grouped: Dict[str, List[float]] = defaultdict(list)
    for cell in cells:
        grouped[cell[0]].append(table.values[cell])
    return {s: math.fsum(v) / len(v) for s, v in grouped.items()}


def system_level(tx: ScoreTable, ty: ScoreTable, coef) -> LevelResult:
    """Correlation of per-system averages over the cells both tables cover."""
    fn = _resolve(coef)
    cells = _common_cells(tx, ty)
    ax = system_averages(tx, cells)
    ay = system_averages(ty, cells)
    systems = sorted(ax)
    n_skipped = len(tx.summarizer_ids | ty.summarizer_ids) - len(systems)
    if len(systems) < 2:
        return LevelResult(None, len(systems), n_skipped, "fewer than two systems are scored by both metrics")
    try:
        value = fn([ax[s] for s in systems], [ay[s] for s in systems])
    except UndefinedCorrelation as e:
        return LevelResult(None, len(systems), n_skipped, f"correlation undefined: {e}")
    return LevelResult(value, len(systems), n_skipped)


def global_level(tx: ScoreTable, ty: ScoreTable, coef) -> LevelResult:
    fn = _resolve(coef)
    cells = _common_cells(tx, ty)
    n_skipped = len(set(tx.values) | set(ty.values)) - len(cells)
    if len(cells) < 2:
        return LevelResult(None, len(cells), n_skipped, "fewer than two cells are scored by both metrics")
    try:
        value = fn([tx.values[c] for c in cells], [ty.values[c] for c in cells])
    except UndefinedCorrelation as e:
        return LevelResult(None, len(cells), n_skipped, f"correlation undefined: {e}")
    return LevelResult(value, len(cells), n_skipped)


LEVELS = {
    "summary": summary_level,
    "system": system_level,
    "global": global_level,
}


@dataclass
class CorrelationReport:
    metric_a: str
    metric_b: str
    levels: Dict[str, Dict[str, LevelResult]] = field(default_factory=dict)

    def to_json(self) -> Dict:
        out: Dict = {"metric_a": self.metric_a, "metric_b": self.metric_b}
        for level, results in self.levels.items():
            entry: Dict = {name: r.value for name, r in results.items()}
            # Undefinedness depends only on the data, so all coefficients at a
            # level agree on their counts.
            first = next(iter(results.values()))
            entry["n_used"] = first.n_used
            entry["n_skipped"] = first.n_skipped
            reasons = sorted({r.reason for r in results.values() if r.reason})
            if reasons:
                entry["reason"] = "; ".join(reasons)
            out[level] = entry
        return out


def correlate(tx: ScoreTable, ty: ScoreTable, levels: Sequence[str] = ("summary", "system", "global")) -> CorrelationReport:
    report = CorrelationReport(tx.metric_path, ty.metric_path)
    for level in levels:
        if level not in LEVELS:
            raise UsageError(f"unknown level {level!r}; expected one of {sorted(LEVELS)}")
        report.levels[level] = {name: LEVELS[level](tx, ty, fn) for name, fn in COEFFICIENTS.items()}
    return report

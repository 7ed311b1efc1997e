"""Empirical channel statistics and capacity.

The channel is summarized by the conditional PMF f(y|x) of delivered count y
given released count x, estimated as raw Monte Carlo frequencies (no
smoothing; trial counts are kept so statistical error stays attributable).
Capacity is computed by Blahut-Arimoto alternating maximization with the
standard bracket: lower bound I(p) and upper bound max_x KL(W_x || r).  All
internal logs are natural; bits appear only at the API boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DataIntegrityError, IncompleteDataError

LN2 = float(np.log(2.0))

_ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ConditionalPmf:
    """Row-stochastic matrix f(y|x) for x, y in {0..x_max}."""

    x_max: int
    matrix: np.ndarray
    trials_per_row: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        n = self.x_max + 1
        if m.shape != (n, n):
            raise DataIntegrityError(
                f"PMF matrix must be {n}x{n}, got {m.shape}"
            )
        if (m < 0).any():
            raise DataIntegrityError("PMF entries must be non-negative")
        bad = np.abs(m.sum(axis=1) - 1.0) > _ROW_SUM_TOL * n
        if bad.any():
            raise DataIntegrityError(
                f"PMF rows {np.flatnonzero(bad).tolist()} do not sum to 1"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(
            self, "trials_per_row", np.asarray(self.trials_per_row, dtype=np.int64)
        )


@dataclass(frozen=True)
class CapacityResult:
    """Blahut-Arimoto output: achieved rate, maximizing input, and bracket."""

    capacity_bits: float
    input_pmf: np.ndarray
    iterations: int
    lower_bound_bits: float
    upper_bound_bits: float
    converged: bool


def estimate_pmf(trials: Iterable[tuple[int, int]], x_max: int) -> ConditionalPmf:
    """Empirical f(y|x) from (x, y) trial pairs.

    Every x in 0..x_max needs at least one trial; a record with y > x (or an
    out-of-range symbol) is a data-integrity error.
    """
    counts = np.zeros((x_max + 1, x_max + 1), dtype=np.int64)
    for x, y in trials:
        if not (0 <= x <= x_max):
            raise DataIntegrityError(f"trial has x={x} outside 0..{x_max}")
        if y < 0 or y > x:
            raise DataIntegrityError(f"trial has y={y} > x={x}")
        counts[x, y] += 1
    per_row = counts.sum(axis=1)
    if (per_row == 0).any():
        raise IncompleteDataError(np.flatnonzero(per_row == 0).tolist())
    matrix = counts / per_row[:, None]
    return ConditionalPmf(x_max=x_max, matrix=matrix, trials_per_row=per_row)


def pmf_to_json(pmf: ConditionalPmf) -> str:
    """Serialize as {"x_max":…, "rows":[[…]], "trials_per_row":[…]}."""
    return json.dumps({
        "x_max": pmf.x_max,
        "rows": pmf.matrix.tolist(),
        "trials_per_row": pmf.trials_per_row.tolist(),
    })


def pmf_from_json(text: str) -> ConditionalPmf:
    try:
        d = json.loads(text)
        return ConditionalPmf(
            x_max=int(d["x_max"]),
            matrix=np.asarray(d["rows"], dtype=np.float64),
            trials_per_row=np.asarray(d["trials_per_row"], dtype=np.int64),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DataIntegrityError(f"malformed PMF file: {exc}") from exc


def write_pmf_json(pmf: ConditionalPmf, path) -> None:
    with open(path, "w") as fh:
        fh.write(pmf_to_json(pmf) + "\n")


def read_pmf_json(path) -> ConditionalPmf:
    with open(path) as fh:
        return pmf_from_json(fh.read())


def _as_matrix(pmf: Union[ConditionalPmf, np.ndarray]) -> np.ndarray:
    if isinstance(pmf, ConditionalPmf):
        return pmf.matrix
    m = np.asarray(pmf, dtype=np.float64)
    if m.ndim != 2 or (m < 0).any() or \
            np.abs(m.sum(axis=1) - 1.0).max() > _ROW_SUM_TOL * m.shape[1]:
        raise DataIntegrityError("channel matrix must be row-stochastic")
    return m


def mutual_information(pmf: Union[ConditionalPmf, np.ndarray],
                       input_dist: Sequence[float]) -> float:
    """I(X;Y) in bits for a given input distribution; 0 log 0 terms are 0."""
    W = _as_matrix(pmf)
    p = np.asarray(input_dist, dtype=np.float64)
    if p.shape != (W.shape[0],):
        raise DataIntegrityError("input distribution length mismatch")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-9:
        raise DataIntegrityError("input distribution must sum to 1")
    r = p @ W
    mask = W > 0
    lnW = np.where(mask, np.log(np.where(mask, W, 1.0)), 0.0)
    lnr = np.log(np.where(r > 0, r, 1.0))
    kl_rows = (np.where(mask, W * (lnW - lnr[None, :]), 0.0)).sum(axis=1)
    return float(np.dot(p, kl_rows)) / LN2


def blahut_arimoto(pmf: Union[ConditionalPmf, np.ndarray],
                   tolerance_bits: float = 1e-9,
                   max_iters: int = 100000) -> CapacityResult:
    """Channel capacity of a discrete memoryless channel.

    Alternates q(x|y) ∝ p(x) f(y|x) with p(x) ∝ exp(Σ_y f(y|x) ln q(x|y))
    until the capacity bracket closes to the tolerance.  Output symbols that
    are never produced are dropped first (they cannot carry information).
    Dominated inputs may end with zero mass.  If the bracket does not close
    within max_iters the best bracket is returned flagged non-converged.
    """
    if tolerance_bits <= 0:
        raise DataIntegrityError("tolerance must be positive")
    W = _as_matrix(pmf)
    W = W[:, W.sum(axis=0) > 0]
    n_in = W.shape[0]
    mask = W > 0
    lnW = np.where(mask, np.log(np.where(mask, W, 1.0)), 0.0)
    row_wlnw = (W * lnW).sum(axis=1)

    tol_nats = tolerance_bits * LN2
    p = np.full(n_in, 1.0 / n_in)
    lower = 0.0
    upper = np.inf
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        r = p @ W
        lnr = np.log(np.where(r > 0, r, 1.0))
        # KL(W_x || r); +inf when x can produce a y that currently has r=0
        starved = (~(r > 0)) & mask.any(axis=0)
        kl = row_wlnw - W @ lnr
        if starved.any():
            kl = np.where((W[:, starved] > 0).any(axis=1), np.inf, kl)
        lower = float(np.where(p > 0, p * kl, 0.0).sum())
        upper = float(kl.max())
        if upper - lower <= tol_nats:
            converged = True
            break
        with np.errstate(divide="ignore"):
            t = np.where(p > 0, np.log(np.where(p > 0, p, 1.0)) + kl, -np.inf)
        t -= t.max()
        p = np.exp(t)
        p /= p.sum()

    return CapacityResult(
        capacity_bits=lower / LN2,
        input_pmf=p,
        iterations=iterations,
        lower_bound_bits=lower / LN2,
        upper_bound_bits=upper / LN2,
        converged=converged,
    )


def capacity_vs_xmax(trials: Iterable[tuple[int, int]],
                     x_max_list: Sequence[int],
                     tolerance_bits: float = 1e-9,
                     max_iters: int = 100000) -> list[tuple[int, CapacityResult]]:
    """Capacity after truncating the alphabet to {0..x_max}, per x_max.

    The PMF is estimated once at the largest x_max; truncating both axes
    keeps rows stochastic because simulated records never contain y > x
    (asserted here).
    """
    x_top = max(x_max_list)
    full = estimate_pmf(trials, x_top)
    out = []
    for m in sorted(set(int(v) for v in x_max_list)):
        sub = full.matrix[: m + 1, : m + 1]
        if np.abs(sub.sum(axis=1) - 1.0).max() > _ROW_SUM_TOL * (m + 1):
            raise DataIntegrityError(
                f"rows not stochastic after truncation to x_max={m}; "
                "records must satisfy y <= x"
            )
        out.append((m, blahut_arimoto(sub, tolerance_bits, max_iters)))
    return out

"""Recover the initial signal from masked space-time samples.

Taking the tube DFT of every observation turns the recovery problem into p
independent complex least-squares systems, one per second-mode column j.  The
unknown of system j is the stacked frequency-domain column

    x(j) = [Xhat[:, j, 0]; ...; Xhat[:, j, n-1]]  (length m*n),

and each time step t contributes the block equation

    (1/n) * C(j) * D(t) * x(j) = b(j, t),

where D(t) is block-diagonal with the t-th powers of the operator's DFT
slices, C(j) is the mask-convolution matrix (an n-by-n grid of m-by-m
diagonal blocks: applied to x viewed as an (m, n) slab it circularly
convolves row i with the mask-DFT tube (i, j)), and b(j, t) stacks the DFT
of observation t over the depth frequencies of column j.  The 1/n factor
comes from expressing entrywise masking as a tube convolution of DFTs.

Columns with no samples yield an exactly zero matrix and cannot be
recovered; they raise ``UnrecoverableColumnError`` unless the caller asks
for a partial estimate with those columns zero-filled and flagged.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .tensor3 import RealnessError, ShapeMismatchError, Tensor3, _purge_imag
from .tensor3 import rel_error as tensor_rel_error
from .sampling import SampleMask
from .dynsys import SampleData
from ._parallel import pmap

_EPS = float(np.finfo(np.float64).eps)


class UnrecoverableColumnError(Exception):
    """One or more mask columns carry no samples; their systems are zero."""

    def __init__(self, columns):
        self.columns = tuple(sorted(int(j) for j in columns))
        cols = ", ".join(str(j) for j in self.columns)
        super().__init__(f"column(s) {cols} have no samples and cannot be recovered")


@dataclass(frozen=True)
class ColumnSystem:
    """Stacked least-squares system for one second-mode column.

    ``matrix`` is (T*m*n, m*n); ``rhs`` has length T*m*n.
    """

    j: int
    matrix: np.ndarray
    rhs: np.ndarray


@dataclass
class ReconstructionReport:
    """Estimate plus per-column diagnostics of a reconstruction run."""

    estimate: Tensor3
    residuals: list[float]
    kappa: list[float | None]
    K: float | None
    ranks: list[int]
    failed_columns: list[int]
    rel_error: float | None = None
    wall_ms: float = 0.0

    @property
    def rank_deficient_columns(self) -> list[int]:
        """Solved columns whose numerical rank fell short of m*n."""
        m, _, n = self.estimate.dims
        full = m * n
        failed = set(self.failed_columns)
        return [
            j for j, r in enumerate(self.ranks) if j not in failed and r < full
        ]

    def to_json_dict(self) -> dict:
        """JSON-ready diagnostics; timing is excluded to keep outputs stable."""
        out = {
            "residuals": self.residuals,
            "kappa": self.kappa,
            "K": self.K,
            "ranks": self.ranks,
            "failed_columns": self.failed_columns,
        }
        if self.rel_error is not None:
            out["rel_error"] = self.rel_error
        return out


def default_solver_tol(shape) -> float:
    """Relative singular-value cutoff: max(rows, cols) * machine epsilon."""
    return max(int(shape[0]), int(shape[1])) * _EPS


# -- system assembly ----------------------------------------------------------


def _operator_powers(a: Tensor3, T: int) -> np.ndarray:
    """(T, n, m, m) array: entry [t, k] is the t-th power of DFT slice k."""
    m, _, n = a.dims
    slices = np.fft.fft(a.data, axis=2).transpose(2, 0, 1)
    powers = np.empty((T, n, m, m), dtype=np.complex128)
    powers[0] = np.eye(m)
    for t in range(1, T):
        powers[t] = powers[t - 1] @ slices
    return powers


def _mask_dft(mask: SampleMask) -> np.ndarray:
    return np.fft.fft(mask.indicator.astype(np.float64), axis=2)


def _mask_conv_matrix(phat: np.ndarray, j: int) -> np.ndarray:
    """Dense mask-convolution matrix C(j), an (m*n)-by-(m*n) array.

    Grid block (a, b) is diagonal over the first mode, holding entry
    (a, b) of the circulant of the mask-DFT tube of each row i.
    """
    m, _, n = phat.shape
    tubes = phat[:, j, :]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    circs = tubes[:, idx]  # (m, n, n): circs[i, a, b] = tubes[i, (a-b) % n]
    out = np.zeros((m * n, m * n), dtype=np.complex128)
    rows = np.arange(m)
    for a in range(n):
        for b in range(n):
            out[a * m + rows, b * m + rows] = circs[:, a, b]
    return out


def _mask_conv_apply(phat: np.ndarray, j: int, slab: np.ndarray) -> np.ndarray:
    """Matrix-free action of C(j) on an (m, n) slab.

    Row i of the output is the circular convolution of the mask-DFT tube
    (i, j) with row i of the slab.  Must agree with the dense form exactly;
    kept for cross-checks and large-instance use.
    """
    tubes = phat[:, j, :]
    n = slab.shape[1]
    out = np.zeros_like(slab, dtype=np.complex128)
    for d in range(n):
        out += tubes[:, d : d + 1] * np.roll(slab, d, axis=1)
    return out


def _column_matrix(powers: np.ndarray, phat: np.ndarray, j: int) -> np.ndarray:
    """Stack (1/n) * C(j) * D(t) over t; shape (T*m*n, m*n)."""
    T, n, m, _ = powers.shape
    mn = m * n
    conv = _mask_conv_matrix(phat, j)
    out = np.empty((T * mn, mn), dtype=np.complex128)
    for t in range(T):
        block = out[t * mn : (t + 1) * mn]
        # D(t) is block-diagonal, so apply it one column-block at a time.
        for k in range(n):
            block[:, k * m : (k + 1) * m] = conv[:, k * m : (k + 1) * m] @ powers[t, k]
    out /= n
    return out


def _column_rhs(obs_dfts: list[np.ndarray], j: int) -> np.ndarray:
    """Stack the DFT of every observation over depth frequencies of column j."""
    return np.concatenate([ohat[:, j, :].flatten(order="F") for ohat in obs_dfts])


def _check_problem(a: Tensor3, mask: SampleMask, samples: SampleData | None) -> None:
    m, p, n = mask.dims
    if a.dims != (m, m, n):
        raise ShapeMismatchError(
            f"operator dims {a.dims} incompatible with mask dims {mask.dims}"
        )
    if samples is not None and not np.array_equal(
        mask.indicator, samples.mask.indicator
    ):
        raise ValueError("mask does not match the mask the samples were taken on")


def assemble_column_system(
    a: Tensor3, mask: SampleMask, samples: SampleData, j: int
) -> ColumnSystem:
    """Build the stacked system for column ``j`` from operator, mask, samples."""
    _check_problem(a, mask, samples)
    p = mask.dims[1]
    if not 0 <= j < p:
        raise IndexError(f"column {j} out of range for {p} columns")
    powers = _operator_powers(a, samples.horizon)
    phat = _mask_dft(mask)
    obs_dfts = [np.fft.fft(o.data, axis=2) for o in samples.observations]
    return ColumnSystem(
        j=j,
        matrix=_column_matrix(powers, phat, j),
        rhs=_column_rhs(obs_dfts, j),
    )


# -- solving -------------------------------------------------------------------


def solve_column(system: ColumnSystem, tol: float | None = None):
    """Minimum-norm least-squares solution of one column system via SVD.

    Returns ``(x, rank, kappa, residual)`` where rank counts singular values
    above ``tol * sigma_max`` and kappa is the ratio of the largest kept
    singular value to the smallest.  An all-zero matrix raises
    ``UnrecoverableColumnError`` -- that column was never sampled.
    """
    M, b = system.matrix, system.rhs
    if not M.any():
        raise UnrecoverableColumnError((system.j,))
    rel = default_solver_tol(M.shape) if tol is None else float(tol)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    cutoff = rel * s[0]
    rank = int(np.count_nonzero(s > cutoff))
    kappa = float(s[0] / s[rank - 1])
    coef = (u[:, :rank].conj().T @ b) / s[:rank]
    x = vh[:rank].conj().T @ coef
    residual = float(np.linalg.norm(M @ x - b))
    return x, rank, kappa, residual


def reconstruct(
    a: Tensor3,
    mask: SampleMask,
    samples: SampleData,
    *,
    tol: float | None = None,
    allow_partial: bool = False,
    ground_truth: Tensor3 | None = None,
    threads: int = 1,
) -> ReconstructionReport:
    """Solve all column systems and assemble the estimated initial signal.

    Columns are independent and may be solved in parallel; the report is
    identical for any thread count.  Unsampled columns raise unless
    ``allow_partial`` is set, in which case they are zero-filled and listed
    in ``failed_columns``.  When the operator and observations are real, the
    estimate is reduced to real data provided its imaginary residue is at
    roundoff level; otherwise the complex estimate is returned as-is so that
    failed recoveries report their true error.
    """
    start = time.perf_counter()
    _check_problem(a, mask, samples)
    m, p, n = mask.dims
    powers = _operator_powers(a, samples.horizon)
    phat = _mask_dft(mask)
    obs_dfts = [np.fft.fft(o.data, axis=2) for o in samples.observations]

    def run(j: int):
        system = ColumnSystem(
            j=j,
            matrix=_column_matrix(powers, phat, j),
            rhs=_column_rhs(obs_dfts, j),
        )
        try:
            return ("ok",) + solve_column(system, tol)
        except UnrecoverableColumnError:
            return ("failed", float(np.linalg.norm(system.rhs)))

    results = pmap(run, range(p), threads)
    failed = [j for j, r in enumerate(results) if r[0] == "failed"]
    if failed and not allow_partial:
        raise UnrecoverableColumnError(failed)

    xhat = np.zeros((m, p, n), dtype=np.complex128)
    residuals: list[float] = []
    kappas: list[float | None] = []
    ranks: list[int] = []
    for j, res in enumerate(results):
        if res[0] == "failed":
            residuals.append(res[1])
            kappas.append(None)
            ranks.append(0)
            continue
        _, x, rank, kappa, residual = res
        xhat[:, j, :] = x.reshape((m, n), order="F")
        residuals.append(residual)
        kappas.append(kappa)
        ranks.append(rank)

    estimate_data = np.fft.ifft(xhat, axis=2)
    if a.is_real and all(o.is_real for o in samples.observations):
        try:
            estimate_data = _purge_imag(estimate_data, "reconstruct")
        except RealnessError:
            pass  # estimate is genuinely non-real; report the honest error
    estimate = Tensor3(estimate_data, copy=False)

    solved = [k for k in kappas if k is not None]
    report = ReconstructionReport(
        estimate=estimate,
        residuals=residuals,
        kappa=kappas,
        K=max(solved) if solved else None,
        ranks=ranks,
        failed_columns=failed,
        rel_error=(
            tensor_rel_error(estimate, ground_truth)
            if ground_truth is not None
            else None
        ),
        wall_ms=(time.perf_counter() - start) * 1e3,
    )
    return report


def system_condition(
    a: Tensor3, mask: SampleMask, T: int, tol: float | None = None, threads: int = 1
):
    """Condition numbers of every column system and their maximum.

    The right-hand side is irrelevant: kappa(j) depends only on the operator,
    the mask, and the horizon.  Returns ``(kappas, K)``.
    """
    _check_problem(a, mask, None)
    if int(T) < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    p = mask.dims[1]
    powers = _operator_powers(a, int(T))
    phat = _mask_dft(mask)

    def run(j: int):
        M = _column_matrix(powers, phat, j)
        if not M.any():
            return None
        s = np.linalg.svd(M, compute_uv=False)
        rel = default_solver_tol(M.shape) if tol is None else float(tol)
        rank = int(np.count_nonzero(s > rel * s[0]))
        return float(s[0] / s[rank - 1])

    kappas = pmap(run, range(p), threads)
    empty = [j for j, k in enumerate(kappas) if k is None]
    if empty:
        raise UnrecoverableColumnError(empty)
    return kappas, max(kappas)

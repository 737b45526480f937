"""Sampling sets and the projection onto observed entries.

A sampling set is a boolean mask over the (m, p, n) index grid.  The mask is
fixed across all observation times; the projection zeroes every entry outside
it.  Masks remember how they were built (Bernoulli draw, lattice, or slab
exclusions applied to a parent) so datasets can be regenerated from their
sidecar metadata alone.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor3 import ShapeMismatchError, Tensor3
from .t3io import T3FormatError, atomic_write_text, read_t3, write_t3


class SampleMask:
    """Immutable boolean mask over an (m, p, n) grid.

    ``provenance`` is a JSON-serializable dict: {"type": "bernoulli",
    "alpha": a, "seed": s, "exclusions": [...]}, {"type": "lattice",
    "I": [...], "J": [...], "exclusions": [...]}, or {"type": "custom",
    "exclusions": [...]}; slab exclusions append {"mode": 1|2|3,
    "index": idx} entries.
    """

    __slots__ = ("indicator", "dims", "provenance")

    def __init__(self, indicator, provenance=None):
        arr = np.ascontiguousarray(np.asarray(indicator, dtype=bool))
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ShapeMismatchError(f"mask needs a 3-way grid, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "indicator", arr)
        object.__setattr__(self, "dims", arr.shape)
        prov = {"type": "custom", "exclusions": []} if provenance is None else provenance
        object.__setattr__(self, "provenance", prov)

    def __setattr__(self, name, value):
        raise AttributeError("SampleMask is immutable")

    def as_tensor(self) -> Tensor3:
        """0/1 tensor with ones exactly on the sampled entries."""
        return Tensor3(self.indicator.astype(np.float64), copy=False)

    @property
    def sample_count(self) -> int:
        return int(self.indicator.sum())

    @property
    def rate(self) -> float:
        m, p, n = self.dims
        return self.sample_count / (m * p * n)

    @property
    def column_coverage(self) -> frozenset:
        """Second-mode indices j that carry at least one sample."""
        hit = self.indicator.any(axis=(0, 2))
        return frozenset(int(j) for j in np.nonzero(hit)[0])

    def __repr__(self) -> str:
        return (
            f"SampleMask(dims={self.dims}, samples={self.sample_count}, "
            f"type={self.provenance.get('type')!r})"
        )


def bernoulli_mask(m: int, p: int, n: int, alpha: float, seed: int) -> SampleMask:
    """Each entry sampled independently with probability ``alpha``.

    Entries are drawn in lexicographic (i, j, k) order from a counter-based
    generator keyed on the seed, so the mask is identical across platforms
    and run-to-run.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    indicator = rng.random((m, p, n)) < alpha
    prov = {"type": "bernoulli", "alpha": alpha, "seed": int(seed), "exclusions": []}
    return SampleMask(indicator, prov)


def lattice_mask(m: int, p: int, n: int, I, J) -> SampleMask:
    """Product-form mask: entry (i, j, k) sampled iff i in I and j in J.

    All depths k are included.  I and J are 0-based index collections.
    """
    I = sorted(int(i) for i in I)
    J = sorted(int(j) for j in J)
    if not I or not J:
        raise ValueError("lattice_mask needs nonempty I and J")
    if I[0] < 0 or I[-1] >= m:
        raise IndexError(f"I contains indices outside [0, {m}): {I}")
    if J[0] < 0 or J[-1] >= p:
        raise IndexError(f"J contains indices outside [0, {p}): {J}")
    indicator = np.zeros((m, p, n), dtype=bool)
    indicator[np.ix_(I, J, range(n))] = True
    prov = {"type": "lattice", "I": I, "J": J, "exclusions": []}
    return SampleMask(indicator, prov)


def exclude_slab(mask: SampleMask, mode: int, index: int) -> SampleMask:
    """Drop every sample whose mode-``mode`` coordinate equals ``index``.

    ``mode`` is 1, 2, or 3 for the first, second, or third index; the
    returned mask records the exclusion in its provenance.
    """
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2, or 3, got {mode}")
    axis = mode - 1
    index = int(index)
    if not 0 <= index < mask.dims[axis]:
        raise IndexError(
            f"index {index} out of range for mode {mode} of dims {mask.dims}"
        )
    indicator = mask.indicator.copy()
    sel = [slice(None)] * 3
    sel[axis] = index
    indicator[tuple(sel)] = False
    prov = dict(mask.provenance)
    prov["exclusions"] = list(mask.provenance.get("exclusions", [])) + [
        {"mode": mode, "index": index}
    ]
    return SampleMask(indicator, prov)


def project(mask: SampleMask, t: Tensor3) -> Tensor3:
    """Keep entries on the mask, zero everything else."""
    if mask.dims != t.dims:
        raise ShapeMismatchError(
            f"cannot project tensor of dims {t.dims} with mask of dims {mask.dims}"
        )
    return Tensor3(t.data * mask.indicator, copy=False)


# -- serialization -----------------------------------------------------------


def save_mask(path, mask: SampleMask) -> None:
    """Write ``<path>`` as T3 v1 (0/1 entries) plus a ``.json`` provenance sidecar."""
    path = Path(path)
    write_t3(path, mask.as_tensor())
    sidecar = path.with_suffix(path.suffix + ".json")
    atomic_write_text(
        sidecar, json.dumps(mask.provenance, sort_keys=True, indent=2) + "\n"
    )


def load_mask(path) -> SampleMask:
    """Read a mask written by ``save_mask``; tolerates a missing sidecar."""
    path = Path(path)
    t = read_t3(path)
    values = t.data.real
    bad = ~((values == 0.0) | (values == 1.0)) | (t.data.imag != 0.0)
    if bad.any():
        i, j, k = np.argwhere(bad)[0]
        m, p, _ = t.dims
        line = 2 + k * p * m + j * m + i  # header + (k, j, i)-ordered entries
        raise T3FormatError(path, int(line), "mask entries must be 0 or 1")
    sidecar = path.with_suffix(path.suffix + ".json")
    if sidecar.exists():
        prov = json.loads(sidecar.read_text(encoding="ascii"))
    else:
        prov = {"type": "custom", "exclusions": []}
    return SampleMask(values != 0.0, prov)

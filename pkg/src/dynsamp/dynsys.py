"""Forward model: evolve a signal under t-product dynamics and observe it.

The signal at step t is the t-th t-product power of the operator applied to
the initial tensor.  Observations keep only the masked entries and may carry
additive real Gaussian noise, drawn independently per time step.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .tensor3 import ShapeMismatchError, Tensor3, _purge_imag, _slicewise_matmul
from .sampling import SampleMask, load_mask, project, save_mask
from .t3io import atomic_write_text, read_t3, write_t3


class SampleData:
    """Masked observations of an evolving signal over T time steps.

    Every observation is supported on the mask exactly: off-mask entries are
    identically zero, enforced at construction.
    """

    __slots__ = ("mask", "horizon", "observations", "noise_sigma", "seed")

    def __init__(self, mask: SampleMask, observations, noise_sigma: float, seed: int):
        observations = tuple(observations)
        if not observations:
            raise ValueError("SampleData needs at least one observation")
        for t, obs in enumerate(observations):
            if obs.dims != mask.dims:
                raise ShapeMismatchError(
                    f"observation {t} has dims {obs.dims}, mask has {mask.dims}"
                )
            if not np.array_equal(project(mask, obs).data, obs.data):
                raise ValueError(f"observation {t} carries values off the mask")
        if noise_sigma < 0:
            raise ValueError(f"noise_sigma must be nonnegative, got {noise_sigma}")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "horizon", len(observations))
        object.__setattr__(self, "observations", observations)
        object.__setattr__(self, "noise_sigma", float(noise_sigma))
        object.__setattr__(self, "seed", int(seed))

    def __setattr__(self, name, value):
        raise AttributeError("SampleData is immutable")

    def __repr__(self) -> str:
        return (
            f"SampleData(dims={self.mask.dims}, T={self.horizon}, "
            f"sigma={self.noise_sigma}, seed={self.seed})"
        )


def evolve(a: Tensor3, f: Tensor3, T: int) -> list[Tensor3]:
    """Trajectory [f, a*f, a^2*f, ...] of length T under the t-product.

    Element 0 is ``f`` itself.  Later steps are computed incrementally in the
    frequency domain (one slice-wise product per step) and transformed back,
    purging roundoff imaginary parts when both inputs are real.
    """
    ma, pa, na = a.dims
    mf, pf, nf = f.dims
    if ma != pa:
        raise ShapeMismatchError(f"operator must be square, got {a.dims}")
    if na != nf or ma != mf:
        raise ShapeMismatchError(
            f"operator dims {a.dims} incompatible with signal dims {f.dims}"
        )
    T = int(T)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    out = [f]
    if T == 1:
        return out
    ahat = np.fft.fft(a.data, axis=2)
    cur = np.fft.fft(f.data, axis=2)
    real_inputs = a.is_real and f.is_real
    for t in range(1, T):
        cur = _slicewise_matmul(ahat, cur)
        step = np.fft.ifft(cur, axis=2)
        if real_inputs:
            step = _purge_imag(step, f"evolve step {t}")
        out.append(Tensor3(step, copy=False))
    return out


def observe(trajectory, mask: SampleMask, sigma: float, seed: int) -> SampleData:
    """Project each trajectory element onto the mask, with optional noise.

    Noise is real Gaussian with standard deviation ``sigma``, independent per
    entry and per time step; the step-t stream is the seed's generator jumped
    t times, so observation t never depends on how many steps precede it.
    """
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    observations = []
    for t, ft in enumerate(trajectory):
        if sigma == 0.0:
            observations.append(project(mask, ft))
            continue
        rng = np.random.Generator(np.random.Philox(key=int(seed)).jumped(t))
        noise = sigma * rng.standard_normal(ft.dims)
        observations.append(project(mask, Tensor3(ft.data + noise, copy=False)))
    return SampleData(mask, observations, sigma, seed)


# -- dataset directories -------------------------------------------------------


def save_sample_data(directory, samples: SampleData) -> None:
    """Write mask.t3(+.json), obs_<t>.t3, and meta.json into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_mask(directory / "mask.t3", samples.mask)
    for t, obs in enumerate(samples.observations):
        write_t3(directory / f"obs_{t}.t3", obs)
    m, p, n = samples.mask.dims
    meta = {
        "T": samples.horizon,
        "sigma": samples.noise_sigma,
        "seed": samples.seed,
        "dims": [m, p, n],
    }
    atomic_write_text(
        directory / "meta.json", json.dumps(meta, sort_keys=True, indent=2) + "\n"
    )


def load_sample_data(directory) -> SampleData:
    """Read a dataset directory written by ``save_sample_data``."""
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"{directory}: missing meta.json")
    meta = json.loads(meta_path.read_text(encoding="ascii"))
    mask = load_mask(directory / "mask.t3")
    T = int(meta["T"])
    observations = []
    for t in range(T):
        obs_path = directory / f"obs_{t}.t3"
        if not obs_path.exists():
            raise FileNotFoundError(f"{directory}: missing obs_{t}.t3 (T={T})")
        observations.append(read_t3(obs_path))
    return SampleData(mask, observations, float(meta["sigma"]), int(meta["seed"]))

"""Synthetic latent-factor instances with SNR-calibrated noise and MCAR masks.

Random streams: ``numpy.random.SeedSequence(seed).spawn(4)`` gives four
independent PCG64 generators, used in order for the row factors, the column
factors, the noise and the mask.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .matrix import DenseMatrix, MaskedMatrix, save_csv

GENERATOR_TAG = "numpy-PCG64/SeedSequence.spawn(4):u,v,noise,mask"


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    m: int
    d: int = 2
    lam: float = 1.0
    snr: float = 1.0
    p: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lambda must be in (0,1]")
        if not self.snr > 0:
            raise ValueError("snr must be > 0")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must be in (0,1]")


@dataclass(frozen=True, eq=False)
class SyntheticInstance:
    spec: SyntheticSpec
    theta: DenseMatrix
    data: MaskedMatrix
    u: np.ndarray
    v: np.ndarray
    sigma_eps2: float


def holder_f(u, v, lam: float):
    """``sum_k |u_k + v_k|**lam * sign(u_k + v_k)``.

    Broadcasts over leading axes; the last axis is the latent dimension.
    """
    s = np.asarray(u, dtype=np.float64) + np.asarray(v, dtype=np.float64)
    return np.sum(np.abs(s) ** lam * np.sign(s), axis=-1)


def calibrate_noise(theta, snr: float) -> float:
    """Noise variance giving ``sqrt(mean(theta**2) / sigma2) == snr``."""
    theta = theta.values if isinstance(theta, DenseMatrix) else np.asarray(theta, dtype=np.float64)
    power = float(np.mean(theta * theta))
    if power == 0.0:
        raise ValueError("SNR undefined for an all-zero signal")
    return power / (snr * snr)


def snr_of(theta, sigma2: float) -> float:
    theta = theta.values if isinstance(theta, DenseMatrix) else np.asarray(theta)
    return float(np.sqrt(np.mean(theta * theta) / sigma2))


def generate(spec: SyntheticSpec) -> SyntheticInstance:
    """Draw one instance; identical specs give bit-identical instances."""
    g_u, g_v, g_noise, g_mask = (np.random.Generator(np.random.PCG64(s))
                                 for s in np.random.SeedSequence(spec.seed).spawn(4))
    u = g_u.uniform(-0.5, 0.5, size=(spec.n, spec.d))
    v = g_v.uniform(-0.5, 0.5, size=(spec.m, spec.d))
    theta = holder_f(u[:, None, :], v[None, :, :], spec.lam)
    sigma2 = calibrate_noise(theta, spec.snr)
    noise = g_noise.normal(0.0, np.sqrt(sigma2), size=theta.shape)
    if spec.p >= 1.0:
        mask = np.ones(theta.shape, dtype=bool)
    else:
        mask = g_mask.random(theta.shape) < spec.p
    data = MaskedMatrix(np.where(mask, theta + noise, np.nan), mask)
    return SyntheticInstance(spec, DenseMatrix(theta), data, u, v, sigma2)


def metadata(inst: SyntheticInstance) -> dict:
    s = asdict(inst.spec)
    return {"n": s["n"], "m": s["m"], "d": s["d"], "lambda": s["lam"], "snr": s["snr"],
            "p": s["p"], "seed": s["seed"], "sigma_eps2": inst.sigma_eps2,
            "generator": GENERATOR_TAG}


def write_instance(inst: SyntheticInstance, out_dir) -> None:
    """Write ``theta.csv``, ``data.csv`` and ``meta.json`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    save_csv(inst.theta, os.path.join(out_dir, "theta.csv"))
    save_csv(inst.data, os.path.join(out_dir, "data.csv"))
    with open(os.path.join(out_dir, "meta.json"), "w") as fh:
        json.dump(metadata(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metadata(path) -> dict:
    with open(path) as fh:
        meta = json.load(fh)
    missing = {"n", "m", "d", "lambda", "snr", "p", "seed", "sigma_eps2"} - set(meta)
    if missing:
        raise ValueError(f"metadata missing keys: {sorted(missing)}")
    return meta

"""Synthetic inverse-problem generators: sparse deconvolution with an
exactly-constructed source-condition solution, the separable blur problem,
exact-level noise injection and noise-condition diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linops import (
    LinearOperator,
    compose,
    make_blur,
    make_circular_convolution,
    make_haar_synthesis,
    range_complement_ratio,
)
from .penalty import ElasticNet, L1, LpPower, Penalty
from .rng import SplitMix64


@dataclass
class ProblemInstance:
    K: LinearOperator
    R: Penalty
    x_dagger: np.ndarray
    y_dagger: np.ndarray
    y_delta: np.ndarray
    delta: float
    seed: int
    w: np.ndarray | None = None  # source element; None when not constructed
    xi_dagger: np.ndarray | None = None
    epsilon_hat: float | None = None
    metadata: dict = field(default_factory=dict)

    def save(self, directory):
        """Serialize to a directory: JSON manifest plus raw little-endian
        float64 vectors."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        vectors = {"x_dagger": self.x_dagger, "y_dagger": self.y_dagger,
                   "y_delta": self.y_delta}
        if self.w is not None:
            vectors["w"] = self.w
        if self.xi_dagger is not None:
            vectors["xi_dagger"] = self.xi_dagger
        for name, vec in vectors.items():
            np.asarray(vec, dtype="<f8").tofile(directory / f"{name}.f64")
        manifest = {
            "domain_dim": self.K.domain_dim,
            "range_dim": self.K.range_dim,
            "operator": _operator_manifest(self.K),
            "penalty": _penalty_manifest(self.R),
            "delta": self.delta,
            "seed": self.seed,
            "epsilon_hat": self.epsilon_hat,
            "vectors": sorted(vectors),
            "metadata": self.metadata,
        }
        with open(directory / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        with open(directory / "manifest.json") as fh:
            manifest = json.load(fh)
        vectors = {
            name: np.fromfile(directory / f"{name}.f64", dtype="<f8")
            for name in manifest["vectors"]
        }
        return cls(
            K=_operator_from_manifest(manifest["operator"]),
            R=_penalty_from_manifest(manifest["penalty"]),
            x_dagger=vectors["x_dagger"],
            y_dagger=vectors["y_dagger"],
            y_delta=vectors["y_delta"],
            delta=float(manifest["delta"]),
            seed=int(manifest["seed"]),
            w=vectors.get("w"),
            xi_dagger=vectors.get("xi_dagger"),
            epsilon_hat=manifest.get("epsilon_hat"),
            metadata=manifest.get("metadata", {}),
        )


def _operator_manifest(K):
    if K.kind == "composition":
        return {
            "kind": "composition",
            "outer": _operator_manifest(K.outer),
            "inner": _operator_manifest(K.inner),
        }
    if K.kind == "circular_convolution":
        return {"kind": K.kind, "n": K.domain_dim, "width": K.width}
    if K.kind == "haar_synthesis":
        return {"kind": K.kind, "n": K.domain_dim}
    if K.kind == "separable_blur":
        return {"kind": K.kind, "N": K.N, "band": K.band, "sigma": K.sigma}
    raise ValueError(f"operator kind {K.kind!r} has no manifest form")


def _operator_from_manifest(m):
    kind = m["kind"]
    if kind == "composition":
        return compose(
            _operator_from_manifest(m["outer"]), _operator_from_manifest(m["inner"])
        )
    if kind == "circular_convolution":
        return make_circular_convolution(m["n"], m["width"])
    if kind == "haar_synthesis":
        return make_haar_synthesis(m["n"])
    if kind == "separable_blur":
        return make_blur(m["N"], m["band"], m["sigma"])
    raise ValueError(f"unknown operator kind {kind!r}")


def _penalty_manifest(R):
    if R.kind == "lp_power":
        return {"kind": "lp_power", "p": R.p}
    if R.kind == "elastic_net":
        return {"kind": "elastic_net", "eta": R.eta}
    if R.kind == "l1":
        return {"kind": "l1"}
    raise ValueError(f"penalty kind {R.kind!r} has no manifest form")


def _penalty_from_manifest(m):
    kind = m["kind"]
    if kind == "lp_power":
        return LpPower(m["p"])
    if kind == "elastic_net":
        return ElasticNet(m["eta"])
    if kind == "l1":
        return L1()
    raise ValueError(f"unknown penalty kind {kind!r}")


def add_noise(y_dagger, delta, seed):
    """y_dagger + delta * g/||g|| with g standard normal from the seeded
    deterministic generator; the noise level is hit exactly."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    y_dagger = np.asarray(y_dagger, dtype=float)
    if delta == 0:
        return y_dagger.copy()
    g = SplitMix64(seed).normals(len(y_dagger))
    return y_dagger + delta * g / np.linalg.norm(g)


def construct_source_solution(K, w, p):
    """Exact solution satisfying the source condition by construction.

    With xi = K*w, the components are x_k = sign(xi_k) |xi_k / p|^(1/(p-1)),
    which makes xi the (single-valued) subgradient of the lp-power penalty
    at x.
    """
    if not 1.0 < p <= 2.0:
        raise ValueError("p must lie in (1, 2]")
    xi = K.apply_adjoint(np.asarray(w, dtype=float))
    x_dagger = np.sign(xi) * np.abs(xi / p) ** (1.0 / (p - 1.0))
    return xi, x_dagger


def default_w_profile(n, amplitude=4.0):
    """Piecewise source-element profile on [0,1]: a tall plateau, a negative
    dip and a smooth bump, scaled by `amplitude`.

    The default amplitude puts the exact data well above typical noise
    levels (signal-dominant regime); with amplitude 1 the deconvolution
    data norm is below even moderate delta and every selection rule
    degenerates to a grid endpoint.
    """
    t = (np.arange(n) + 0.5) / n
    w = np.zeros(n)
    w[(t >= 0.1) & (t < 0.35)] = 1.0
    w[(t >= 0.45) & (t < 0.6)] = -0.5
    bump = (t >= 0.7) & (t < 0.95)
    w[bump] = 0.8 * np.sin(np.pi * (t[bump] - 0.7) / 0.25) ** 2
    return amplitude * w


def noise_condition_epsilon(K, y_dagger, y_delta, tol=1e-10):
    """Fraction of the noise outside the closure of range(K)."""
    noise = np.asarray(y_delta, dtype=float) - np.asarray(y_dagger, dtype=float)
    if np.linalg.norm(noise) == 0.0:
        raise ValueError("noise is zero; the ratio is undefined")
    return range_complement_ratio(K, noise, tol=tol)


def deconvolution_problem(n=512, p=1.2, w_spec=None, delta=0.02, seed=0,
                          width=0.2, measure_epsilon=True):
    """Sparse deconvolution: K composes Haar synthesis with circular
    convolution by a box kernel; the lp-power penalty promotes sparsity and
    the exact solution fulfills the source condition by construction."""
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError("n must be a power of two")
    A = make_circular_convolution(n, width)
    B = make_haar_synthesis(n)
    K = compose(A, B)
    R = LpPower(p)
    w = np.asarray(w_spec, dtype=float) if w_spec is not None else default_w_profile(n)
    if w.shape != (n,):
        raise ValueError(f"w_spec must have length {n}")
    xi, x_dagger = construct_source_solution(K, w, p)
    y_dagger = K.apply(x_dagger)
    y_delta = add_noise(y_dagger, delta, seed)
    epsilon_hat = None
    if delta > 0 and measure_epsilon:
        epsilon_hat = noise_condition_epsilon(K, y_dagger, y_delta)
    return ProblemInstance(
        K=K,
        R=R,
        x_dagger=x_dagger,
        y_dagger=y_dagger,
        y_delta=y_delta,
        delta=float(delta),
        seed=int(seed),
        w=w,
        xi_dagger=xi,
        epsilon_hat=epsilon_hat,
        metadata={
            "problem": "deconvolution",
            "n": n,
            "p": p,
            "width": width,
            "nonzeros_x_dagger": int(np.count_nonzero(x_dagger)),
            "zero_noise": delta == 0,
        },
    )


def shapes_image(N):
    """Sparse nonnegative test image with a few geometric shapes: a filled
    rectangle, a disk and a diagonal bar on a zero background."""
    img = np.zeros((N, N))
    r0, r1 = int(0.12 * N), int(0.36 * N)
    c0, c1 = int(0.14 * N), int(0.42 * N)
    img[r0:r1, c0:c1] = 1.0
    rows, cols = np.mgrid[0:N, 0:N]
    center, radius = 0.68 * N, 0.14 * N
    img[(rows - center) ** 2 + (cols - center) ** 2 <= radius**2] = 1.5
    for k in range(int(0.5 * N)):
        rr = int(0.08 * N) + k
        cc = int(0.55 * N) + k // 2
        if rr < N and cc < N:
            img[rr, cc] = 2.0
    return img


def blur_problem(N=50, band=5, sigma=1.2, eta=1e-3, delta=0.1, seed=0):
    """Separable Gaussian deblurring with the elastic-net penalty.

    The ground truth is a documented synthetic shape image (flattened
    column-major). No source element is constructed, so error-bound checks
    do not apply; the selection rules still do.
    """
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    K = make_blur(N, band, sigma)
    R = ElasticNet(eta) if eta > 0 else L1()
    x_dagger = shapes_image(N).reshape(-1, order="F")
    y_dagger = K.apply(x_dagger)
    y_delta = add_noise(y_dagger, delta, seed)
    metadata = {
        "problem": "blur",
        "N": N,
        "band": band,
        "sigma": sigma,
        "eta": eta,
        "zero_noise": delta == 0,
    }
    if eta == 0:
        metadata["uniqueness_caveat"] = (
            "pure l1 penalty: the minimizer need not be unique"
        )
    return ProblemInstance(
        K=K,
        R=R,
        x_dagger=x_dagger,
        y_dagger=y_dagger,
        y_delta=y_delta,
        delta=float(delta),
        seed=int(seed),
        metadata=metadata,
    )

"""Convex penalty functionals with values, subgradients and exact proximal
maps: the lp-power penalty sum |x_k|^p for p in (1,2], the l1 norm, the
elastic net ||x||_1 + (eta/2)||x||_2^2 and the pure quadratic."""

from __future__ import annotations

import numpy as np

_PROX_TOL = 1e-12


class Penalty:
    """Base class; penalties are stateless and safe to share."""

    kind = "abstract"

    def value(self, x):
        raise NotImplementedError

    def subgradient(self, x):
        """A member of the subdifferential at x.

        For nonsmooth kinds the selection at a kink is sign(x_k) with 0 at 0;
        canonical residual-based subgradients live in the bregman module.
        """
        raise NotImplementedError

    def prox(self, t, lam):
        """Componentwise argmin_x (1/2)(x - t_k)^2 + lam * r(x)."""
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        t = np.asarray(t, dtype=float)
        if lam == 0:
            return t.copy()
        return self._prox(t, lam)

    def _prox(self, t, lam):
        raise NotImplementedError

    def subgradient_distance(self, x, v):
        """Euclidean distance from v to the subdifferential of R at x."""
        raise NotImplementedError


class LpPower(Penalty):
    """R(x) = sum_k |x_k|^p with p in (1, 2]; single-valued subgradient."""

    kind = "lp_power"

    def __init__(self, p):
        if not 1.0 < p <= 2.0:
            raise ValueError("p must lie in (1, 2]")
        self.p = float(p)

    def value(self, x):
        return float(np.sum(np.abs(x) ** self.p))

    def subgradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.p * np.sign(x) * np.abs(x) ** (self.p - 1.0)

    def _prox(self, t, lam):
        return _prox_lp_power(t, lam, self.p)

    def subgradient_distance(self, x, v):
        return float(np.linalg.norm(v - self.subgradient(x)))


class L1(Penalty):
    """R(x) = ||x||_1."""

    kind = "l1"

    def value(self, x):
        return float(np.sum(np.abs(x)))

    def subgradient(self, x):
        return np.sign(np.asarray(x, dtype=float))

    def _prox(self, t, lam):
        return np.sign(t) * np.maximum(np.abs(t) - lam, 0.0)

    def subgradient_distance(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        dist = np.where(
            x != 0.0,
            np.abs(v - np.sign(x)),
            np.maximum(np.abs(v) - 1.0, 0.0),
        )
        return float(np.linalg.norm(dist))


class ElasticNet(Penalty):
    """R(x) = ||x||_1 + (eta/2)||x||_2^2."""

    kind = "elastic_net"

    def __init__(self, eta):
        if eta < 0:
            raise ValueError("eta must be nonnegative")
        self.eta = float(eta)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(np.abs(x)) + 0.5 * self.eta * np.dot(x, x))

    def subgradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.sign(x) + self.eta * x

    def _prox(self, t, lam):
        return np.sign(t) * np.maximum(np.abs(t) - lam, 0.0) / (1.0 + lam * self.eta)

    def subgradient_distance(self, x, v):
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        dist = np.where(
            x != 0.0,
            np.abs(v - np.sign(x) - self.eta * x),
            np.maximum(np.abs(v) - 1.0, 0.0),
        )
        return float(np.linalg.norm(dist))


class Quadratic(Penalty):
    """R(x) = (eta/2)||x||_2^2, i.e. elastic net without the l1 part."""

    kind = "quadratic"

    def __init__(self, eta=1.0):
        if eta < 0:
            raise ValueError("eta must be nonnegative")
        self.eta = float(eta)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * self.eta * np.dot(x, x))

    def subgradient(self, x):
        return self.eta * np.asarray(x, dtype=float)

    def _prox(self, t, lam):
        return t / (1.0 + lam * self.eta)

    def subgradient_distance(self, x, v):
        return float(np.linalg.norm(np.asarray(v) - self.eta * np.asarray(x)))


def _prox_lp_power(t, lam, p):
    """Componentwise solve of x + lam*p*x^(p-1) = |t| on [0, |t|].

    Vectorized safeguarded Newton with bisection fallback; initial guess
    max(|t| - lam*p, |t|/2). The fixed-point equation is smooth and strictly
    increasing on (0, |t|), so the root is unique.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    lo = np.zeros_like(a)
    hi = a.copy()
    x = np.maximum(a - lam * p, 0.5 * a)
    active = a > 0.0
    with np.errstate(divide="ignore", over="ignore"):
        for _ in range(200):
            if not np.any(active):
                break
            xa = x[active]
            f = xa + lam * p * xa ** (p - 1.0) - a[active]
            pos = f > 0
            hi[active] = np.where(pos, xa, hi[active])
            lo[active] = np.where(pos, lo[active], xa)
            df = 1.0 + lam * p * (p - 1.0) * np.where(xa > 0, xa, 1.0) ** (p - 2.0)
            x_new = np.where(xa > 0, xa - f / df, xa)
            inside = (x_new > lo[active]) & (x_new < hi[active])
            x_new = np.where(inside, x_new, 0.5 * (lo[active] + hi[active]))
            done = (np.abs(f) <= _PROX_TOL * np.maximum(1.0, a[active])) | (
                x_new == xa
            )
            x[active] = np.where(done, xa, x_new)
            idx = np.flatnonzero(active)
            active[idx[done]] = False
    return np.sign(t) * x

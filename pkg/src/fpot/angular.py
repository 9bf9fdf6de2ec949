"""Samplers for the angular process W on the 1-norm simplex.

Both families are sampled exactly through the anchor mixture: pick a site j
uniformly, draw the spectral function tilted by its value at j, and normalize
to the simplex. For the log-Gaussian model the tilted draw is the increment
field anchored at j; for the extremal-t model it is a gamma-tilted value at j
followed by the usual Gaussian conditional. This is exact for both families
and costs one small Gaussian draw per sample.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .dependence import BrownResnick, ExtremalT, corr_matrix, gaussian_cov
from .errors import NumericsError
from .risks import RiskFunctional, evaluate
from .sites import SiteSet

_MAX_ZERO_REDRAWS = 10 ** 6


def _chol_with_jitter(S: np.ndarray) -> np.ndarray:
    """Cholesky factor, retrying once with jitter 1e-10 * trace on failure."""
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * max(np.trace(S), 1.0)
        try:
            return np.linalg.cholesky(S + jitter * np.eye(S.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NumericsError("covariance factorization failed") from exc


class BrownResnickAngular:
    """Anchor-mixture sampler for the log-Gaussian angular measure.

    ``order``: optional site ordering used for the factorization, so draws
    can be generated as successive conditional blocks (space-time storms).
    """

    def __init__(self, dep: BrownResnick, sites: SiteSet, order=None):
        self.dep = dep
        self.sites = sites
        self.L = sites.L
        from .dependence import variogram_matrix
        self._gamma = variogram_matrix(dep, sites)
        self._order = np.arange(self.L) if order is None else np.asarray(order, dtype=int)
        self._factors: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _factor(self, j: int):
        """Cholesky of the anchored covariance, excluding the anchored site."""
        cached = self._factors.get(j)
        if cached is None:
            col = self._gamma[:, j]
            S = col[:, None] + col[None, :] - self._gamma
            rest = self._order[self._order != j]
            chol = _chol_with_jitter(S[np.ix_(rest, rest)])
            cached = (rest, chol)
            self._factors[j] = cached
        return cached

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw (size, L) simplex samples."""
        L = self.L
        W = np.empty((size, L))
        if L == 1:
            W[:] = 1.0
            return W
        anchors = rng.integers(0, L, size=size)
        for j in range(L):
            m = anchors == j
            n_j = int(m.sum())
            if n_j == 0:
                continue
            rest, chol = self._factor(j)
            G = np.zeros((n_j, L))
            G[:, rest] = rng.standard_normal((n_j, L - 1)) @ chol.T
            Q = np.exp(G - self._gamma[:, j][None, :])
            W[m] = Q / Q.sum(axis=1, keepdims=True)
        return W


def halfnorm_power_moment(nu: float) -> float:
    """E[max(Z, 0)^nu] for standard normal Z: 2^(nu/2 - 1) Gamma((nu+1)/2) / sqrt(pi)."""
    return float(np.exp((nu / 2.0 - 1.0) * np.log(2.0)
                        + gammaln((nu + 1.0) / 2.0) - 0.5 * np.log(np.pi)))


class ExtremalTAngular:
    """Anchor-mixture sampler for the extremal-t angular measure.

    The tilted anchor value is sqrt(2 T) with T ~ Gamma((nu+1)/2): the density
    proportional to g^nu phi(g) on g > 0. The remaining components follow the
    Gaussian conditional with mean the anchor's correlation column.
    """

    def __init__(self, dep: ExtremalT, sites: SiteSet):
        self.dep = dep
        self.sites = sites
        self.L = sites.L
        self._C = corr_matrix(dep, sites)
        from .dependence import pivoted_psd_check
        pivoted_psd_check(self._C, 1e-8 * self.L)
        self._factors: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _factor(self, j: int):
        cached = self._factors.get(j)
        if cached is None:
            rest = np.arange(self.L)[np.arange(self.L) != j]
            cj = self._C[rest, j]
            S = self._C[np.ix_(rest, rest)] - np.outer(cj, cj)
            cached = (rest, _chol_with_jitter(S))
            self._factors[j] = cached
        return cached

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        L, nu = self.L, self.dep.dof
        W = np.empty((size, L))
        if L == 1:
            W[:] = 1.0
            return W
        anchors = rng.integers(0, L, size=size)
        for j in range(L):
            m = anchors == j
            n_j = int(m.sum())
            if n_j == 0:
                continue
            rest, chol = self._factor(j)
            filled = 0
            rows = np.empty((n_j, L))
            redraws = 0
            while filled < n_j:
                k = n_j - filled
                gj = np.sqrt(2.0 * rng.gamma((nu + 1.0) / 2.0, size=k))
                G = np.empty((k, L))
                G[:, j] = gj
                G[:, rest] = gj[:, None] * self._C[rest, j][None, :] \
                    + rng.standard_normal((k, L - 1)) @ chol.T
                Q = np.maximum(G, 0.0) ** nu
                tot = Q.sum(axis=1)
                ok = tot > 0.0
                n_ok = int(ok.sum())
                rows[filled:filled + n_ok] = Q[ok] / tot[ok, None]
                filled += n_ok
                redraws += k - n_ok
                if redraws > _MAX_ZERO_REDRAWS:
                    raise NumericsError("all-zero angular draws persisted")
            W[m] = rows
        return W


def sample_W_br(dep: BrownResnick, sites: SiteSet, rng: np.random.Generator,
                size: int | None = None) -> np.ndarray:
    sampler = BrownResnickAngular(dep, sites)
    W = sampler.sample(rng, 1 if size is None else size)
    return W[0] if size is None else W


def sample_W_extremal_t(dep: ExtremalT, sites: SiteSet, rng: np.random.Generator,
                        size: int | None = None) -> np.ndarray:
    sampler = ExtremalTAngular(dep, sites)
    W = sampler.sample(rng, 1 if size is None else size)
    return W[0] if size is None else W


def angular_sampler(dep, sites: SiteSet, order=None):
    if isinstance(dep, BrownResnick):
        return BrownResnickAngular(dep, sites, order=order)
    if isinstance(dep, ExtremalT):
        return ExtremalTAngular(dep, sites)
    raise ValueError(f"no angular sampler for {type(dep).__name__}")


def linear_angular_transform(y, xi: float, A, r: RiskFunctional,
                             sites: SiteSet | None = None) -> np.ndarray:
    """Map a positive field to the angular simplex of a linear functional.

    xi != 0: w = A y^xi / ||A y^xi||_1;  xi = 0: w = exp{A log y - r(A log y)}.
    Requires r linear with r(A) = 1.
    """
    y = np.asarray(y, dtype=float).ravel()
    if np.any(y <= 0.0):
        raise ValueError("y must be strictly positive")
    A = np.broadcast_to(np.asarray(A, dtype=float), y.shape)
    if np.any(A <= 0.0):
        raise ValueError("A must be strictly positive")
    if not r.linear:
        raise ValueError("linear angular transform requires a linear functional")
    if abs(evaluate(r, A, sites) - 1.0) > 1e-10:
        raise ValueError("scale must be normalized so that r(A) = 1")
    if abs(xi) > 0.0:
        t = A * y ** xi
        return t / t.sum()
    logpart = A * np.log(y)
    return np.exp(logpart - evaluate(r, logpart, sites))

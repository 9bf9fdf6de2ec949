"""Risk functionals: scalar summaries of a field that define what "extreme" means.

Supported kinds: evaluation at a site, weighted spatial mean (integrals are
weighted sums on the discretized domain), supremum, Fourier-filtered mean
(mean times the fraction of spectral mass in the zero-frequency component),
max-composites of several risks against their thresholds, and min-compounds
over a pair of stacked fields.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .sites import SiteSet, as_values

SITE_EVAL = "site_eval"
WEIGHTED_MEAN = "weighted_mean"
SUPREMUM = "supremum"
FOURIER_FILTERED_MEAN = "fourier_filtered_mean"
MAX_COMPOSITE = "max_composite"
MIN_COMPOUND = "min_compound"


@dataclass(frozen=True, eq=False)
class RiskFunctional:
    kind: str
    site: int | None = None
    weights: np.ndarray | None = None
    grid_shape: tuple[int, int] | None = None
    members: tuple[tuple["RiskFunctional", float], ...] | None = None

    def __post_init__(self):
        if self.kind == SITE_EVAL:
            if self.site is None or self.site < 0:
                raise ValueError("site_eval requires a site index")
        elif self.kind == WEIGHTED_MEAN:
            w = np.asarray(self.weights, dtype=float).ravel()
            if np.any(w < 0.0):
                raise ValueError("weights must be non-negative")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("weights must sum to 1 within 1e-12")
            object.__setattr__(self, "weights", w)
        elif self.kind == FOURIER_FILTERED_MEAN:
            if self.grid_shape is None:
                raise ValueError("fourier_filtered_mean requires grid_shape")
        elif self.kind in (MAX_COMPOSITE, MIN_COMPOUND):
            if not self.members:
                raise ValueError(f"{self.kind} requires member functionals")
        elif self.kind != SUPREMUM:
            raise ValueError(f"unknown risk kind {self.kind!r}")

    @property
    def linear(self) -> bool:
        return self.kind in (SITE_EVAL, WEIGHTED_MEAN)

    @property
    def monotone(self) -> bool:
        if self.kind in (SITE_EVAL, WEIGHTED_MEAN, SUPREMUM):
            return True
        if self.kind in (MAX_COMPOSITE, MIN_COMPOUND):
            return all(r.monotone for r, _ in self.members)
        return False  # Fourier filter ratio is not monotone


def site_eval(site: int) -> RiskFunctional:
    return RiskFunctional(kind=SITE_EVAL, site=site)


def weighted_mean(weights) -> RiskFunctional:
    return RiskFunctional(kind=WEIGHTED_MEAN, weights=np.asarray(weights, dtype=float))


def uniform_mean(L: int) -> RiskFunctional:
    return weighted_mean(np.full(L, 1.0 / L))


def supremum() -> RiskFunctional:
    return RiskFunctional(kind=SUPREMUM)


def fourier_filtered_mean(grid_shape) -> RiskFunctional:
    return RiskFunctional(kind=FOURIER_FILTERED_MEAN, grid_shape=tuple(grid_shape))


def max_composite(members) -> RiskFunctional:
    return RiskFunctional(kind=MAX_COMPOSITE, members=tuple((r, float(u)) for r, u in members))


def min_compound(members) -> RiskFunctional:
    return RiskFunctional(kind=MIN_COMPOUND, members=tuple((r, float(u)) for r, u in members))


def _check_sites(r: RiskFunctional, L: int, sites: SiteSet | None):
    if r.kind == SITE_EVAL and r.site >= L:
        raise ValueError(f"site index {r.site} out of range for {L} sites")
    if r.kind == WEIGHTED_MEAN and r.weights.size != L:
        raise ValueError(f"weights length {r.weights.size} != {L} sites")
    if r.kind == FOURIER_FILTERED_MEAN:
        ny, nx = r.grid_shape
        if ny * nx != L:
            raise ValueError("field length does not match the functional's grid")
        if sites is not None and sites.grid_shape != (ny, nx):
            raise ValueError("fourier_filtered_mean requires a full rectangular grid")


def evaluate_rows(r: RiskFunctional, X: np.ndarray, sites: SiteSet | None = None) -> np.ndarray:
    """Evaluate the functional on each row of X (n, L); returns (n,).

    Entries at -inf with zero weight are ignored in weighted means, so the
    log-scale membership conditions stay well defined on simplex vertices.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if r.kind == MIN_COMPOUND:
        raise ValueError("min_compound operates on a pair of stacked fields; use evaluate")
    _check_sites(r, X.shape[1], sites)
    if r.kind == SITE_EVAL:
        return X[:, r.site].copy()
    if r.kind == WEIGHTED_MEAN:
        m = r.weights > 0.0
        return X[:, m] @ r.weights[m]
    if r.kind == SUPREMUM:
        return X.max(axis=1)
    if r.kind == FOURIER_FILTERED_MEAN:
        ny, nx = r.grid_shape
        xhat = np.fft.fft2(X.reshape(X.shape[0], ny, nx), axes=(1, 2))
        total = np.sqrt((np.abs(xhat) ** 2).sum(axis=(1, 2)))
        dc = np.abs(xhat[:, 0, 0])
        ratio = np.divide(dc, total, out=np.ones_like(dc), where=total > 0.0)
        return X.mean(axis=1) * ratio
    if r.kind == MAX_COMPOSITE:
        vals = np.stack([evaluate_rows(rm, X, sites) - um for rm, um in r.members])
        return vals.max(axis=0)
    raise AssertionError(r.kind)


def evaluate(r: RiskFunctional, x, sites: SiteSet | None = None) -> float:
    """Evaluate the functional on one field (or a stacked pair for min_compound)."""
    if r.kind == MIN_COMPOUND:
        rows = np.atleast_2d(np.asarray([as_values(xi) for xi in x], dtype=float))
        if rows.shape[0] != len(r.members):
            raise ValueError("min_compound expects one stacked field per member")
        return float(min(evaluate(rm, rows[i], sites) - um
                         for i, (rm, um) in enumerate(r.members)))
    return float(evaluate_rows(r, as_values(x)[None, :], sites)[0])


@dataclass(frozen=True)
class ValidityReport:
    valid: bool | None      # None: could not be decided
    reason: str

    def __bool__(self):
        if self.valid is None:
            raise ValueError("validity is unknown; inspect the report")
        return self.valid


def check_validity(r, xi: float, A, sites: SiteSet | None = None,
                   monotone: bool | None = None) -> ValidityReport:
    """Check the admissibility condition for a risk functional.

    For xi > 0 the functional must be negative at the lower support bound
    -A/xi; for xi <= 0 it must diverge to -infinity along constant fields
    -c, checked on c = 10^k, k = 1..8 (strict decrease, final value below
    -1e6). Non-monotone functionals with xi <= 0 cannot be certified by this
    probe and are reported unknown.

    ``r`` may be a RiskFunctional or a plain callable on value vectors (test
    use); callables default to monotone=True unless stated.
    """
    A = np.asarray(A, dtype=float).ravel()
    if np.any(A <= 0.0):
        raise ValueError("scale A must be strictly positive")
    if isinstance(r, RiskFunctional):
        rfun = lambda v: evaluate(r, v, sites)
        mono = r.monotone if monotone is None else monotone
    else:
        rfun = r
        mono = True if monotone is None else monotone

    if xi > 0.0:
        val = rfun(-A / xi)
        if val < 0.0:
            return ValidityReport(True, f"r(-A/xi) = {val:.6g} < 0")
        return ValidityReport(False, f"r(-A/xi) = {val:.6g} >= 0")

    if not mono:
        warnings.warn("validity unknown: non-monotone functional with xi <= 0")
        return ValidityReport(None, "non-monotone functional with xi <= 0")
    ones = np.ones_like(A)
    seq = [rfun(-(10.0 ** k) * ones) for k in range(1, 9)]
    decreasing = all(b < a for a, b in zip(seq, seq[1:]))
    if decreasing and seq[-1] < -1e6:
        return ValidityReport(True, "r(-c 1) strictly decreases below -1e6")
    return ValidityReport(False, f"divergence check failed: sequence {seq}")

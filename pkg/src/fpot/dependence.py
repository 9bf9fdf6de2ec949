"""Extremal dependence models.

Semi-variogram families on a space-time anisotropic metric, their theoretical
extremograms, and the Gaussian covariance construction for log-Gaussian
angular processes. The metric is

    ||h||  =  { ||(Omega ds - V dt)/tau_s||_2^2 + |dt/tau_t|^2 }^(1/2),

with Omega = [[cos eta, -sin eta], [a sin eta, a cos eta]] stretching one
direction by a and rotating by eta; V (km/h) advects the pattern in time.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln, kv
from scipy.stats import norm, t as student_t

from .errors import NumericsError
from .sites import SiteSet


@dataclass(frozen=True)
class SpaceTimeMetric:
    tau_s: float = 1.0      # km
    tau_t: float = 1.0      # hours
    eta: float = 0.0        # radians, in (-pi/4, pi/4]
    a: float = 1.0
    V: tuple[float, float] = (0.0, 0.0)   # km per hour

    def __post_init__(self):
        if self.tau_s <= 0 or self.tau_t <= 0 or self.a <= 0:
            raise ValueError("tau_s, tau_t and a must be positive")
        if not (-np.pi / 4 < self.eta <= np.pi / 4):
            raise ValueError("eta must lie in (-pi/4, pi/4]")

    @property
    def omega(self) -> np.ndarray:
        c, s = np.cos(self.eta), np.sin(self.eta)
        return np.array([[c, -s], [self.a * s, self.a * c]])


def metric_norm(m: SpaceTimeMetric, ds, dt) -> np.ndarray:
    """Space-time anisotropic norm; ds (..., 2) in km, dt (...) in hours."""
    ds = np.asarray(ds, dtype=float)
    dt = np.asarray(dt, dtype=float)
    moved = np.tensordot(ds, m.omega.T, axes=([-1], [0])) - dt[..., None] * np.asarray(m.V)
    spatial = (moved / m.tau_s) ** 2
    out = np.sqrt(spatial.sum(axis=-1) + (dt / m.tau_t) ** 2)
    return out if out.ndim else float(out)


def _matern_shape(h, nu):
    """2^(1-nu)/Gamma(nu) * h^nu * K_nu(h), normalized so the value at 0 is 1."""
    h = np.asarray(h, dtype=float)
    out = np.ones_like(h)
    pos = h > 0.0
    if np.any(pos):
        hp = h[pos]
        val = np.exp((1.0 - nu) * np.log(2.0) - gammaln(nu) + nu * np.log(hp)) * kv(nu, hp)
        if not np.all(np.isfinite(val)):
            raise NumericsError(f"Bessel K_nu evaluation overflowed for nu={nu}")
        out[pos] = val
    return out


@dataclass(frozen=True)
class WhittleMatern:
    """kappa * {1 - c_nu ||h||^nu K_nu(||h||)}; gamma(0) = 0, sill kappa."""

    kappa: float
    nu: float = 1.0
    metric: SpaceTimeMetric = field(default_factory=SpaceTimeMetric)

    def __post_init__(self):
        if self.kappa <= 0 or self.nu <= 0:
            raise ValueError("kappa and nu must be positive")

    def gamma(self, ds, dt=0.0):
        h = metric_norm(self.metric, ds, dt)
        return self.kappa * (1.0 - _matern_shape(h, self.nu))

    @property
    def bounded(self):
        return True


@dataclass(frozen=True)
class PowerVariogram:
    """(||h|| / tau)^nu, unbounded; nu <= 2 for validity."""

    tau: float
    nu: float
    metric: SpaceTimeMetric = field(default_factory=SpaceTimeMetric)

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 < self.nu <= 2.0:
            raise ValueError("power exponent nu must lie in (0, 2]")

    def gamma(self, ds, dt=0.0):
        h = metric_norm(self.metric, ds, dt)
        return (h / self.tau) ** self.nu

    @property
    def bounded(self):
        return False


@dataclass(frozen=True)
class PowerExponential:
    """c * [1 - exp{-(||h|| / tau)^nu}], bounded with sill c."""

    c: float
    tau: float
    nu: float
    metric: SpaceTimeMetric = field(default_factory=SpaceTimeMetric)

    def __post_init__(self):
        if self.c <= 0 or self.tau <= 0:
            raise ValueError("c and tau must be positive")
        if not 0.0 < self.nu <= 2.0:
            raise ValueError("exponent nu must lie in (0, 2]")

    def gamma(self, ds, dt=0.0):
        h = metric_norm(self.metric, ds, dt)
        return self.c * -np.expm1(-((h / self.tau) ** self.nu))

    @property
    def bounded(self):
        return True


@dataclass(frozen=True)
class ExponentialCorrelation:
    """C(h) = exp(-||h|| / range_km) on the space-time metric."""

    range_km: float
    metric: SpaceTimeMetric = field(default_factory=SpaceTimeMetric)

    def __post_init__(self):
        if self.range_km <= 0:
            raise ValueError("range must be positive")

    def corr(self, ds, dt=0.0):
        h = metric_norm(self.metric, ds, dt)
        return np.exp(-h / self.range_km)


@dataclass(frozen=True)
class BrownResnick:
    """Log-Gaussian angular process built from a semi-variogram."""

    variogram: WhittleMatern | PowerVariogram | PowerExponential

    def extremogram(self, ds, dt=0.0):
        return br_extremogram(self.variogram.gamma(ds, dt))


@dataclass(frozen=True)
class ExtremalT:
    """Angular process W proportional to max(G, 0)^dof for Gaussian G."""

    corr: ExponentialCorrelation
    dof: float

    def __post_init__(self):
        if self.dof <= 0:
            raise ValueError("dof must be positive")

    def extremogram(self, ds, dt=0.0):
        return et_extremogram(self.corr.corr(ds, dt), self.dof)


DependenceModel = BrownResnick | ExtremalT


def br_extremogram(gamma_val):
    """Pairwise extremogram of the log-Gaussian model: 2(1 - Phi(sqrt(g/2)))."""
    g = np.asarray(gamma_val, dtype=float)
    if np.any(g < 0.0):
        raise ValueError("variogram value must be non-negative")
    out = 2.0 * norm.sf(np.sqrt(g / 2.0))
    return out if out.ndim else float(out)


def et_extremogram(C, nu):
    """Pairwise extremogram of the extremal-t model.

    2(1 - t_{nu+1}[ sqrt(nu+1) sqrt((1-C)/(1+C)) ]); C = -1 gives 0 by
    continuity.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    C = np.asarray(C, dtype=float)
    if np.any(np.abs(C) > 1.0):
        raise ValueError("correlation must lie in [-1, 1]")
    with np.errstate(divide="ignore"):
        arg = np.sqrt(nu + 1.0) * np.sqrt(np.divide(1.0 - C, 1.0 + C,
                                                    out=np.full_like(C, np.inf),
                                                    where=(1.0 + C) > 0.0))
    out = 2.0 * student_t.sf(arg, df=nu + 1.0)
    return out if out.ndim else float(out)


def variogram_matrix(dep: BrownResnick, sites: SiteSet) -> np.ndarray:
    ds, dt = sites.pair_lags()
    return dep.variogram.gamma(ds, dt)


def corr_matrix(dep: ExtremalT, sites: SiteSet) -> np.ndarray:
    ds, dt = sites.pair_lags()
    return dep.corr.corr(ds, dt)


def pivoted_psd_check(S: np.ndarray, tol: float) -> None:
    """Pivoted Cholesky test; raises naming the offending pivot if not PSD."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    piv = np.arange(n)
    for k in range(n):
        j = k + int(np.argmax(np.diag(A)[k:]))
        if A[j, j] < -tol:
            raise NumericsError(
                f"matrix is not positive semi-definite: pivot {piv[j]} = {A[j, j]:.3e}")
        if A[j, j] <= tol:
            if np.any(np.diag(A)[k:] < -tol):
                bad = k + int(np.argmin(np.diag(A)[k:]))
                raise NumericsError(
                    f"matrix is not positive semi-definite: pivot {piv[bad]} = {A[bad, bad]:.3e}")
            return
        A[[k, j]] = A[[j, k]]
        A[:, [k, j]] = A[:, [j, k]]
        piv[[k, j]] = piv[[j, k]]
        d = A[k, k]
        v = A[k + 1:, k] / d
        A[k + 1:, k + 1:] -= np.outer(v, A[k + 1:, k])
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0


def gaussian_cov(dep: BrownResnick, sites: SiteSet, ref_index: int) -> np.ndarray:
    """Covariance of the increment field anchored at a reference site.

    Sigma_ij = gamma(s_i, s_ref) + gamma(s_j, s_ref) - gamma(s_i, s_j); the
    anchored row and column are zero. PSD is asserted with a pivoted
    factorization at tolerance 1e-8 * trace.
    """
    if not 0 <= ref_index < sites.L:
        raise ValueError(f"ref_index {ref_index} out of range")
    G = variogram_matrix(dep, sites)
    col = G[:, ref_index]
    S = col[:, None] + col[None, :] - G
    S[ref_index, :] = 0.0
    S[:, ref_index] = 0.0
    pivoted_psd_check(S, 1e-8 * max(np.trace(S), 1e-300))
    return S


_VARIOGRAM_KINDS = {
    "whittle_matern": (WhittleMatern, ("kappa", "nu")),
    "power": (PowerVariogram, ("tau", "nu")),
    "power_exponential": (PowerExponential, ("c", "tau", "nu")),
}

_METRIC_NAMES = ("tau_s", "tau_t", "eta", "a", "V1", "V2")

_DEFAULT_BOUNDS = {
    "kappa": (1e-6, 1e3), "nu": (1e-3, 2.0), "tau": (1e-6, 1e5), "c": (1e-6, 1e3),
    "tau_s": (1e-3, 1e5), "tau_t": (1e-3, 1e4), "eta": (-np.pi / 4 + 1e-6, np.pi / 4),
    "a": (1e-3, 1e3), "V1": (-500.0, 500.0), "V2": (-500.0, 500.0),
    "range_km": (1e-3, 1e6), "dof": (1e-2, 50.0),
}


@dataclass
class ModelFamily:
    """A parametric dependence family with a designated free-parameter vector.

    ``params`` holds the full parameter set (variogram or correlation plus
    metric entries); ``free`` names the entries exposed to the optimizer.
    """

    kind: str                      # "brown_resnick" | "extremal_t"
    params: dict
    free: tuple[str, ...]
    variogram_kind: str | None = None
    bounds: dict | None = None

    def __post_init__(self):
        self.free = tuple(self.free)
        if self.kind == "brown_resnick":
            if self.variogram_kind not in _VARIOGRAM_KINDS:
                raise ValueError(f"unknown variogram kind {self.variogram_kind!r}")
        elif self.kind != "extremal_t":
            raise ValueError(f"unknown dependence kind {self.kind!r}")
        for name in self.free:
            if name not in self.params:
                raise ValueError(f"free parameter {name!r} missing from params")

    def x0(self) -> np.ndarray:
        return np.array([self.params[n] for n in self.free], dtype=float)

    def bounds_vec(self):
        src = self.bounds or {}
        return [src.get(n, _DEFAULT_BOUNDS[n]) for n in self.free]

    def build(self, theta=None) -> DependenceModel:
        p = dict(self.params)
        if theta is not None:
            theta = np.asarray(theta, dtype=float).ravel()
            if theta.size != len(self.free):
                raise ValueError("theta length does not match free parameters")
            p.update(dict(zip(self.free, theta)))
        metric = SpaceTimeMetric(
            tau_s=p.get("tau_s", 1.0), tau_t=p.get("tau_t", 1.0),
            eta=p.get("eta", 0.0), a=p.get("a", 1.0),
            V=(p.get("V1", 0.0), p.get("V2", 0.0)))
        if self.kind == "brown_resnick":
            cls, names = _VARIOGRAM_KINDS[self.variogram_kind]
            kwargs = {n: p[n] for n in names}
            return BrownResnick(variogram=cls(metric=metric, **kwargs))
        corr = ExponentialCorrelation(range_km=p["range_km"], metric=metric)
        return ExtremalT(corr=corr, dof=p["dof"])

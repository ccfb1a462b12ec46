"""L1-penalized Cox regression with unpenalized clinical columns.

Objective (standardized coordinates ``g = beta * scale``)::

    -(1/n) * log PL(beta) + lam * sum_{penalized j} |g_j|

with Breslow handling of tied event times. Minimization is a proximal Newton
scheme: each outer step builds the exact quadratic model of the partial
likelihood and solves the lasso subproblem by cyclic coordinate descent,
followed by a backtracking line search on the true objective.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend

logger = logging.getLogger(__name__)


class DegenerateSurvivalError(ValueError):
    """No observed events; the partial likelihood is constant."""


@dataclass
class SurvivalRecord:
    subject_id: str
    time: float
    event: int
    clinical: dict = field(default_factory=dict)
    frontal: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.time) and self.time > 0):
            raise ValueError(f"{self.subject_id}: survival time must be finite and positive")
        if self.event not in (0, 1):
            raise ValueError(f"{self.subject_id}: event must be 0 or 1")


@dataclass
class DesignMatrix:
    X: np.ndarray
    names: list[str]
    roles: list[str]  # "clinical" | "frontal" | "main" | "interaction"
    subject_ids: list[str]
    terms: list[tuple[int, int] | None]  # (homology dim, component k) for FPC columns

    @property
    def penalized(self) -> np.ndarray:
        return np.array([r in ("main", "interaction") for r in self.roles])

    @property
    def shape(self):
        return self.X.shape


@dataclass
class CoxFit:
    coef: np.ndarray
    names: list[str]
    roles: list[str]
    terms: list
    lam: float
    converged: bool
    n_iter: int
    objective: float
    linear_predictor: np.ndarray

    def _by_role(self, role):
        return {self.terms[i]: float(self.coef[i]) for i, r in enumerate(self.roles) if r == role}

    @property
    def alpha(self) -> dict[str, float]:
        return {self.names[i]: float(self.coef[i]) for i, r in enumerate(self.roles)
                if r in ("clinical", "frontal")}

    @property
    def beta_main(self) -> dict:
        return self._by_role("main")

    @property
    def beta_interaction(self) -> dict:
        return self._by_role("interaction")

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "converged": self.converged,
            "n_iter": self.n_iter,
            "objective": self.objective,
            "coefficients": [
                {"name": n, "role": r, "term": list(t) if t else None, "value": float(c)}
                for n, r, t, c in zip(self.names, self.roles, self.terms, self.coef)
            ],
        }


def build_design(scores: dict[int, np.ndarray], frontal, clinical=None, clinical_names=(),
                 subject_ids=None, score_ids=None, interactions: bool = True) -> DesignMatrix:
    """Columns: clinical..., frontal, FPC main effects by (dim, k), interactions by (dim, k)."""
    frontal = np.asarray(frontal, dtype=np.float64)
    n = frontal.size
    if subject_ids is None:
        subject_ids = [str(i) for i in range(n)]
    subject_ids = [str(s) for s in subject_ids]
    if score_ids is not None and [str(s) for s in score_ids] != subject_ids:
        missing = sorted(set(map(str, score_ids)) ^ set(subject_ids))
        raise ValueError(f"score rows and records are not aligned by subject: {missing[:10]}")
    cols, names, roles, terms = [], [], [], []
    if clinical is not None:
        clinical = np.asarray(clinical, dtype=np.float64).reshape(n, -1)
        for j, name in enumerate(clinical_names):
            cols.append(clinical[:, j])
            names.append(name)
            roles.append("clinical")
            terms.append(None)
    cols.append(frontal)
    names.append("frontal")
    roles.append("frontal")
    terms.append(None)
    blocks = [("main", "eps", 1.0)]
    if interactions:
        blocks.append(("interaction", "eps_x_frontal", frontal))
    for role, prefix, mult in blocks:
        for dim in sorted(scores):
            S = np.asarray(scores[dim], dtype=np.float64).reshape(n, -1)
            for k in range(S.shape[1]):
                cols.append(S[:, k] * mult)
                names.append(f"{prefix}[{dim},{k + 1}]")
                roles.append(role)
                terms.append((dim, k + 1))
    X = np.column_stack(cols) if cols else np.zeros((n, 0))
    return DesignMatrix(X, names, roles, subject_ids, terms)


# -- partial likelihood ------------------------------------------------------

class _RiskSets:
    """Sorted-time bookkeeping shared by value, gradient, and Hessian."""

    def __init__(self, time, event):
        time = np.asarray(time, dtype=np.float64)
        event = np.asarray(event, dtype=np.float64)
        self.order = np.argsort(time, kind="stable")
        self.t = time[self.order]
        self.d = event[self.order]
        self.n = time.size
        # risk set of the k-th sorted subject starts at first[k]
        self.first = np.searchsorted(self.t, self.t, side="left")
        # subjects whose time <= t_k end at last[k]
        self.last = np.searchsorted(self.t, self.t, side="right") - 1
        self.ev = np.flatnonzero(self.d > 0)

    def log_pl(self, eta_sorted):
        shift = eta_sorted.max()
        w = np.exp(eta_sorted - shift)
        S0 = np.cumsum(w[::-1])[::-1]
        ev = self.ev
        return float(np.sum(eta_sorted[ev] - shift - np.log(S0[self.first[ev]])))


def _prep(X, time, event):
    rs = _RiskSets(time, event)
    return rs, np.asarray(X, dtype=np.float64)[rs.order]


def _derivs(rs: _RiskSets, Xs, eta, hessian=True):
    """Log partial likelihood, gradient and Hessian (all unscaled) on sorted data."""
    shift = eta.max()
    w = np.exp(eta - shift)
    S0 = np.cumsum(w[::-1])[::-1]
    S1 = np.cumsum((w[:, None] * Xs)[::-1], axis=0)[::-1]
    ev = rs.ev
    den = S0[rs.first[ev]]
    loglik = float(np.sum(eta[ev] - shift - np.log(den)))
    means = S1[rs.first[ev]] / den[:, None]
    grad = Xs[ev].sum(axis=0) - means.sum(axis=0)
    if not hessian:
        return loglik, grad, None
    # sum over events of S2/S0 collapses to X^T diag(w * c) X
    inv = np.zeros(rs.n)
    inv[ev] = 1.0 / den
    c = np.cumsum(inv)[rs.last]
    H = (Xs * (w * c)[:, None]).T @ Xs - means.T @ means
    return loglik, grad, H


def neg_log_partial_likelihood(beta, X, time, event):
    """Value and gradient of ``-(1/n) log PL`` (Breslow ties)."""
    rs, Xs = _prep(X, time, event)
    if rs.ev.size == 0:
        raise DegenerateSurvivalError("all subjects censored; partial likelihood is constant")
    eta = Xs @ np.asarray(beta, dtype=np.float64)
    ll, g, _ = _derivs(rs, Xs, eta, hessian=False)
    return -ll / rs.n, -g / rs.n


def neg_log_partial_likelihood_hessian(beta, X, time, event):
    rs, Xs = _prep(X, time, event)
    eta = Xs @ np.asarray(beta, dtype=np.float64)
    _, _, H = _derivs(rs, Xs, eta)
    return H / rs.n


def log_partial_likelihood(beta, X, time, event) -> float:
    """Unscaled log partial likelihood (used for CV deviance)."""
    rs, Xs = _prep(X, time, event)
    if rs.ev.size == 0:
        return 0.0
    return rs.log_pl(Xs @ np.asarray(beta, dtype=np.float64))


# -- solver ------------------------------------------------------------------

def _cd_quadratic(g, H, gamma, pen, lam):
    """Minimize g'd + d'Hd/2 + lam*|gamma+d|_pen by cyclic coordinate descent."""
    return _backend.cd_quadratic(np.ascontiguousarray(g, dtype=np.float64),
                                 np.ascontiguousarray(H, dtype=np.float64),
                                 np.ascontiguousarray(gamma, dtype=np.float64),
                                 np.ascontiguousarray(pen, dtype=np.uint8), float(lam))


class _Problem:
    def __init__(self, X, time, event, penalized, standardize=True):
        X = np.asarray(X, dtype=np.float64)
        self.n, self.p = X.shape
        self.pen = np.asarray(penalized, dtype=bool)
        if self.pen.size != self.p:
            raise ValueError("penalty mask length does not match the design")
        self.center = X.mean(axis=0) if self.n else np.zeros(self.p)
        scale = X.std(axis=0) if self.n else np.ones(self.p)
        # constant columns carry no information in a Cox model
        self.active = scale > 1e-12 * np.maximum(1.0, np.abs(self.center))
        self.scale = np.where(self.active, scale, 1.0)
        if not standardize:
            # penalize raw coefficients; unpenalized columns still scaled for conditioning
            self.scale = np.where(self.pen, 1.0, self.scale)
        Z = (X - self.center) / self.scale
        Z[:, ~self.active] = 0.0
        self.rs, self.Z = _prep(Z, time, event)
        if self.rs.ev.size == 0:
            raise DegenerateSurvivalError("all subjects censored; partial likelihood is constant")

    def smooth(self, gamma, hessian=True):
        eta = self.Z @ gamma
        ll, g, H = _derivs(self.rs, self.Z, eta, hessian)
        n = self.n
        return -ll / n, -g / n, (H / n if H is not None else None)

    def objective(self, gamma, lam):
        return self.smooth(gamma, hessian=False)[0] + lam * np.abs(gamma[self.pen]).sum()

    def to_beta(self, gamma):
        return np.where(self.active, gamma / self.scale, 0.0)

    def to_gamma(self, beta):
        return np.where(self.active, np.asarray(beta) * self.scale, 0.0)


def _solve(prob: _Problem, lam, gamma0, tol=1e-7, max_iter=200):
    gamma = gamma0.copy()
    gamma[~prob.active] = 0.0
    pen = prob.pen & prob.active
    fixed_zero = ~prob.active
    f, g, H = prob.smooth(gamma)
    F = f + lam * np.abs(gamma[pen]).sum()
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        Hm = H.copy()
        Hm[fixed_zero, :] = 0.0
        Hm[:, fixed_zero] = 0.0
        gm = np.where(fixed_zero, 0.0, g)
        d = _cd_quadratic(gm, Hm, gamma, pen, lam)
        pen_now = lam * np.abs(gamma[pen]).sum()
        decrease = gm @ d + lam * np.abs((gamma + d)[pen]).sum() - pen_now
        t = 1.0
        while True:
            cand = gamma + t * d
            Fc = prob.objective(cand, lam)
            if Fc <= F + 1e-4 * t * decrease or t < 1e-10:
                break
            t *= 0.5
        step = np.max(np.abs(cand - gamma)) if cand.size else 0.0
        gamma = cand
        if not np.isfinite(Fc):
            break
        F = Fc
        if step < tol:
            converged = True
            break
        f, g, H = prob.smooth(gamma)
    return gamma, converged, it, F


def _null_gamma(prob: _Problem):
    """Fit with every penalized column held at zero."""
    free = prob.active & ~prob.pen
    gamma = np.zeros(prob.p)
    if not free.any():
        return gamma, True, 0
    sub = _Problem.__new__(_Problem)
    sub.__dict__.update(prob.__dict__)
    sub.active = free
    gamma, conv, it, _ = _solve(sub, 0.0, gamma)
    return gamma, conv, it


def lambda_max(X, time, event, penalized, standardize=True) -> float:
    """Smallest lambda at which every penalized coefficient is zero."""
    prob = _Problem(X, time, event, penalized, standardize)
    return _lambda_max(prob)[0]


def _lambda_max(prob):
    gamma, conv, it = _null_gamma(prob)
    _, g, _ = prob.smooth(gamma, hessian=False)
    mask = prob.pen & prob.active
    lmax = float(np.max(np.abs(g[mask]))) if mask.any() else 0.0
    return lmax, gamma, conv, it


def lambda_path(lmax: float, n_lambda: int = 50, ratio: float = 1e-2) -> np.ndarray:
    if lmax <= 0:
        return np.zeros(1)
    return np.geomspace(lmax, lmax * ratio, n_lambda)


def fit_penalized_cox(design, time, event, lam: float, penalized=None, warm_start=None,
                      tol: float = 1e-7, max_iter: int = 200, standardize: bool = True,
                      _prob=None) -> CoxFit:
    """Penalized Cox fit at a single lambda.

    ``design`` is a :class:`DesignMatrix` or a plain array (then ``penalized``
    is required). Coefficients come back in the original column units. With
    ``standardize=False`` the penalty acts on the raw penalized coefficients
    instead of their unit-variance counterparts.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    if isinstance(design, DesignMatrix):
        X, names, roles, terms = design.X, design.names, design.roles, design.terms
        if penalized is None:
            penalized = design.penalized
    else:
        X = np.asarray(design, dtype=np.float64)
        names = [f"x{j}" for j in range(X.shape[1])]
        terms = [None] * X.shape[1]
        if penalized is None:
            penalized = np.ones(X.shape[1], dtype=bool)
        roles = ["main" if p else "clinical" for p in penalized]
    prob = _prob or _Problem(X, time, event, penalized, standardize)

    lmax, gamma_null, conv0, it0 = _lambda_max(prob)
    if lam >= lmax:
        gamma, converged, n_iter = gamma_null, conv0, it0
        F = prob.objective(gamma, lam)
    else:
        start = gamma_null if warm_start is None else prob.to_gamma(warm_start)
        gamma, converged, n_iter, F = _solve(prob, lam, start, tol, max_iter)
    if not converged:
        warnings.warn(f"Cox fit did not converge at lambda={lam:.3g} after {n_iter} iterations",
                      RuntimeWarning, stacklevel=2)
    beta = prob.to_beta(gamma)
    return CoxFit(beta, list(names), list(roles), list(terms), float(lam), bool(converged),
                  int(n_iter), float(F), np.asarray(X, dtype=np.float64) @ beta)


def fit_path(design, time, event, lambdas, penalized=None, standardize=True) -> list[CoxFit]:
    """Warm-started fits along a decreasing lambda sequence."""
    X = design.X if isinstance(design, DesignMatrix) else np.asarray(design, dtype=np.float64)
    if penalized is None:
        penalized = design.penalized if isinstance(design, DesignMatrix) else np.ones(X.shape[1], bool)
    prob = _Problem(X, time, event, penalized, standardize)
    fits, warm = [], None
    for lam in lambdas:
        fit = fit_penalized_cox(design, time, event, float(lam), penalized, warm, _prob=prob)
        fits.append(fit)
        warm = fit.coef
    return fits


def stratified_folds(event, n_folds: int, seed) -> tuple[np.ndarray, int]:
    """Fold labels stratified by event status; shrinks the fold count if needed."""
    event = np.asarray(event)
    n_events = int(event.sum())
    k = min(n_folds, event.size)
    if n_events < k:
        warnings.warn(f"only {n_events} events; reducing folds from {k} to {max(n_events, 2)}",
                      RuntimeWarning, stacklevel=2)
        k = max(n_events, 2)
    rng = np.random.default_rng(seed)
    folds = np.empty(event.size, dtype=np.int64)
    offset = 0
    for status in (1, 0):
        idx = np.flatnonzero(event == status)
        idx = idx[rng.permutation(idx.size)]
        folds[idx] = (np.arange(idx.size) + offset) % k
        offset = (offset + idx.size) % k
    return folds, k


@dataclass
class CvResult:
    lambdas: np.ndarray
    deviance: np.ndarray
    lambda_best: float
    n_folds: int


def cv_lambda(design, time, event, n_folds: int = 10, seed=0, n_lambda: int = 50,
              ratio: float = 1e-2, penalized=None, standardize: bool = True) -> CvResult:
    """Lambda minimizing the cross-validated partial-likelihood deviance.

    Fold k contributes ``-2 * (l_all(b_-k) - l_-k(b_-k))``, the part of the
    full-data log partial likelihood attributable to the held-out subjects.
    """
    X = design.X if isinstance(design, DesignMatrix) else np.asarray(design, dtype=np.float64)
    if penalized is None:
        penalized = design.penalized if isinstance(design, DesignMatrix) else np.ones(X.shape[1], bool)
    time = np.asarray(time, dtype=np.float64)
    event = np.asarray(event)
    n = time.size
    if n < n_folds:
        raise ValueError(f"need at least {n_folds} subjects for {n_folds}-fold CV")
    lmax = lambda_max(X, time, event, penalized, standardize)
    lambdas = lambda_path(lmax, n_lambda, ratio)
    folds, k = stratified_folds(event, n_folds, seed)
    dev = np.zeros(lambdas.size)
    for f in range(k):
        train = folds != f
        fits = fit_path(X[train], time[train], event[train], lambdas, penalized, standardize)
        for li, fit in enumerate(fits):
            full = log_partial_likelihood(fit.coef, X, time, event)
            part = log_partial_likelihood(fit.coef, X[train], time[train], event[train])
            dev[li] += -2.0 * (full - part)
    dev /= k
    best = int(np.argmin(dev))
    return CvResult(lambdas, dev, float(lambdas[best]), k)


def functional_coefficients(fit: CoxFit, models: dict) -> dict[int, dict[str, np.ndarray]]:
    """Coefficient surfaces ``sum_k b_k phi_k`` per homology dimension.

    Returns, per dim, ``main`` (non-frontal effect), ``interaction`` and
    ``frontal_total`` (their sum) on the model grid.
    """
    out = {}
    main, inter = fit.beta_main, fit.beta_interaction
    for dim, model in models.items():
        ks = sorted(k for (d, k) in main if d == dim)
        if len(ks) != model.rank:
            raise ValueError(f"dim {dim}: fit has {len(ks)} components, model rank {model.rank}")
        phi = model.basis
        b = np.array([main[(dim, k)] for k in range(1, model.rank + 1)])
        bf = np.array([inter.get((dim, k), 0.0) for k in range(1, model.rank + 1)])
        m = np.tensordot(b, phi, axes=1) if model.rank else np.zeros(model.grid.shape)
        f = np.tensordot(bf, phi, axes=1) if model.rank else np.zeros(model.grid.shape)
        out[dim] = {"main": m, "interaction": f, "frontal_total": m + f}
    return out


def risk_score(fit: CoxFit, row) -> float:
    """Linear predictor (log relative hazard) of one design row."""
    return float(np.asarray(row, dtype=np.float64) @ fit.coef)

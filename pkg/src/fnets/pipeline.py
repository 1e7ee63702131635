"""End-to-end estimation flow behind a single call.

fnets_estimate resolves every unset tunable in a fixed order (bandwidth,
factor numbers, penalty and VAR order, eta, thresholds), runs the factor
adjustment, the sparse VAR fit and both precision estimates, and bundles
the three networks with the fully resolved configuration so the run can
be reproduced bit for bit. fnets_forecast layers the common and
idiosyncratic predictors on top of a fit.
"""

from __future__ import annotations

import dataclasses
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .factors import FactorCounts, default_factor_cap, estimate_q, estimate_r
from .forecasting import (
    DEFAULT_PERMUTATIONS,
    DEFAULT_TRUNCATION,
    ForecastResult,
    assemble_forecast,
    fit_block_var,
    idio_forecast,
    restricted_common_forecast,
    unrestricted_common_forecast,
)
from .networks import NetworkSet
from .panel import RunConfig, TimeSeriesPanel
from .precision import (
    LongRunEstimate,
    PrecisionEstimate,
    contemporaneous_network,
    estimate_delta,
    innovation_cov,
    longrun_matrix,
    longrun_network,
)
from .spectral import (
    AcvSet,
    DynamicPcaResult,
    common_acv,
    default_bandwidth,
    dynamic_pca,
    idio_acv,
    sample_acv,
    spectral_density,
    windowed_acv,
)
from .tuning import (
    CvGrid,
    cv_folds,
    cv_select_eta,
    cv_select_lambda_d,
    default_eta_grid,
    default_lambda_grid,
    segment_idio_acv,
    select_threshold,
)
from .var import (
    VarEstimate,
    build_yw,
    estimate_beta,
    granger_network,
    threshold_matrix,
)

D_CANDIDATES = (1, 2, 3, 4, 5)
DEFAULT_S_MAX = 5


@dataclass(frozen=True)
class FnetsFit:
    """Everything produced by one estimation run.

    The stored autocovariances, estimates and resolved configuration are
    sufficient to recompute the networks bit-identically.
    """

    acv_x: AcvSet
    acv_chi: AcvSet
    acv_xi: AcvSet
    pca: DynamicPcaResult
    factors: FactorCounts
    var: VarEstimate
    precision: PrecisionEstimate
    longrun: LongRunEstimate
    networks: NetworkSet
    config: RunConfig

    @property
    def p(self) -> int:
        return self.acv_x.p

    def manifest(self) -> dict:
        """Resolved parameters as a JSON-ready mapping."""
        return {
            "config": dataclasses.asdict(self.config),
            "p": self.p,
            "factor_method": {
                "q": self.factors.q_method,
                "r": self.factors.r_method,
            },
        }


@contextmanager
def _stage(name: str):
    """Tag any stage failure with the stage name, keeping the type."""
    try:
        yield
    except Exception as exc:
        exc.args = (f"{name} stage: {exc}",)
        raise


def _offdiag(mat: np.ndarray) -> np.ndarray:
    out = mat.copy()
    np.fill_diagonal(out, 0.0)
    return out


def feasible_orders(panel: TimeSeriesPanel, folds: int) -> list[int]:
    """Default VAR-order candidates that every CV segment can support."""
    cap = max(D_CANDIDATES)
    for tr, te in cv_folds(panel.n, folds):
        train_len = tr.stop - tr.start
        cap = min(cap, (train_len - 1) // panel.p)
        for sl in (tr, te):
            cap = min(cap, default_bandwidth(sl.stop - sl.start))
    return [d for d in D_CANDIDATES if d <= cap]


def cv_train_ratio(n: int, folds: int) -> float:
    """Mean train-segment length of the CV folds relative to n."""
    lengths = [tr.stop - tr.start for tr, _ in cv_folds(n, folds)]
    return float(np.mean(lengths)) / n


def _resolve_lambda_d(
    panel: TimeSeriesPanel,
    q: int,
    m: int,
    acv_xi: AcvSet,
    config: RunConfig,
) -> tuple[float, int]:
    """Resolve (lambda, d), cross-validating whichever is unset.

    The CV trains on half-length segments, so the selected penalty is
    matched to a smaller estimation sample than the final fit; it is
    rescaled by sqrt(train length / n) for the full-sample refit,
    following the sqrt(log p / n) scaling of the penalty level.
    """
    if config.lam is not None and config.d is not None:
        return config.lam, config.d
    if config.d is not None:
        orders = [config.d]
    else:
        orders = feasible_orders(panel, config.cv_folds)
        if not orders:
            raise ValueError(
                "no VAR order candidate fits the cross-validation "
                "segments; set d (and lam) explicitly"
            )
    if config.lam is not None:
        lambdas = np.array([config.lam])
    else:
        d_max = max(orders)
        if acv_xi.maxlag < d_max:
            raise ValueError(
                f"bandwidth {acv_xi.maxlag} below candidate order {d_max}"
            )
        ghat_full = np.vstack([acv_xi.lag(ell) for ell in range(1, d_max + 1)])
        lambdas = default_lambda_grid(ghat_full)
    grid = CvGrid(lambdas=lambdas, orders=tuple(orders), folds=config.cv_folds)
    lam, d, _ = cv_select_lambda_d(panel, q, m, grid, solver=config.solver)
    if config.lam is None:
        lam *= np.sqrt(cv_train_ratio(panel.n, config.cv_folds))
    return lam, d


def innovation_cv_pairs(
    panel: TimeSeriesPanel,
    q: int,
    d: int,
    lam: float,
    solver: str,
    folds: int,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-fold (train, test) innovation covariances for the eta CV.

    Each segment gets its own factor adjustment and VAR fit at the
    already-selected (lambda, d), so the compared covariances are both
    full-pipeline outputs.
    """
    pairs = []
    for l, (tr, te) in enumerate(cv_folds(panel.n, folds), start=1):
        covs = []
        for sl, role in ((tr, "train"), (te, "test")):
            acv_seg = segment_idio_acv(panel, sl, q, l, role)
            if acv_seg.maxlag < d:
                raise ValueError(
                    f"fold {l} {role} segment bandwidth {acv_seg.maxlag} "
                    f"below VAR order {d}; set eta explicitly"
                )
            est_seg = estimate_beta(build_yw(acv_seg, d), lam, solver=solver)
            covs.append(innovation_cov(acv_seg, est_seg))
        pairs.append((covs[0], covs[1]))
    return pairs


def _resolve_eta(
    panel: TimeSeriesPanel,
    q: int,
    d: int,
    lam: float,
    config: RunConfig,
    gamma_hat: np.ndarray,
) -> float:
    if config.eta is not None:
        return config.eta
    pairs = innovation_cv_pairs(
        panel, q, d, lam, config.solver, config.cv_folds
    )
    eta, _ = cv_select_eta(pairs, default_eta_grid(gamma_hat))
    return eta


def fnets_estimate(panel: TimeSeriesPanel, config: RunConfig) -> FnetsFit:
    """Run factor adjustment, sparse VAR and precision estimation.

    Unset tunables resolve in dependency order m, (q, r), (lambda, d),
    eta, thresholds; each consumes the stages before it. With q = 0 the
    adjustment step is a no-op up to the Bartlett weights and r defaults
    to 0 as well.
    """
    config.validate_against(panel)
    labels = panel.labels
    with _stage("spectral"):
        m = config.m if config.m is not None else default_bandwidth(panel.n)
        acv_raw = sample_acv(panel, m)
        spec = spectral_density(acv_raw, m)
    with _stage("factors"):
        cap = default_factor_cap(panel.p)
        if config.q is not None:
            q = config.q
            q_method = "user"
        else:
            q = estimate_q(spec, cap)
            q_method = "eigen_ratio"
        if config.r is not None:
            r = config.r
            r_method = "user"
        elif q == 0:
            r = 0
            r_method = "user"
        else:
            r = estimate_r(acv_raw, cap)
            r_method = "eigen_ratio"
        factors = FactorCounts(q=q, r=r, q_method=q_method, r_method=r_method)
    with _stage("spectral"):
        pca = dynamic_pca(spec, q)
        acv_chi = common_acv(pca, m)
        acv_x = windowed_acv(acv_raw, m)
        acv_xi = idio_acv(acv_x, acv_chi)
    with _stage("tuning"):
        lam, d = _resolve_lambda_d(panel, q, m, acv_xi, config)
    with _stage("var"):
        if acv_xi.maxlag < d:
            raise ValueError(f"bandwidth {m} below VAR order {d}")
        yw = build_yw(acv_xi, d)
        var_est = estimate_beta(yw, lam, solver=config.solver)
        t_beta = (
            config.threshold_beta
            if config.threshold_beta is not None
            else select_threshold(var_est.beta)
        )
    with _stage("precision"):
        gamma_hat = innovation_cov(acv_xi, var_est)
        eta = _resolve_eta(panel, q, d, lam, config, gamma_hat)
        prec = estimate_delta(gamma_hat, eta)
        t_delta = (
            config.threshold_delta
            if config.threshold_delta is not None
            else select_threshold(_offdiag(prec.delta_hat))
        )
    with _stage("longrun"):
        lr = longrun_matrix(var_est, t_beta, prec.delta_hat)
        t_omega = (
            config.threshold_omega
            if config.threshold_omega is not None
            else select_threshold(_offdiag(lr.omega_hat))
        )
    with _stage("networks"):
        nets = NetworkSet(
            granger=granger_network(var_est, t_beta, labels),
            contemporaneous=contemporaneous_network(
                prec.delta_hat, t_delta, labels
            ),
            longrun=longrun_network(lr, t_omega, labels),
            thresholds={"beta": t_beta, "delta": t_delta, "omega": t_omega},
        )
    resolved = dataclasses.replace(
        config,
        q=q,
        r=r,
        d=d,
        m=m,
        lam=lam,
        eta=eta,
        threshold_beta=t_beta,
        threshold_delta=t_delta,
        threshold_omega=t_omega,
    )
    return FnetsFit(
        acv_x=acv_x,
        acv_chi=acv_chi,
        acv_xi=acv_xi,
        pca=pca,
        factors=factors,
        var=var_est,
        precision=prec,
        longrun=lr,
        networks=nets,
        config=resolved,
    )


def fnets_forecast(
    fit: FnetsFit,
    panel: TimeSeriesPanel,
    a: int,
    method: str = "restricted",
    K: int = DEFAULT_TRUNCATION,
    n_perm: int = DEFAULT_PERMUTATIONS,
    thresholded: bool = False,
) -> ForecastResult:
    """Forecast X_{n+1..n+a} as common plus idiosyncratic parts.

    The common part uses the static eigen-projection (restricted) or the
    blockwise dynamic expansion (unrestricted); the idiosyncratic VAR
    recursion starts from xi = X - chi_insample of the same method. Set
    thresholded to run the recursion on the thresholded coefficients.
    """
    if method not in ("restricted", "unrestricted"):
        raise ValueError(f"unknown method {method!r}")
    if a < 1:
        raise ValueError("horizon must be >= 1")
    q, r = fit.config.q, fit.config.r
    with _stage("common forecast"):
        if method == "restricted":
            chi_fc, insample = restricted_common_forecast(
                panel, fit.acv_chi, r, a
            )
        else:
            if q == 0:
                chi_fc = np.zeros((a, panel.p))
                insample = np.zeros((panel.p, panel.n))
            else:
                s_max = min(DEFAULT_S_MAX, fit.acv_chi.maxlag)
                model = fit_block_var(fit.acv_chi, q, s_max, panel.n)
                chi_fc, insample = unrestricted_common_forecast(
                    panel,
                    model,
                    q,
                    a,
                    K=K,
                    n_perm=n_perm,
                    seed=fit.config.seed,
                )
    with _stage("idio forecast"):
        var_est = fit.var
        if thresholded:
            var_est = VarEstimate(
                beta=threshold_matrix(
                    fit.var.beta, fit.networks.thresholds["beta"]
                ),
                d=fit.var.d,
                lam=fit.var.lam,
                solver=fit.var.solver,
                reports=fit.var.reports,
            )
        xi_insample = panel.values - insample
        xi_fc = idio_forecast(var_est, xi_insample, a)
    return assemble_forecast(chi_fc, xi_fc, insample, method)

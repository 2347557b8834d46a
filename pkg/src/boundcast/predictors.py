"""Point forecasters over a DesignSet.

The combined predictor balances the sparse worst-case weights against the
dense variance-minimizing weights through the radius gamma; the baselines
are Nadaraya-Watson and local linear smoothers under three kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DesignSet,
    Embedding,
    HyperParams,
    RegressorSpec,
    TimeSeries,
    apply_regressor,
    build_design,
    build_embeddings,
    embedding_distances,
    weight_diagonal,
)
from .errors import AllWeightsZero, DimensionMismatch, SeriesTooShort
from .solvers import SolveResult, solve_combined_path, solve_weighted_ls

KERNEL_KINDS = ("epanechnikov", "gaussian", "tricube")

#: benchmark model ids; numeric suffix picks the kernel in KERNEL_KINDS order
MODEL_KERNELS = {
    "NW1": "epanechnikov", "NW2": "gaussian", "NW3": "tricube",
    "LL1": "epanechnikov", "LL2": "gaussian", "LL3": "tricube",
}
MODEL_IDS = ("CP", "LL1", "LL2", "LL3", "NW1", "NW2", "NW3")


@dataclass(frozen=True)
class KernelKind:
    kind: str
    bandwidth: float

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DimensionMismatch(f"unknown kernel {self.kind!r}")
        if not self.bandwidth > 0:
            raise DimensionMismatch("bandwidth must be > 0")


@dataclass(frozen=True)
class Forecast:
    """A point forecast, the linear weights that produced it, and (for the
    combined predictor) the worst-case error bound attached to them."""

    value: float
    psi: np.ndarray
    error_bound: float | None = None
    status: str = "optimal"
    solve: SolveResult | None = None


def kernel_weight(v_i, kind: str):
    """Kernel value at scaled distance v_i >= 0; vectorized over arrays."""
    v = np.asarray(v_i, dtype=float)
    if kind == "epanechnikov":
        out = np.where(np.abs(v) <= 1.0, 1.0 - v ** 2, 0.0)
    elif kind == "gaussian":
        out = np.exp(-0.5 * v ** 2)
    elif kind == "tricube":
        out = np.where(np.abs(v) <= 1.0, (1.0 - np.abs(v) ** 3) ** 3, 0.0)
    else:
        raise DimensionMismatch(f"unknown kernel {kind!r}")
    return float(out) if np.isscalar(v_i) else out


def _nearest_neighbor(design: DesignSet, dist: np.ndarray) -> Forecast:
    j = int(np.argmin(dist))
    psi = np.zeros(design.v)
    psi[j] = 1.0
    return Forecast(float(design.b_y[j]), psi, status="nearest-neighbor-fallback")


def predict_nw(design: DesignSet, z_k: Embedding, kernel: KernelKind,
               fallback: bool = True) -> Forecast:
    """Kernel-weighted average of the stored targets."""
    dist = embedding_distances(design, z_k)
    weights = kernel_weight(dist / kernel.bandwidth, kernel.kind)
    total = float(weights.sum())
    if total <= 0.0:
        if not fallback:
            raise AllWeightsZero(
                f"bandwidth {kernel.bandwidth} leaves no point in the kernel support"
            )
        return _nearest_neighbor(design, dist)
    psi = weights / total
    return Forecast(float(psi @ design.b_y), psi)


def predict_ll(design: DesignSet, z_k: Embedding, kernel: KernelKind,
               fallback: bool = True) -> Forecast:
    """Kernel-weighted affine fit on the embeddings, evaluated at the query.

    A singular weighted normal system falls back to a small ridge term and
    is reported as degenerate-regularized.
    """
    dist = embedding_distances(design, z_k)
    weights = kernel_weight(dist / kernel.bandwidth, kernel.kind)
    if float(weights.sum()) <= 0.0:
        if not fallback:
            raise AllWeightsZero(
                f"bandwidth {kernel.bandwidth} leaves no point in the kernel support"
            )
        return _nearest_neighbor(design, dist)
    X = np.hstack([design.Z, np.ones((design.v, 1))])
    xk = np.concatenate([z_k.vector, [1.0]])
    G = X.T @ (weights[:, None] * X)
    status = "optimal"
    u = None
    try:
        u = np.linalg.solve(G, xk)
        if not np.all(np.isfinite(u)) or \
                np.max(np.abs(G @ u - xk)) > 1e-6 * (1.0 + np.max(np.abs(xk))):
            u = None
    except np.linalg.LinAlgError:
        pass
    if u is None:
        G = G + 1e-8 * np.eye(G.shape[0])
        u = np.linalg.solve(G, xk)
        status = "degenerate-regularized"
    psi = weights * (X @ u)
    return Forecast(float(psi @ design.b_y), psi, status=status)


def _cp_bound(psi: np.ndarray, w_raw: np.ndarray, sigma: float) -> float:
    return float(np.abs(psi) @ w_raw + sigma)


def cp_forecast_path(design: DesignSet, z_k: Embedding, hp: HyperParams,
                     gammas) -> list[Forecast]:
    """Combined-predictor forecasts for every radius in one solver pass."""
    w_raw = weight_diagonal(design, z_k, hp.sigma, hp.l_const)
    r_k = apply_regressor(z_k, design.spec)
    psi_s = solve_weighted_ls(design.A, w_raw, r_k).psi
    results = solve_combined_path(design.A, w_raw, r_k, psi_s, gammas)
    return [
        Forecast(float(res.psi @ design.b_y), res.psi,
                 error_bound=_cp_bound(res.psi, w_raw, hp.sigma),
                 status=res.status, solve=res)
        for res in results
    ]


def predict_cp(design: DesignSet, z_k: Embedding, hp: HyperParams) -> Forecast:
    """The proposed predictor at radius hp.gamma, with its error bound."""
    return cp_forecast_path(design, z_k, hp, [hp.gamma])[0]


def _design_spec_for(method: str, hp: HyperParams) -> RegressorSpec:
    if method == "CP":
        return hp.regressor
    if method.startswith("LL"):
        return RegressorSpec("affine", hp.order_p)
    return RegressorSpec("constant", hp.order_p)


def predict_horizon(series: TimeSeries, hp: HyperParams, method: str,
                    kernel: KernelKind | None = None) -> Forecast:
    """Forecast the value hp.horizon steps past the end of the series.

    Builds the horizon-shifted design from the whole series (direct
    multi-step strategy) and queries it at the latest embedding.
    """
    p, h = hp.order_p, hp.horizon
    if len(series) < p + h + 1:
        raise SeriesTooShort(
            f"need at least {p + h + 1} observations for order {p}, horizon {h}"
        )
    spec = _design_spec_for(method, hp)
    design = build_design(build_embeddings(series, p, h), spec, horizon=h)
    z_k = Embedding(series.values[-p:][::-1],
                    series.origin_index + len(series) - 1)
    if method == "CP":
        return predict_cp(design, z_k, hp)
    if method in MODEL_KERNELS:
        if kernel is None:
            raise DimensionMismatch(f"model {method} needs a kernel bandwidth")
        kind = KernelKind(MODEL_KERNELS[method], kernel.bandwidth)
        if method.startswith("NW"):
            return predict_nw(design, z_k, kind)
        return predict_ll(design, z_k, kind)
    raise DimensionMismatch(f"unknown model id {method!r}")

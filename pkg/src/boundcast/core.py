"""Data model for the bounded-error predictor.

Embeddings stack the most recent observations newest-first; a regressor
generator maps each embedding to a feature vector; stacking those features
over the training window gives the design matrix used by every solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InsufficientData, SeriesTooShort

REGRESSOR_KINDS = ("constant", "autoregressive", "affine", "custom")


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real-valued observations plus the global index of the first one."""

    values: np.ndarray
    origin_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DimensionMismatch("series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise DimensionMismatch("series contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Embedding:
    """The p most recent values at some anchor, ordered newest-first."""

    vector: np.ndarray
    anchor_index: int

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=float)
        if vector.ndim != 1 or vector.size == 0:
            raise DimensionMismatch("embedding must be a non-empty vector")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)

    @property
    def order(self) -> int:
        return self.vector.size


@dataclass(frozen=True)
class RegressorSpec:
    """Feature map from embeddings to regressor vectors.

    Kinds:
      constant        -> [1]
      autoregressive  -> the embedding itself
      affine          -> embedding plus intercept term
      custom          -> product terms; each term is a tuple of embedding
                         indices whose values are multiplied (repeats give
                         powers, the empty tuple gives a constant 1)
    """

    kind: str = "autoregressive"
    order: int = 0
    terms: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            raise DimensionMismatch(f"unknown regressor kind {self.kind!r}")
        if self.kind == "custom":
            if not self.terms:
                raise DimensionMismatch("custom regressor needs at least one term")
            for term in self.terms:
                for idx in term:
                    if not 0 <= idx < self.order:
                        raise DimensionMismatch(
                            f"custom term index {idx} outside embedding order {self.order}"
                        )
        elif self.order < 1:
            raise DimensionMismatch("regressor order must be >= 1")

    @property
    def output_dim(self) -> int:
        if self.kind == "constant":
            return 1
        if self.kind == "autoregressive":
            return self.order
        if self.kind == "affine":
            return self.order + 1
        return len(self.terms)


def apply_regressor(z: Embedding, spec: RegressorSpec) -> np.ndarray:
    """Evaluate the regressor generator at one embedding."""
    vec = z.vector
    if spec.kind != "constant" and vec.size != spec.order:
        raise DimensionMismatch(
            f"embedding has order {vec.size}, regressor expects {spec.order}"
        )
    if spec.kind == "constant":
        return np.ones(1)
    if spec.kind == "autoregressive":
        return vec.copy()
    if spec.kind == "affine":
        return np.concatenate([vec, [1.0]])
    out = np.empty(len(spec.terms))
    for i, term in enumerate(spec.terms):
        prod = 1.0
        for idx in term:
            prod *= vec[idx]
        out[i] = prod
    return out


@dataclass(frozen=True)
class DesignSet:
    """Stacked regressors, aligned targets, and the embeddings behind them.

    Row j of ``A`` is the regressor of embedding j; ``b_y[j]`` is the value
    observed ``horizon`` steps after that embedding's anchor.
    """

    A: np.ndarray
    b_y: np.ndarray
    Z: np.ndarray              # v x p matrix of embedding vectors, newest-first
    anchors: np.ndarray        # global index of each embedding's newest value
    spec: RegressorSpec
    horizon: int = 1

    def __post_init__(self):
        for name in ("A", "b_y", "Z", "anchors"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def v(self) -> int:
        return self.b_y.size

    def embedding(self, j: int) -> Embedding:
        return Embedding(self.Z[j], int(self.anchors[j]))

    def drop_row(self, j: int) -> "DesignSet":
        """New design with training pair j removed (leave-one-out folds)."""
        keep = np.arange(self.v) != j
        return DesignSet(self.A[keep], self.b_y[keep], self.Z[keep],
                         self.anchors[keep], self.spec, self.horizon)


@dataclass(frozen=True)
class HyperParams:
    """Solver settings: noise floor sigma, locality constant, balance radius."""

    sigma: float = 0.0
    l_const: float = 1.0
    gamma: float = 0.0
    order_p: int = 12
    regressor: RegressorSpec = field(default_factory=lambda: RegressorSpec("autoregressive", 12))
    horizon: int = 1

    def __post_init__(self):
        if self.sigma < 0 or self.l_const < 0 or self.gamma < 0:
            raise DimensionMismatch("sigma, l_const and gamma must be >= 0")
        if self.order_p < 1 or self.horizon < 1:
            raise DimensionMismatch("order and horizon must be >= 1")


def build_embeddings(series: TimeSeries, p: int, h: int) -> list[tuple[Embedding, float]]:
    """All (embedding, target) pairs the series supports for order p, horizon h.

    Pair j couples the embedding anchored at local index p-1+j with the value
    h steps later; there are len(series) - p - h + 1 of them.
    """
    n = len(series)
    if n < p + h:
        raise SeriesTooShort(f"need at least {p + h} observations, have {n}")
    values = series.values
    pairs = []
    for j in range(n - p - h + 1):
        anchor = p - 1 + j
        window = values[j:anchor + 1][::-1]
        pairs.append((Embedding(window, series.origin_index + anchor),
                      float(values[anchor + h])))
    return pairs


def build_design(pairs: list[tuple[Embedding, float]], spec: RegressorSpec,
                 horizon: int = 1) -> DesignSet:
    """Stack regressors and targets into a DesignSet; requires v >= n_r rows."""
    n_r = spec.output_dim
    if len(pairs) < n_r:
        raise InsufficientData(
            f"{len(pairs)} training pairs but regressor dimension is {n_r}"
        )
    A = np.vstack([apply_regressor(z, spec) for z, _ in pairs])
    b_y = np.array([y for _, y in pairs])
    Z = np.vstack([z.vector for z, _ in pairs])
    anchors = np.array([z.anchor_index for z, _ in pairs], dtype=int)
    return DesignSet(A, b_y, Z, anchors, spec, horizon)


def embedding_distances(design: DesignSet, z_k: Embedding) -> np.ndarray:
    """Euclidean distance from every stored embedding to the query."""
    if design.Z.shape[1] != z_k.order:
        raise DimensionMismatch(
            f"design embeddings have order {design.Z.shape[1]}, query has {z_k.order}"
        )
    return np.linalg.norm(design.Z - z_k.vector, axis=1)


def weight_diagonal(design: DesignSet, z_k: Embedding,
                    sigma: float, l_const: float) -> np.ndarray:
    """Diagonal of the bound matrix: sigma + L * distance(embedding_j, query)."""
    return sigma + l_const * embedding_distances(design, z_k)


def regularization_floor(w_diag: np.ndarray) -> float:
    """Uniform additive floor keeping the weight diagonal invertible."""
    top = float(np.max(w_diag)) if w_diag.size else 0.0
    return 1e-12 * (1.0 + top)

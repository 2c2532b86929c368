"""C-SVC training via SMO plus one-vs-one multiclass composition.

Binary machines solve the standard dual
    min 0.5 a'Qa - e'a,  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j)
with maximal-violating-pair working-set selection. The multiclass model
holds one machine per unordered label pair and predicts by majority vote,
breaking vote ties by the summed |decision value| of the machines that voted
for each tied label, then by label order.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import _core
from .dataset import LABEL_ORDER, EmotionLabel, parse_label
from .features import CATALOG_VERSION, FeatureMatrix, FeatureNormalization, FeatureVector, normalize_vector
from .kernels import KernelSpec, gram

MODEL_FORMAT_VERSION = 1


@dataclass
class TrainConfig:
    """Hyperparameters shared by every binary machine."""

    c: float = 1.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    tolerance: float = 1e-3
    max_passes: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0:
            raise ValueError(f"c must be positive and finite, got {self.c}")
        if not np.isfinite(self.tolerance) or self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes}")


@dataclass
class BinarySvmModel:
    """One trained two-class machine: support expansion f(x) = sum coef K + b."""

    support_vectors: np.ndarray
    dual_coef: np.ndarray
    bias: float
    kernel: KernelSpec
    label_pair: tuple | None = None
    iterations: int = 0
    converged: bool = True
    final_violation: float = 0.0
    objective_trace: np.ndarray | None = None  # training-time diagnostic, not serialized

    def __post_init__(self):
        self.support_vectors = np.asarray(self.support_vectors, dtype=np.float64)
        self.dual_coef = np.asarray(self.dual_coef, dtype=np.float64)
        if self.support_vectors.ndim != 2:
            raise ValueError(f"support_vectors must be 2-D, got {self.support_vectors.shape}")
        if self.dual_coef.shape != (self.support_vectors.shape[0],):
            raise ValueError("one dual coefficient per support vector required")
        self.kernel.require_resolved()

    @property
    def n_support(self) -> int:
        return self.support_vectors.shape[0]


def kkt_violation(K: np.ndarray, y: np.ndarray, alpha: np.ndarray, C: float) -> float:
    """Maximal-violating-pair gap m - M for a candidate dual solution.

    Non-positive (or below tolerance) means the KKT conditions hold. Returns
    0.0 when either index set is empty.
    """
    y = np.asarray(y, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    Q = K * np.outer(y, y)
    G = Q @ alpha - 1.0
    v = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    if not up.any() or not low.any():
        return 0.0
    return float(v[up].max() - v[low].min())


def train_binary(X: np.ndarray, y: np.ndarray, config: TrainConfig,
                 label_pair: tuple | None = None,
                 backend: str | None = None) -> BinarySvmModel:
    """Fit one two-class machine on rows X with labels y in {-1, +1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y shape {y.shape} does not match {X.shape[0]} rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("y must contain only -1 and +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("both classes must be present")

    spec = config.kernel.resolved(X.shape[1])
    K = gram(spec, X)
    Q = K * np.outer(y, y)
    tiebreak = np.random.default_rng(config.seed).random(y.size)
    solver = _core.get_solver(backend)
    alpha, G, iterations, converged, trace = solver(
        Q, y, config.c, config.tolerance, config.max_passes, tiebreak
    )

    v = -y * G
    up = ((y > 0) & (alpha < config.c)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < config.c)) | ((y > 0) & (alpha > 0))
    violation = float(v[up].max() - v[low].min()) if up.any() and low.any() else 0.0
    free = (alpha > 0) & (alpha < config.c)
    if free.any():
        bias = float((-y * G)[free].mean())
    elif up.any() and low.any():
        bias = float((v[up].max() + v[low].min()) / 2.0)
    else:
        bias = 0.0

    support = alpha > 0
    return BinarySvmModel(
        support_vectors=X[support],
        dual_coef=(alpha * y)[support],
        bias=bias,
        kernel=spec,
        label_pair=label_pair,
        iterations=int(iterations),
        converged=bool(converged),
        final_violation=violation,
        objective_trace=np.asarray(trace),
    )


def decision_values(model: BinarySvmModel, X: np.ndarray) -> np.ndarray:
    """f(x) for each row of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if model.n_support == 0:
        return np.full(X.shape[0], model.bias)
    return gram(model.kernel, X, model.support_vectors) @ model.dual_coef + model.bias


def decision_value(model: BinarySvmModel, x: np.ndarray) -> float:
    return float(decision_values(model, np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass
class MulticlassSvmModel:
    """One-vs-one ensemble over the labels seen at training time.

    feature_indices are 1-based catalog columns the machines were trained
    on; normalization, when present, applies to the full catalog row before
    the column restriction.
    """

    machines: list
    label_order: tuple
    feature_indices: tuple
    normalization: FeatureNormalization | None = None
    config: TrainConfig = field(default_factory=TrainConfig)
    catalog_version: int = CATALOG_VERSION

    def __post_init__(self):
        self.label_order = tuple(self.label_order)
        self.feature_indices = tuple(int(i) for i in self.feature_indices)
        if len(self.label_order) < 2:
            raise ValueError("multiclass model needs at least 2 labels")
        expected = len(self.label_order) * (len(self.label_order) - 1) // 2
        if len(self.machines) != expected:
            raise ValueError(
                f"{len(self.machines)} machines for {len(self.label_order)} labels "
                f"(expected {expected})"
            )


def train_multiclass(matrix: FeatureMatrix, config: TrainConfig,
                     feature_indices=None,
                     normalization: FeatureNormalization | None = None,
                     backend: str | None = None) -> MulticlassSvmModel:
    """Train all pairwise machines on an already restricted/normalized table.

    matrix columns must correspond to feature_indices (defaults to the
    identity 1..n_features). normalization is carried as metadata so
    prediction can reproduce the training-time scaling from raw rows.
    """
    if feature_indices is None:
        feature_indices = tuple(range(1, matrix.n_features + 1))
    feature_indices = tuple(int(i) for i in feature_indices)
    if len(feature_indices) != matrix.n_features:
        raise ValueError(
            f"{len(feature_indices)} feature indices for {matrix.n_features} columns"
        )
    labels = matrix.labels
    if any(lab is None for lab in labels):
        raise ValueError("training rows must all carry labels")
    present = [lab for lab in LABEL_ORDER if lab in labels]
    if len(present) < 2:
        raise ValueError(f"need at least 2 distinct labels, got {len(present)}")

    machines = []
    lab_arr = np.array([present.index(lab) for lab in labels])
    for a in range(len(present)):
        for b in range(a + 1, len(present)):
            rows = np.flatnonzero((lab_arr == a) | (lab_arr == b))
            y = np.where(lab_arr[rows] == a, 1.0, -1.0)
            machines.append(
                train_binary(
                    matrix.values[rows], y, config,
                    label_pair=(present[a], present[b]),
                    backend=backend,
                )
            )
    return MulticlassSvmModel(
        machines=machines,
        label_order=tuple(present),
        feature_indices=feature_indices,
        normalization=normalization,
        config=config,
        catalog_version=matrix.catalog_version,
    )


def _prepare_rows(model: MulticlassSvmModel, values: np.ndarray) -> np.ndarray:
    """Normalize (if fitted) then restrict raw catalog rows to model columns."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected 2-D rows, got shape {values.shape}")
    cols = [i - 1 for i in model.feature_indices]
    if model.normalization is not None:
        if values.shape[1] != model.normalization.n_features:
            raise ValueError(
                f"rows have {values.shape[1]} columns, normalization expects "
                f"{model.normalization.n_features}"
            )
        values = np.stack([normalize_vector(row, model.normalization) for row in values])
        return values[:, cols]
    if values.shape[1] == len(cols):
        # already restricted to the model's columns
        return values
    if max(cols) < values.shape[1]:
        return values[:, cols]
    raise ValueError(
        f"rows have {values.shape[1]} columns, model needs catalog indices "
        f"up to {max(cols) + 1}"
    )


def predict_batch(model: MulticlassSvmModel, values: np.ndarray) -> list:
    """Predict a label per raw catalog row (or per already restricted row)."""
    rows = _prepare_rows(model, values)
    n = rows.shape[0]
    n_labels = len(model.label_order)
    votes = np.zeros((n, n_labels), dtype=np.int64)
    strengths = np.zeros((n, n_labels))
    for machine in model.machines:
        a = model.label_order.index(machine.label_pair[0])
        b = model.label_order.index(machine.label_pair[1])
        f = decision_values(machine, rows)
        wins_a = f > 0
        votes[wins_a, a] += 1
        votes[~wins_a, b] += 1
        strengths[wins_a, a] += np.abs(f[wins_a])
        strengths[~wins_a, b] += np.abs(f[~wins_a])
    out = []
    for r in range(n):
        best_votes = votes[r].max()
        tied = np.flatnonzero(votes[r] == best_votes)
        if tied.size > 1:
            best_strength = strengths[r, tied].max()
            tied = tied[strengths[r, tied] == best_strength]
        out.append(model.label_order[int(tied[0])])
    return out


def predict(model: MulticlassSvmModel, features) -> EmotionLabel:
    """Predict one label from a FeatureVector or raw value row."""
    values = features.values if isinstance(features, FeatureVector) else features
    return predict_batch(model, np.asarray(values, dtype=np.float64)[None, :])[0]


def _hex(value: float) -> str:
    return float(value).hex()


def _hex_list(values) -> list:
    return [_hex(v) for v in np.asarray(values, dtype=np.float64).ravel()]


def _kernel_payload(spec: KernelSpec) -> dict:
    return {
        "kind": spec.kind,
        "eta": None if spec.eta is None else _hex(spec.eta),
        "r": _hex(spec.r),
        "degree": spec.degree,
    }


def _kernel_from_payload(payload: dict) -> KernelSpec:
    return KernelSpec(
        kind=payload["kind"],
        eta=None if payload["eta"] is None else float.fromhex(payload["eta"]),
        r=float.fromhex(payload["r"]),
        degree=int(payload["degree"]),
    )


def save_model(model: MulticlassSvmModel, path: str) -> None:
    """Serialize to JSON; floats are hex strings so loading is bit-exact."""
    machines = []
    for m in model.machines:
        machines.append({
            "labels": [m.label_pair[0].value, m.label_pair[1].value],
            "kernel": _kernel_payload(m.kernel),
            "bias": _hex(m.bias),
            "dual_coef": _hex_list(m.dual_coef),
            "support_vectors": [_hex_list(row) for row in m.support_vectors],
            "n_features": int(m.support_vectors.shape[1]),
            "iterations": m.iterations,
            "converged": m.converged,
            "final_violation": _hex(m.final_violation),
        })
    norm = None
    if model.normalization is not None:
        norm = {
            "mins": _hex_list(model.normalization.mins),
            "maxs": _hex_list(model.normalization.maxs),
            "degenerate": [bool(b) for b in model.normalization.degenerate],
        }
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "one_vs_one_svm",
        "catalog_version": model.catalog_version,
        "label_order": [lab.value for lab in model.label_order],
        "feature_indices": list(model.feature_indices),
        "normalization": norm,
        "config": {
            "c": _hex(model.config.c),
            "tolerance": _hex(model.config.tolerance),
            "max_passes": model.config.max_passes,
            "seed": model.config.seed,
            "kernel": _kernel_payload(model.config.kernel),
        },
        "machines": machines,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str) -> MulticlassSvmModel:
    """Load a model saved by save_model; errors on foreign or truncated files."""
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(
            f"{path}: model format_version {version!r} unsupported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    if payload.get("kind") != "one_vs_one_svm":
        raise ValueError(f"{path}: not a one_vs_one_svm model file")
    machines = []
    for m in payload["machines"]:
        n_features = int(m["n_features"])
        sv_rows = [[float.fromhex(v) for v in row] for row in m["support_vectors"]]
        machines.append(BinarySvmModel(
            support_vectors=np.array(sv_rows, dtype=np.float64).reshape(-1, n_features),
            dual_coef=np.array([float.fromhex(v) for v in m["dual_coef"]]),
            bias=float.fromhex(m["bias"]),
            kernel=_kernel_from_payload(m["kernel"]),
            label_pair=(parse_label(m["labels"][0]), parse_label(m["labels"][1])),
            iterations=int(m["iterations"]),
            converged=bool(m["converged"]),
            final_violation=float.fromhex(m["final_violation"]),
        ))
    norm = None
    if payload.get("normalization") is not None:
        np_payload = payload["normalization"]
        norm = FeatureNormalization(
            mins=np.array([float.fromhex(v) for v in np_payload["mins"]]),
            maxs=np.array([float.fromhex(v) for v in np_payload["maxs"]]),
            degenerate=np.array(np_payload["degenerate"], dtype=bool),
        )
    cfg_payload = payload["config"]
    config = TrainConfig(
        c=float.fromhex(cfg_payload["c"]),
        kernel=_kernel_from_payload(cfg_payload["kernel"]),
        tolerance=float.fromhex(cfg_payload["tolerance"]),
        max_passes=int(cfg_payload["max_passes"]),
        seed=int(cfg_payload["seed"]),
    )
    return MulticlassSvmModel(
        machines=machines,
        label_order=tuple(parse_label(v) for v in payload["label_order"]),
        feature_indices=tuple(int(i) for i in payload["feature_indices"]),
        normalization=norm,
        config=config,
        catalog_version=int(payload["catalog_version"]),
    )

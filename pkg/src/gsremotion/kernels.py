"""Kernel functions for the SVM: linear, polynomial, rbf, sigmoid.

eta is the scale parameter (gamma); left unset it resolves to 1/d at
training time, with d the trained feature dimensionality. r is the additive
constant for the polynomial and sigmoid forms.
"""

from dataclasses import dataclass, replace

import numpy as np

KERNEL_KINDS = ("linear", "polynomial", "rbf", "sigmoid")

_ALIASES = {"poly": "polynomial"}


def canonical_kind(kind: str) -> str:
    k = _ALIASES.get(kind.strip().lower(), kind.strip().lower())
    if k not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r} (expected one of {KERNEL_KINDS})")
    return k


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters; eta=None means resolve to 1/d at fit."""

    kind: str = "rbf"
    eta: float | None = None
    r: float = 0.0
    degree: int = 3

    def __post_init__(self):
        object.__setattr__(self, "kind", canonical_kind(self.kind))
        if self.eta is not None:
            if not np.isfinite(self.eta) or self.eta <= 0:
                raise ValueError(f"eta must be positive and finite, got {self.eta}")
        if not np.isfinite(self.r):
            raise ValueError(f"r must be finite, got {self.r}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))

    def resolved(self, n_features: int) -> "KernelSpec":
        """Fill an unset eta with 1/n_features."""
        if self.kind == "linear" or self.eta is not None:
            return self
        if n_features < 1:
            raise ValueError(f"n_features must be >= 1, got {n_features}")
        return replace(self, eta=1.0 / n_features)

    def require_resolved(self) -> None:
        if self.kind != "linear" and self.eta is None:
            raise ValueError(f"{self.kind} kernel used before eta was resolved")


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate K(x, y) for one pair of vectors."""
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise ValueError(f"kernel inputs must be 1-D and same shape, got {xv.shape} vs {yv.shape}")
    spec.require_resolved()
    if spec.kind == "linear":
        return float(xv @ yv)
    if spec.kind == "polynomial":
        return float((spec.eta * (xv @ yv) + spec.r) ** spec.degree)
    if spec.kind == "rbf":
        diff = xv - yv
        return float(np.exp(-spec.eta * (diff @ diff)))
    return float(np.tanh(spec.eta * (xv @ yv) + spec.r))


def gram(spec: KernelSpec, X, Z=None) -> np.ndarray:
    """Kernel matrix K[i, j] = K(X[i], Z[j]); Z defaults to X."""
    Xa = np.asarray(X, dtype=np.float64)
    Za = Xa if Z is None else np.asarray(Z, dtype=np.float64)
    if Xa.ndim != 2 or Za.ndim != 2 or Xa.shape[1] != Za.shape[1]:
        raise ValueError(f"incompatible shapes {Xa.shape} and {Za.shape}")
    spec.require_resolved()
    inner = Xa @ Za.T
    if spec.kind == "linear":
        return inner
    if spec.kind == "polynomial":
        return (spec.eta * inner + spec.r) ** spec.degree
    if spec.kind == "rbf":
        sq = (Xa * Xa).sum(axis=1)[:, None] + (Za * Za).sum(axis=1)[None, :] - 2.0 * inner
        np.clip(sq, 0.0, None, out=sq)
        return np.exp(-spec.eta * sq)
    return np.tanh(spec.eta * inner + spec.r)

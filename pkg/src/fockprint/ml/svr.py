"""Epsilon-insensitive support vector regression trained by SMO.

The dual over beta = (alpha, alpha*) in R^{2n} is

    min  1/2 beta^T Q beta + p^T beta
    s.t. z^T beta = 0,  0 <= beta <= C

with z = (+1..., -1...), p = (eps - y, eps + y) and Q_st = z_s z_t K(x_s, x_t).
Each step optimises the pair made of the maximal KKT violator and the partner
with the largest second-order decrease of the objective.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceWarning, DimensionMismatchError

KERNELS = ("rbf", "linear", "polynomial")
TAU = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "rbf"
    gamma: float | None = None  # None: 1 / (n_features * feature variance), resolved at fit
    coef0: float = 1.0
    degree: int = 3

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kind!r}")
        if self.gamma is not None and self.gamma <= 0 and self.kind != "linear":
            raise ValueError("gamma must be positive")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError("degree must be an integer >= 1")

    def resolved(self, X: np.ndarray) -> "KernelSpec":
        if self.gamma is not None:
            return self
        var = float(X.var())
        gamma = 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        return KernelSpec(self.kind, gamma, self.coef0, self.degree)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "coef0": self.coef0, "degree": self.degree}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        gamma = d.get("gamma")
        return cls(d["kind"], None if gamma is None else float(gamma), float(d["coef0"]), int(d["degree"]))


def gram(kernel: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kernel matrix k(A_i, B_j); ``kernel.gamma`` must already be resolved."""
    dot = A @ B.T
    if kernel.kind == "linear":
        return dot
    if kernel.kind == "polynomial":
        return (kernel.gamma * dot + kernel.coef0) ** kernel.degree
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * dot
    return np.exp(-kernel.gamma * np.maximum(sq, 0.0))


@dataclass
class SvrModel:
    kernel: KernelSpec
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i - alpha_i*
    bias: float
    C: float
    epsilon: float
    converged: bool = True
    kkt_violation: float = 0.0
    iterations: int = 0

    def predict(self, X) -> np.ndarray:
        return svr_predict(self, X)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "support_vectors": self.support_vectors,
            "dual_coef": self.dual_coef,
            "bias": self.bias,
            "C": self.C,
            "epsilon": self.epsilon,
            "converged": self.converged,
            "kkt_violation": self.kkt_violation,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvrModel":
        coef = np.asarray(d["dual_coef"], dtype=float)
        sv = np.asarray(d["support_vectors"], dtype=float)
        return cls(
            KernelSpec.from_dict(d["kernel"]),
            sv.reshape(coef.size, -1) if coef.size else sv.reshape(0, 0),
            coef,
            float(d["bias"]),
            float(d["C"]),
            float(d["epsilon"]),
            bool(d["converged"]),
            float(d["kkt_violation"]),
            int(d["iterations"]),
        )


def _smo(K: np.ndarray, y: np.ndarray, C: float, eps: float, tol: float, max_iter: int):
    n = y.size
    z = np.concatenate([np.ones(n), -np.ones(n)])
    beta = np.zeros(2 * n)
    G = np.concatenate([eps - y, eps + y])
    kdiag = np.diag(K)
    kdiag2 = np.concatenate([kdiag, kdiag])
    pos = z > 0

    violation = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        mzg = -z * G
        below = beta < C
        above = beta > 0
        up = np.where(pos, below, above)
        low = np.where(pos, above, below)
        if not up.any() or not low.any():
            violation = 0.0
            break
        i = int(np.argmax(np.where(up, mzg, -np.inf)))
        gmax = mzg[i]
        gmin = np.min(mzg[low])
        violation = gmax - gmin
        if violation < tol:
            break

        ki = K[i % n]
        ki2 = np.concatenate([ki, ki])
        b = gmax - mzg
        a = kdiag[i % n] + kdiag2 - 2.0 * ki2
        a = np.where(a > 0, a, TAU)
        cand = low & (b > 0)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))

        kij = ki[j % n]
        quad = max(kdiag[i % n] + kdiag[j % n] - 2.0 * kij, TAU)
        old_i, old_j = beta[i], beta[j]
        ai, aj = old_i, old_j
        if z[i] != z[j]:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        beta[i], beta[j] = ai, aj
        d_i, d_j = ai - old_i, aj - old_j
        kj2 = np.concatenate([K[j % n], K[j % n]])
        G += z * (z[i] * d_i * ki2 + z[j] * d_j * kj2)
    converged = violation < tol

    # bias from free variables, or the midpoint of the feasible interval
    zg = z * G
    at_upper = beta >= C
    at_lower = beta <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        rho = float(zg[free].mean())
    else:
        ub_mask = (at_upper & ~pos) | (at_lower & pos)
        lb_mask = (at_upper & pos) | (at_lower & ~pos)
        ub = zg[ub_mask].min() if ub_mask.any() else np.inf
        lb = zg[lb_mask].max() if lb_mask.any() else -np.inf
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else float(ub if np.isfinite(ub) else lb)
    coef = beta[:n] - beta[n:]
    return coef, -rho, converged, float(violation), it


def svr_fit_gram(
    K: np.ndarray,
    X: np.ndarray,
    y,
    kernel: KernelSpec,
    C: float = 1.0,
    epsilon: float = 0.1,
    tol: float = 1e-3,
    max_passes: int = 100,
) -> SvrModel:
    """Fit against a precomputed Gram matrix of ``X`` (shared across target columns)."""
    y = np.asarray(y, dtype=float)
    if y.size != X.shape[0] or y.size < 2:
        raise DimensionMismatchError("need |X| = |y| >= 2")
    if C <= 0 or epsilon < 0:
        raise ValueError("need C > 0 and epsilon >= 0")
    coef, bias, converged, violation, iters = _smo(K, y, float(C), float(epsilon), tol, max_passes * y.size)
    keep = coef != 0
    model = SvrModel(kernel, X[keep].copy(), coef[keep], bias, float(C), float(epsilon), converged, violation, iters)
    if not converged:
        warnings.warn(
            f"SMO stopped after {iters} iterations with KKT violation {violation:.3e}", ConvergenceWarning, stacklevel=2
        )
    return model


def svr_fit(X, y, kernel: KernelSpec | None = None, C=1.0, epsilon=0.1, tol=1e-3, max_passes=100) -> SvrModel:
    """Train an epsilon-SVR; a non-converged model is still returned with a warning."""
    X = np.asarray(X, dtype=float)
    kernel = (kernel or KernelSpec()).resolved(X)
    return svr_fit_gram(gram(kernel, X, X), X, y, kernel, C, epsilon, tol, max_passes)


def svr_predict(model: SvrModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if model.dual_coef.size == 0:
        return np.full(X.shape[0], model.bias)
    if X.shape[1] != model.support_vectors.shape[1]:
        raise DimensionMismatchError(f"expected {model.support_vectors.shape[1]} features, got {X.shape[1]}")
    return gram(model.kernel, X, model.support_vectors) @ model.dual_coef + model.bias

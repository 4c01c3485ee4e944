"""Seeded randomness and the finite-difference machinery used to audit every
analytic backward pass in this package.

All gradient verification runs in float64 with central differences; the
relative-error formula uses an absolute floor so that exact zeros on both
sides compare equal instead of dividing 0 by 0.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SeededRng",
    "gaussian_init",
    "finite_difference_gradient",
    "gradient_check",
    "GradCheckReport",
    "REL_ERR_FLOOR",
]

REL_ERR_FLOOR = 1e-8


def _tag_to_int(tag) -> int:
    """Stable 64-bit digest of a stream tag (independent of PYTHONHASHSEED)."""
    if isinstance(tag, int):
        return tag & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2s(str(tag).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class SeededRng:
    """Counter-based random stream (Philox) with named splitting.

    ``split(tag)`` derives an independent child stream from the parent seed
    and the tag alone, so adding or reordering other initialization calls
    never changes the values a given consumer draws.
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self._path = _path
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=_path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def split(self, tag) -> "SeededRng":
        return SeededRng(self.seed, self._path + (_tag_to_int(tag),))

    def normal(self, shape, std: float = 1.0) -> np.ndarray:
        return self._gen.normal(0.0, std, size=shape)

    def uniform(self, shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def integers(self, low: int, high: int, shape=None) -> np.ndarray:
        return self._gen.integers(low, high, size=shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def choice_from_cdf(self, probs: np.ndarray) -> int:
        """Draw one categorical index from a probability vector."""
        u = self._gen.uniform(0.0, 1.0)
        return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, len(probs) - 1))


def gaussian_init(rng: SeededRng, shape, variance: float) -> np.ndarray:
    """Sample i.i.d. N(0, variance); variance 0 yields exact zeros."""
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    if variance == 0.0:
        return np.zeros(shape, dtype=np.float64)
    return rng.normal(shape, std=float(np.sqrt(variance)))


def finite_difference_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function, entry by entry."""
    if h <= 0:
        raise ValueError("h must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        fp = float(f(x))
        flat_x[i] = orig - h
        fm = float(f(x))
        flat_x[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ArithmeticError(f"function returned non-finite value at entry {i}")
        flat_g[i] = (fp - fm) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """max over entries of |a - n| / max(|a|, |n|, floor)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), REL_ERR_FLOOR)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - n) / denom))


@dataclass
class GradCheckReport:
    max_rel_err: float
    tol: float
    per_param: dict = field(default_factory=dict)
    passed: bool = False

    def __str__(self):
        lines = [f"gradcheck: max_rel_err={self.max_rel_err:.3e} tol={self.tol:.1e} "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        for name, err in sorted(self.per_param.items()):
            lines.append(f"  {name:<40s} {err:.3e}")
        return "\n".join(lines)


def gradient_check(layer, x: np.ndarray, *, rng: SeededRng, tol: float = 1e-4,
                   h: float = 1e-5, check_input: bool = True) -> GradCheckReport:
    """Compare a layer's analytic backward against central differences.

    The scalar probe loss is sum(w * y) for a fixed random projection w, so
    dL/dy = w feeds the analytic backward directly.  Parameters are perturbed
    in place and restored; the layer must be deterministic in eval mode.
    """
    y, cache = layer.forward(x)
    if y.shape == () or y.size == 1:
        w = np.ones_like(y)
    else:
        w = rng.split("gradcheck-probe").normal(y.shape)

    def loss() -> float:
        out, _ = layer.forward(x)
        return float(np.sum(w * out))

    dx, grads = layer.backward(cache, w)
    params = layer.params()
    per_param: dict[str, float] = {}

    for name, p in params.items():
        analytic = grads.get(name)
        if analytic is None:
            raise KeyError(f"backward returned no gradient for parameter {name!r}")
        if np.iscomplexobj(p):
            raise TypeError(f"parameter {name!r} is complex; gradcheck expects real storage")
        numeric = np.zeros_like(p, dtype=np.float64)
        flat_p = p.reshape(-1)
        flat_n = numeric.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            fp = loss()
            flat_p[i] = orig - h
            fm = loss()
            flat_p[i] = orig
            flat_n[i] = (fp - fm) / (2.0 * h)
        per_param[name] = relative_error(analytic, numeric)

    if check_input:
        numeric_dx = finite_difference_gradient(
            lambda v: float(np.sum(w * layer.forward(v)[0])), x, h=h)
        per_param["<input>"] = relative_error(dx, numeric_dx)

    max_err = max(per_param.values()) if per_param else 0.0
    return GradCheckReport(max_rel_err=max_err, tol=tol, per_param=per_param,
                           passed=max_err < tol)

"""Three interchangeable executors for diagonal affine recurrences
h_k = a_k * h_{k-1} + b_k, plus zero-order-hold discretization.

* sequential_recurrence - the plain loop, used as the oracle.
* blelloch_scan - work-efficient up-sweep / down-sweep over the affine
  composition (a1,b1) . (a2,b2) = (a2*a1, a2*b1 + b2), optionally chunked
  across worker threads.  The combine tree is fixed by position, so results
  are bit-identical for any worker count.
* conv_recurrence - FFT convolution against the kernel (1, a, a^2, ...); only
  valid when the coefficient is constant over time.

Time is always axis 0; any trailing shape broadcasts elementwise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dsp

__all__ = [
    "DiagonalAffineSeq", "sequential_recurrence", "blelloch_scan",
    "blelloch_exclusive", "conv_recurrence", "ZohParams", "zoh_discretize",
    "affine_combine",
]


@dataclass
class DiagonalAffineSeq:
    """Per-step diagonal affine maps: state update h_k = a[k] * h_{k-1} + b[k].

    ``a`` and ``b`` have shape [S, ...]; ``h0`` the trailing shape (zeros if
    omitted).
    """
    a: np.ndarray
    b: np.ndarray
    h0: np.ndarray | None = None

    def __post_init__(self):
        self.a = np.asarray(self.a)
        self.b = np.asarray(self.b)
        if self.a.shape != self.b.shape:
            raise ValueError(f"a/b shape mismatch: {self.a.shape} vs {self.b.shape}")
        if self.h0 is not None:
            self.h0 = np.asarray(self.h0)
            if self.h0.shape != self.a.shape[1:]:
                raise ValueError(
                    f"h0 shape {self.h0.shape} incompatible with steps {self.a.shape}")

    @property
    def steps(self) -> int:
        return self.a.shape[0]

    def initial_state(self) -> np.ndarray:
        if self.h0 is not None:
            return self.h0
        return np.zeros(self.a.shape[1:], dtype=self.a.dtype)


def affine_combine(a1, b1, a2, b2):
    """Compose two diagonal affine maps, first map applied first."""
    return a2 * a1, a2 * b1 + b2


def sequential_recurrence(seq: DiagonalAffineSeq) -> np.ndarray:
    states = np.empty_like(seq.b)
    h = seq.initial_state()
    for k in range(seq.steps):
        h = seq.a[k] * h + seq.b[k]
        states[k] = h
    return states


def _next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()


def _level_apply(fn, offsets: np.ndarray, workers: int):
    """Run fn on slices of the level's node offsets, optionally in threads.

    Writes of distinct calls touch disjoint positions, so chunking is safe and
    the arithmetic is identical for every worker count.
    """
    if workers <= 1 or len(offsets) < 2:
        fn(offsets)
        return
    chunks = np.array_split(offsets, min(workers, len(offsets)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, chunks))


def blelloch_exclusive(a: np.ndarray, b: np.ndarray, workers: int = 1):
    """Exclusive affine prescan: position k holds the composition of maps
    0..k-1 as (A_k, B_k), with the identity (1, 0) at position 0."""
    a = np.asarray(a)
    b = np.asarray(b)
    s = a.shape[0]
    n = _next_pow2(s)
    wa = np.ones((n,) + a.shape[1:], dtype=a.dtype)
    wb = np.zeros((n,) + b.shape[1:], dtype=b.dtype)
    wa[:s] = a
    wb[:s] = b

    # up-sweep: each right node absorbs its left sibling (left applied first)
    half = 1
    while half < n:
        stride = half * 2
        r = np.arange(stride - 1, n, stride)

        def up(rs, half=half):
            ls = rs - half
            wa[rs], wb[rs] = affine_combine(wa[ls], wb[ls], wa[rs], wb[rs])

        _level_apply(up, r, workers)
        half = stride

    wa[n - 1] = 1
    wb[n - 1] = 0

    # down-sweep: parent prescan goes left; right gets parent-then-left-sum
    half = n // 2
    while half >= 1:
        stride = half * 2
        r = np.arange(stride - 1, n, stride)

        def down(rs, half=half):
            ls = rs - half
            ta, tb = wa[ls].copy(), wb[ls].copy()
            wa[ls], wb[ls] = wa[rs], wb[rs]
            wa[rs], wb[rs] = affine_combine(wa[rs], wb[rs], ta, tb)

        _level_apply(down, r, workers)
        half //= 2

    return wa[:s], wb[:s]


def blelloch_scan(seq: DiagonalAffineSeq, workers: int = 1) -> np.ndarray:
    """States of the recurrence via the parallel prefix scan; matches
    sequential_recurrence to rounding."""
    ea, eb = blelloch_exclusive(seq.a, seq.b, workers=workers)
    ia, ib = affine_combine(ea, eb, seq.a, seq.b)
    return ia * seq.initial_state() + ib


def conv_recurrence(a: np.ndarray, b_seq: np.ndarray,
                    h0: np.ndarray | None = None) -> np.ndarray:
    """Time-invariant recurrence via FFT convolution with K = (1, a, a^2, ...).

    ``a`` is the constant diagonal, shape equal to the trailing shape of
    ``b_seq`` (a per-step [S, ...] array is accepted only if constant in time).
    """
    b_seq = np.asarray(b_seq)
    a = np.asarray(a)
    s = b_seq.shape[0]
    if a.shape == b_seq.shape:
        if s > 1 and not np.array_equal(a, np.broadcast_to(a[0], a.shape)):
            raise ValueError("conv_recurrence requires a time-invariant coefficient")
        a = a[0]
    if a.shape != b_seq.shape[1:]:
        raise ValueError(f"coefficient shape {a.shape} does not match inputs "
                         f"{b_seq.shape[1:]}")

    complex_out = np.iscomplexobj(a) or np.iscomplexobj(b_seq)
    n = _next_pow2(2 * s)
    # kernel powers a^0 .. a^{s-1}, zero-padded to kill circular wraparound
    k = np.arange(s).reshape((s,) + (1,) * a.ndim)
    kernel = np.power(a.astype(np.complex128)[None, ...], k)
    kern_pad = np.zeros((n,) + a.shape, dtype=np.complex128)
    kern_pad[:s] = kernel
    b_pad = np.zeros((n,) + a.shape, dtype=np.complex128)
    b_pad[:s] = b_seq

    spec = dsp.fft(np.moveaxis(kern_pad, 0, -1)) * dsp.fft(np.moveaxis(b_pad, 0, -1))
    states = np.moveaxis(dsp.ifft(spec), -1, 0)[:s]
    if h0 is not None:
        h0 = np.asarray(h0)
        powers = np.power(a.astype(np.complex128)[None, ...],
                          np.arange(1, s + 1).reshape((s,) + (1,) * a.ndim))
        states = states + powers * h0
    return states if complex_out else states.real


@dataclass(frozen=True)
class ZohParams:
    """Continuous diagonal system h' = a h + b x sampled with timestep delta."""
    a: np.ndarray
    b: np.ndarray
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("timestep must be positive")


def zoh_discretize(p: ZohParams):
    """Zero-order hold: a_bar = exp(a*delta), b_bar = (exp(a*delta)-1)/a * b,
    with the limit b_bar = delta*b as a -> 0."""
    a = np.asarray(p.a)
    b = np.asarray(p.b)
    a_bar = np.exp(a * p.delta)
    zero = a == 0
    safe_a = np.where(zero, 1.0, a)
    ratio = np.where(zero, p.delta, (a_bar - 1.0) / safe_a)
    return a_bar, ratio * b

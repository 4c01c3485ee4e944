"""Audio front end: mu-law companding, radix-2 FFT, spectral convolution,
short-time Fourier transform, and mel filterbanks.

The FFT is an iterative radix-2 implementation with cached bit-reversal and
twiddle tables; the inverse transform is expressed through the forward one
via conjugation.  Everything here is pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MuLawCodec", "mu_law_encode", "mu_law_decode",
    "mu_law_compand", "mu_law_expand",
    "linear_encode", "linear_decode",
    "fft", "ifft", "naive_dft", "circular_convolve", "naive_circular_convolve",
    "StftConfig", "hann_window", "stft",
    "hz_to_mel", "mel_to_hz", "MelFilterbank", "mel_spectrogram",
]


# ---------------------------------------------------------------------------
# mu-law companding

@dataclass(frozen=True)
class MuLawCodec:
    mu: int = 255
    bits: int = 8

    @property
    def levels(self) -> int:
        return 1 << self.bits


def mu_law_compand(x, mu: int = 255):
    """Continuous companding curve: sgn(x) * ln(1 + mu|x|) / ln(1 + mu)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.log1p(mu * np.abs(x)) / np.log1p(mu)


def mu_law_expand(y, mu: int = 255):
    """Inverse companding curve: sgn(y) * ((1 + mu)^|y| - 1) / mu."""
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * (np.power(1.0 + mu, np.abs(y)) - 1.0) / mu


def _quantize_unit(y, levels: int):
    """Map y in [-1, 1] to integer codes 0..levels-1 by uniform binning."""
    return np.round((np.asarray(y) + 1.0) / 2.0 * (levels - 1)).astype(np.int64)


def _dequantize_unit(code, levels: int):
    return np.asarray(code, dtype=np.float64) / (levels - 1) * 2.0 - 1.0


def mu_law_encode(x, codec: MuLawCodec = MuLawCodec()):
    """Compand then quantize to ``codec.bits``-bit codes; input saturates at +-1."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("mu_law_encode: NaN input")
    x = np.clip(x, -1.0, 1.0)
    codes = _quantize_unit(mu_law_compand(x, codec.mu), codec.levels)
    return codes.astype(np.uint8) if codec.bits <= 8 else codes


def mu_law_decode(code, codec: MuLawCodec = MuLawCodec()):
    code = np.asarray(code)
    if (np.asarray(code) < 0).any() or (np.asarray(code) >= codec.levels).any():
        raise ValueError("mu_law_decode: code out of range")
    return mu_law_expand(_dequantize_unit(code, codec.levels), codec.mu)


def linear_encode(x, bits: int = 8):
    """Uniform quantizer over [-1, 1] with the same binning rule as mu-law."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("linear_encode: NaN input")
    x = np.clip(x, -1.0, 1.0)
    codes = _quantize_unit(x, 1 << bits)
    return codes.astype(np.uint8) if bits <= 8 else codes


def linear_decode(code, bits: int = 8):
    return _dequantize_unit(np.asarray(code), 1 << bits)


# ---------------------------------------------------------------------------
# FFT

_PLAN_CACHE: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}


def _plan(n: int):
    """Bit-reversal permutation and per-stage twiddle tables for length n."""
    cached = _PLAN_CACHE.get(n)
    if cached is not None:
        return cached
    bits = n.bit_length() - 1
    rev = np.zeros(n, dtype=np.int64)
    for i in range(n):
        r = 0
        v = i
        for _ in range(bits):
            r = (r << 1) | (v & 1)
            v >>= 1
        rev[i] = r
    twiddles = []
    size = 2
    while size <= n:
        k = np.arange(size // 2)
        twiddles.append(np.exp(-2j * np.pi * k / size))
        size *= 2
    _PLAN_CACHE[n] = (rev, twiddles)
    return rev, twiddles


def fft(v: np.ndarray) -> np.ndarray:
    """DFT along the last axis; length must be a power of two."""
    v = np.asarray(v)
    n = v.shape[-1]
    if n == 0 or (n & (n - 1)) != 0:
        raise ValueError(f"fft length must be a power of two, got {n}")
    x = np.array(v, dtype=np.complex128)
    if n == 1:
        return x
    rev, twiddles = _plan(n)
    x = x[..., rev]
    size = 2
    for tw in twiddles:
        half = size // 2
        shaped = x.reshape(x.shape[:-1] + (n // size, size))
        even = shaped[..., :half]
        odd = shaped[..., half:] * tw
        x = np.concatenate([even + odd, even - odd], axis=-1).reshape(v.shape)
        size *= 2
    return x


def ifft(v: np.ndarray) -> np.ndarray:
    """Inverse DFT via conjugation: IDFT(f) = conj(DFT(conj(f))) / n."""
    v = np.asarray(v)
    n = v.shape[-1]
    return np.conj(fft(np.conj(v))) / n


def naive_dft(v: np.ndarray) -> np.ndarray:
    """O(n^2) DFT straight from the definition; the oracle for fft()."""
    v = np.asarray(v, dtype=np.complex128)
    n = v.shape[-1]
    k = np.arange(n)
    mat = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return v @ mat.T


def circular_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Circular convolution via pointwise multiplication in the frequency domain."""
    f = np.asarray(f)
    g = np.asarray(g)
    if f.shape[-1] != g.shape[-1]:
        raise ValueError(f"length mismatch: {f.shape[-1]} vs {g.shape[-1]}")
    out = ifft(fft(f) * fft(g))
    if not (np.iscomplexobj(f) or np.iscomplexobj(g)):
        return out.real
    return out


def naive_circular_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """O(n^2) wraparound sum straight from the definition."""
    f = np.asarray(f)
    g = np.asarray(g)
    n = f.shape[-1]
    out = np.zeros(n, dtype=np.result_type(f, g, np.float64))
    for k in range(n):
        for j in range(n):
            out[k] += f[j] * g[(k - j) % n]
    return out


# ---------------------------------------------------------------------------
# STFT

def hann_window(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("window length must be >= 2")
    j = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * j / (n - 1)))


@dataclass(frozen=True)
class StftConfig:
    frame_length: int
    hop: int
    window: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = self.frame_length
        if n < 2 or (n & (n - 1)) != 0:
            raise ValueError(f"frame length must be a power of two >= 2, got {n}")
        if not (0 < self.hop <= n):
            raise ValueError(f"hop must satisfy 0 < hop <= frame length, got {self.hop}")
        w = self.window if self.window is not None else hann_window(n)
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (n,):
            raise ValueError("window length must equal frame length")
        object.__setattr__(self, "window", w)

    @staticmethod
    def rectangular(frame_length: int, hop: int) -> "StftConfig":
        return StftConfig(frame_length, hop, np.ones(frame_length))


def stft(signal: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Windowed, hopped DFT.  Returns a complex matrix [frames x frame_length];
    frame m covers samples m*hop .. m*hop + n - 1."""
    signal = np.asarray(signal, dtype=np.float64)
    n, h = cfg.frame_length, cfg.hop
    s = signal.shape[-1]
    if s < n:
        raise ValueError(f"signal length {s} shorter than one frame ({n})")
    frames = (s - n) // h + 1
    idx = np.arange(n)[None, :] + h * np.arange(frames)[:, None]
    return fft(signal[idx] * cfg.window[None, :])


# ---------------------------------------------------------------------------
# mel scale

def hz_to_mel(f_hz):
    f = np.asarray(f_hz, dtype=np.float64)
    if (f < 0).any():
        raise ValueError("frequency must be >= 0")
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_to_hz(m):
    return 700.0 * (np.power(10.0, np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


class MelFilterbank:
    """Triangular filters with endpoints equally spaced on the mel scale,
    acting on the one-sided power spectrum of an n-point DFT."""

    def __init__(self, n_bands: int, frame_length: int, sample_rate: float,
                 fmin: float = 0.0, fmax: float | None = None):
        if n_bands < 1:
            raise ValueError("need at least one mel band")
        fmax = sample_rate / 2.0 if fmax is None else fmax
        if not (0 <= fmin < fmax):
            raise ValueError("need 0 <= fmin < fmax")
        self.n_bands = n_bands
        self.frame_length = frame_length
        self.sample_rate = sample_rate
        self.fmin = fmin
        self.fmax = fmax
        n_bins = frame_length // 2 + 1
        bin_hz = np.arange(n_bins) * sample_rate / frame_length
        edges_mel = np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_bands + 2)
        edges_hz = mel_to_hz(edges_mel)
        weights = np.zeros((n_bands, n_bins))
        for b in range(n_bands):
            lo, mid, hi = edges_hz[b], edges_hz[b + 1], edges_hz[b + 2]
            up = (bin_hz - lo) / max(mid - lo, 1e-12)
            down = (hi - bin_hz) / max(hi - mid, 1e-12)
            weights[b] = np.maximum(0.0, np.minimum(up, down))
        self.weights = weights

    @property
    def center_frequencies_mel(self) -> np.ndarray:
        edges = np.linspace(hz_to_mel(self.fmin), hz_to_mel(self.fmax),
                            self.n_bands + 2)
        return edges[1:-1]


def mel_spectrogram(stft_matrix: np.ndarray, bank: MelFilterbank) -> np.ndarray:
    """Filterbank applied to the one-sided power spectrum of each frame."""
    spec = np.asarray(stft_matrix)
    n_bins = bank.weights.shape[1]
    power = np.abs(spec[..., :n_bins]) ** 2
    return power @ bank.weights.T

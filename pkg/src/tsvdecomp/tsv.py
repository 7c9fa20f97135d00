"""Total symmetric variation (TSV) and the weight field built from it.

TSV is evaluated along four directions (vertical, horizontal and the two
diagonals). For each direction the forward difference of the image is
averaged against a rotated anisotropic Gaussian line kernel, and the
absolute values of the four averages are summed. It is large at boundaries
between regions and small inside homogeneous or uniformly textured regions.
"""

from dataclasses import dataclass

import numpy as np
from scipy import fft, ndimage

from .grid import as_field, diff

# direction index -> kernel angle; index matches the difference axis in grid
DIRECTIONS = ((1, 0.0), (2, np.pi / 2), (3, np.pi / 4), (4, 3 * np.pi / 4))


@dataclass(frozen=True)
class TsvParams:
    """Parameters of the TSV weight.

    Attributes
    ----------
    sigma1 : float
        Spread along the line (controls line length).
    sigma2 : float
        Spread across the line (controls line width).
    window : int
        Kernel support extent; the kernel radius is ``window // 2``.
    kappa : float
        Floor added to TSV so the weight is strictly positive.
    """

    sigma1: float = 2.75
    sigma2: float = 0.75
    window: int = 20
    kappa: float = 0.1

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("sigma1 and sigma2 must be positive")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if int(self.window) != self.window or self.window < 3:
            raise ValueError("window must be an integer >= 3")

    @property
    def radius(self):
        return int(self.window) // 2


@dataclass(frozen=True)
class WeightField:
    """Weight map ``eta`` with its positivity floor ``kappa``."""

    eta: np.ndarray
    kappa: float

    def __post_init__(self):
        eta = as_field(self.eta, "eta")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if eta.min() < self.kappa:
            raise ValueError("eta must be >= kappa everywhere")
        object.__setattr__(self, "eta", eta)

    @classmethod
    def constant(cls, shape, value):
        return cls(np.full(shape, float(value)), float(value))


def kernel_coefficients(theta, sigma1, sigma2):
    """Quadratic-form coefficients ``(a, b, c)`` of the rotated Gaussian."""
    cos2, sin2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    s2t = np.sin(2 * theta)
    kernel_a = cos2 / (2 * sigma1) + sin2 / (2 * sigma2)
    kernel_b = s2t / (4 * sigma1) - s2t / (4 * sigma2)
    kernel_c = sin2 / (2 * sigma1) + cos2 / (2 * sigma2)
    return kernel_a, kernel_b, kernel_c


def build_kernel(theta, params):
    """Unit-sum anisotropic Gaussian line kernel on ``(2R+1, 2R+1)`` offsets.

    Entry ``[R + k, R + l]`` holds the weight of offset ``(k, l)``, with ``k``
    along axis 1. Note the spreads enter as ``2*sigma``, not ``2*sigma**2``.
    """
    kernel_a, kernel_b, kernel_c = kernel_coefficients(theta, params.sigma1, params.sigma2)
    r = params.radius
    k, l = np.mgrid[-r:r + 1, -r:r + 1].astype(np.float64)
    w = np.exp(-(kernel_a * k * k + 2 * kernel_b * k * l + kernel_c * l * l))
    return w / w.sum()


def kernel_stack(params):
    """The four direction kernels stacked into shape ``(4, 2R+1, 2R+1)``."""
    return np.stack([build_kernel(theta, params) for _, theta in DIRECTIONS])


def _embed(kernel, shape):
    # fold kernel offsets onto the periodic grid; handles kernels wider than the grid
    r = kernel.shape[0] // 2
    out = np.zeros(shape)
    offs = np.arange(-r, r + 1)
    rows = (offs % shape[0])[:, None]
    cols = (offs % shape[1])[None, :]
    np.add.at(out, (np.broadcast_to(rows, kernel.shape), np.broadcast_to(cols, kernel.shape)), kernel)
    return out


def directional_responses(f, params):
    """Kernel-weighted forward differences, shape ``(4, M, N)`` (signed)."""
    f = as_field(f, "f")
    out = np.empty((4,) + f.shape)
    for n, (axis, theta) in enumerate(DIRECTIONS):
        d = diff(f, axis, "forward")
        w_hat = fft.rfft2(_embed(build_kernel(theta, params), f.shape))
        # periodic correlation: sum_k w(k) d(x + k)
        out[n] = fft.irfft2(fft.rfft2(d) * np.conj(w_hat), s=f.shape)
    return out


def compute_tsv(f, params):
    """Discrete TSV of `f`: sum over four directions of the absolute response."""
    return np.abs(directional_responses(f, params)).sum(axis=0)


def build_eta(f, params):
    """Weight ``eta = kappa + TSV(f)``."""
    return WeightField(params.kappa + compute_tsv(f, params), params.kappa)


def nlm_denoise(f, patch=5, search=11, h=10 / 255):
    """Non-local means with periodic boundaries.

    Each pixel becomes the average of the pixels in its ``search x search``
    neighbourhood, weighted by ``exp(-d**2 / h**2)`` where ``d**2`` is the mean
    squared difference of the ``patch x patch`` patches around them.
    """
    f = as_field(f, "f")
    for name, size in (("patch", patch), ("search", search)):
        if int(size) != size or size < 1 or size % 2 == 0:
            raise ValueError(f"{name} size must be a positive odd integer, got {size!r}")
    if not h > 0:
        raise ValueError("h must be positive")
    s = search // 2
    num = np.zeros_like(f)
    den = np.zeros_like(f)
    for di in range(-s, s + 1):
        for dj in range(-s, s + 1):
            g = np.roll(f, (-di, -dj), axis=(0, 1))
            d2 = ndimage.uniform_filter((f - g) ** 2, size=patch, mode="wrap")
            w = np.exp(-np.maximum(d2, 0.0) / h ** 2)
            num += w * g
            den += w
    out = num / den
    # convex combination; clip rounding excursions
    return np.clip(out, f.min(), f.max())

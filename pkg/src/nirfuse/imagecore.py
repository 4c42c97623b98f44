"""Core image container and multi-scale pyramid decomposition.

Everything downstream (structure extraction, inconsistency maps, fusion)
works on :class:`PlanarImage` values and Gaussian/Laplacian pyramids built
here. All operations are pure; containers are frozen and their arrays made
read-only, so values can be shared freely across threads.

Conventions fixed for the whole package:

* pyramid blur is the separable 5x5 binomial kernel (1,4,6,4,1)/16
* borders are mirror-reflected (no edge duplication), which keeps constant
  images exactly constant through every blur/resample
* downsampling follows ceil-halving; pyramid values are never clamped
  (Laplacian details are signed)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Separable Burt-Adelson binomial kernel used by every pyramid operation.
BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

# Minimum side length of the coarsest Gaussian level (small enough to admit
# a 16px image at 3 scales, large enough for the 3x3 Sobel downstream).
MIN_COARSE_SIDE = 4

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PlanarImage:
    """H x W x C floating-point image, C in {1, 3}.

    ``data`` is stored as a read-only float64 array of shape (H, W, C).
    A 2-D array is accepted and treated as single-channel. Values are not
    range-restricted: pipeline inputs/outputs live in [0, 1], but pyramid
    detail levels are signed.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"image data must be 2-D or 3-D, got shape {arr.shape}")
        if arr.shape[2] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite samples")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def plane(self, c: int) -> np.ndarray:
        """Return channel ``c`` as a read-only (H, W) view."""
        return self.data[:, :, c]


@dataclass(frozen=True)
class Pyramid:
    """Ordered multi-scale decomposition, finest (index 0) to coarsest.

    ``kind`` is ``"gaussian"`` or ``"laplacian"``. A Laplacian pyramid holds
    signed band-pass details for all levels but the last, which is the
    coarsest Gaussian residual.
    """

    levels: tuple[PlanarImage, ...]
    kind: str

    def __post_init__(self):
        if self.kind not in ("gaussian", "laplacian"):
            raise ValueError(f"unknown pyramid kind {self.kind!r}")
        if not self.levels:
            raise ValueError("pyramid must have at least one level")
        object.__setattr__(self, "levels", tuple(self.levels))
        for a, b in zip(self.levels, self.levels[1:]):
            want = (_half(a.height), _half(a.width))
            if (b.height, b.width) != want:
                raise ValueError(
                    f"level sizes must ceil-halve: {a.height}x{a.width} -> "
                    f"{b.height}x{b.width}, expected {want[0]}x{want[1]}"
                )

    @property
    def scales(self) -> int:
        return len(self.levels)


def _half(n: int) -> int:
    return (n + 1) // 2


def _blur_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    # Anchored at the center tap so constant inputs come out bit-exact
    # (the off-center weights multiply differences, which are then zero).
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (2, 2)
    padded = np.pad(arr, pad, mode="reflect")
    out = arr.copy()
    index = [slice(None)] * arr.ndim
    for k, w in enumerate(BINOMIAL_5):
        if k == 2:
            continue
        index[axis] = slice(k, k + arr.shape[axis])
        out += w * (padded[tuple(index)] - arr)
    return out


def binomial_blur(arr: np.ndarray) -> np.ndarray:
    """Separable 5x5 binomial blur with mirror-reflected borders.

    Works on (H, W) planes and (H, W, C) stacks (spatial axes only).
    """
    return _blur_axis(_blur_axis(np.asarray(arr, dtype=np.float64), 0), 1)


def downsample(arr: np.ndarray) -> np.ndarray:
    """Binomial blur followed by factor-2 decimation (ceil-halving sizes)."""
    return binomial_blur(arr)[::2, ::2]


def _box_axis(plane: np.ndarray, radius: int, axis: int) -> np.ndarray:
    size = 2 * radius + 1
    n = plane.shape[axis]
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(plane, pad, mode="reflect")
    zero_shape = list(padded.shape)
    zero_shape[axis] = 1
    csum = np.concatenate([np.zeros(zero_shape), np.cumsum(padded, axis=axis)], axis=axis)
    hi = [slice(None)] * 2
    lo = [slice(None)] * 2
    hi[axis] = slice(size, size + n)
    lo[axis] = slice(0, n)
    return (csum[tuple(hi)] - csum[tuple(lo)]) / size


def box_mean(plane: np.ndarray, radius: int) -> np.ndarray:
    """Mean over (2r+1)^2 windows with mirror-reflected borders."""
    plane = np.asarray(plane, dtype=np.float64)
    if min(plane.shape) < radius + 1:
        raise ValueError(f"plane {plane.shape} too small for box radius {radius}")
    return _box_axis(_box_axis(plane, radius, 0), radius, 1)


def _up_axis(arr: np.ndarray, n: int, axis: int) -> np.ndarray:
    # Polyphase form of zero-insertion + 2 * (1,4,6,4,1)/16 with mirror
    # borders: even outputs mix (1/8, 3/4, 1/8), odd outputs are midpoint
    # averages. Anchored sums keep constants bit-exact.
    a = np.moveaxis(arr, axis, 0)
    m = a.shape[0]
    out = np.empty((n,) + a.shape[1:], dtype=np.float64)
    if m == 1:
        out[:] = a[0]
        return np.moveaxis(out, 0, axis)
    even = np.arange(_half(n))
    left = np.abs(even - 1)
    right = even + 1
    # reflection happens on the fine (zero-inserted) grid, so the rightmost
    # coarse neighbor maps to m-1 for even n and m-2 for odd n
    right = np.where(right >= m, m - 1 if n % 2 == 0 else m - 2, right)
    center = a[even]
    out[0::2] = center + 0.125 * ((a[left] - center) + (a[right] - center))
    odd = np.arange(n // 2)
    hi = np.where(odd + 1 >= m, m - 1, odd + 1)
    lo = a[odd]
    out[1::2] = lo + 0.5 * (a[hi] - lo)
    return np.moveaxis(out, 0, axis)


def upsample(arr: np.ndarray, target_shape: tuple[int, int]) -> np.ndarray:
    """Zero-insertion 2x upsample to ``target_shape`` plus 4x binomial blur.

    Inverse-compatible with :func:`downsample`: constants map to constants
    bit-exactly and the sample lattice stays phase-aligned.
    """
    h, w = target_shape
    if (_half(h), _half(w)) != arr.shape[:2]:
        raise ValueError(
            f"cannot upsample {arr.shape[0]}x{arr.shape[1]} to {h}x{w}: "
            "target must ceil-halve onto the source"
        )
    return _up_axis(_up_axis(np.asarray(arr, dtype=np.float64), h, 0), w, 1)


def to_luma(img: PlanarImage) -> PlanarImage:
    """Rec.601 luma Y = 0.299 R + 0.587 G + 0.114 B of a 3-channel image."""
    if img.channels != 3:
        raise ValueError(f"to_luma needs a 3-channel image, got {img.channels}")
    r, g, b = img.plane(0), img.plane(1), img.plane(2)
    # Anchored at B so achromatic pixels (R=G=B) come out bit-exact.
    y = b + LUMA_WEIGHTS[0] * (r - b) + LUMA_WEIGHTS[1] * (g - b)
    return PlanarImage(y)


def _check_pyramid_size(img: PlanarImage, scales: int) -> None:
    if scales < 1:
        raise ValueError(f"scales must be >= 1, got {scales}")
    if min(img.width, img.height) / 2 ** (scales - 1) < MIN_COARSE_SIDE:
        raise ValueError(
            f"image {img.height}x{img.width} too small for {scales} scales "
            f"(coarsest side would drop below {MIN_COARSE_SIDE})"
        )


def gaussian_pyramid(img: PlanarImage, scales: int) -> Pyramid:
    """Blur-and-decimate pyramid; level 0 is the input itself."""
    _check_pyramid_size(img, scales)
    levels = [img]
    current = img.data
    for _ in range(scales - 1):
        current = downsample(current)
        levels.append(PlanarImage(current))
    return Pyramid(tuple(levels), "gaussian")


def laplacian_pyramid(img: PlanarImage, scales: int) -> Pyramid:
    """Band-pass details plus coarsest Gaussian residual.

    detail_i = gaussian_i - upsample(gaussian_{i+1}); the last level is the
    coarsest Gaussian. Values are signed and deliberately unclamped.
    """
    gauss = gaussian_pyramid(img, scales)
    levels = []
    for fine, coarse in zip(gauss.levels, gauss.levels[1:]):
        up = upsample(coarse.data, (fine.height, fine.width))
        levels.append(PlanarImage(fine.data - up))
    levels.append(gauss.levels[-1])
    return Pyramid(tuple(levels), "laplacian")


def reconstruct(pyr: Pyramid) -> PlanarImage:
    """Collapse a Laplacian pyramid back to its source image.

    Upsample-and-add from coarsest to finest. No clamping here: the fusion
    pipeline clamps once, at its very end.
    """
    if pyr.kind != "laplacian":
        raise ValueError(f"reconstruct needs a laplacian pyramid, got kind {pyr.kind!r}")
    acc = pyr.levels[-1].data
    for detail in reversed(pyr.levels[:-1]):
        acc = detail.data + upsample(acc, (detail.height, detail.width))
    return PlanarImage(acc)

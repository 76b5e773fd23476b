"""Scene descriptors: GIST over a Gabor filter bank, and a SURF-style
interest-point pipeline (box-filter Hessian detector, Haar-sum descriptor,
k-means bag of visual words).

The interest-point detector approximates the classic speeded-up scheme with
integral-image box filters; it targets patch similarity, not bit-compatibility
with any particular binary.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..types import Attribute, FeatureVector

GIST_SCALES = 4
GIST_ORIENTATIONS = 8
GIST_GRID = 4
GIST_BASE_FREQ = 0.25          # cycles/pixel at the finest scale
GIST_SIGMA_FACTOR = 0.56       # sigma * frequency, ~1 octave bandwidth

SURF_FILTER_SIZES = (9, 15, 21, 27, 33, 39)
SURF_DET_THRESHOLD = 1e-7
SURF_DESCRIPTOR_DIM = 64

CODEBOOK_MAGIC = b"VDCB"
CODEBOOK_VERSION = 1


# ---------------------------------------------------------------------------
# GIST
# ---------------------------------------------------------------------------

def gabor_kernel(freq: float, theta: float) -> np.ndarray:
    """Real, even-symmetric Gabor kernel with isotropic envelope, zero-mean."""
    sigma = GIST_SIGMA_FACTOR / freq
    half = int(np.ceil(3.0 * sigma))
    y, x = np.mgrid[-half:half + 1, -half:half + 1].astype(np.float64)
    rot = x * np.cos(theta) + y * np.sin(theta)
    kernel = np.exp(-(x ** 2 + y ** 2) / (2.0 * sigma ** 2)) * np.cos(2.0 * np.pi * freq * rot)
    return kernel - kernel.mean()


def _embed_circular(kernel: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Place a kernel centered at the origin of a wrapped canvas; kernels larger
    than the canvas are folded (exact circular aliasing)."""
    h, w = shape
    half = kernel.shape[0] // 2
    canvas = np.zeros(shape)
    ys = (np.arange(-half, half + 1) % h)[:, None]
    xs = (np.arange(-half, half + 1) % w)[None, :]
    np.add.at(canvas, (np.broadcast_to(ys, kernel.shape), np.broadcast_to(xs, kernel.shape)), kernel)
    return canvas


@lru_cache(maxsize=8)
def _gabor_bank_fft(shape: tuple[int, int]):
    """rfft2 of the full scale x orientation bank embedded at ``shape``."""
    ffts = []
    for s in range(GIST_SCALES):
        freq = GIST_BASE_FREQ / (2 ** s)
        for o in range(GIST_ORIENTATIONS):
            theta = o * np.pi / GIST_ORIENTATIONS
            ffts.append(np.fft.rfft2(_embed_circular(gabor_kernel(freq, theta), shape)))
    return ffts


def gist(gray: np.ndarray, image_id: str = "") -> FeatureVector:
    """GIST descriptor: mean absolute Gabor response pooled on a 4x4 grid.

    Channel order is scale-major, then orientation, then pooled cells
    row-major: 4 * 8 * 16 = 512 values. Kernels are zero-mean, so the
    descriptor is invariant to constant intensity offsets.
    """
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise ValidationError(f"gist needs a grayscale image, got shape {g.shape}")
    h, w = g.shape
    h -= h % GIST_GRID
    w -= w % GIST_GRID
    g = g[:h, :w]
    img_fft = np.fft.rfft2(g)
    out = np.empty(GIST_SCALES * GIST_ORIENTATIONS * GIST_GRID * GIST_GRID)
    for idx, kfft in enumerate(_gabor_bank_fft((h, w))):
        resp = np.abs(np.fft.irfft2(img_fft * kfft, s=(h, w)))
        cells = resp.reshape(GIST_GRID, h // GIST_GRID, GIST_GRID, w // GIST_GRID).mean(axis=(1, 3))
        out[idx * 16:(idx + 1) * 16] = cells.ravel()
    return FeatureVector(image_id, Attribute.GIST, out)


# ---------------------------------------------------------------------------
# Interest points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InterestPoint:
    x: float
    y: float
    scale: float
    response: float
    descriptor: np.ndarray


def integral_image(gray: np.ndarray) -> np.ndarray:
    """Zero-padded integral image: ii[y, x] = sum of gray[:y, :x]."""
    g = np.asarray(gray, dtype=np.float64)
    ii = np.zeros((g.shape[0] + 1, g.shape[1] + 1))
    ii[1:, 1:] = g.cumsum(axis=0).cumsum(axis=1)
    return ii


def _box_field(ii, y0, y1, x0, x1, a, b, c, d):
    """Sums over rows [y+a, y+b) x cols [x+c, x+d) for all y in [y0,y1), x in [x0,x1)."""
    return (ii[y0 + b:y1 + b, x0 + d:x1 + d] - ii[y0 + a:y1 + a, x0 + d:x1 + d]
            - ii[y0 + b:y1 + b, x0 + c:x1 + c] + ii[y0 + a:y1 + a, x0 + c:x1 + c])


def hessian_determinant(ii: np.ndarray, size: int) -> np.ndarray:
    """Approximate scale-normalized det(Hessian) for one box-filter size.

    Invalid border positions are filled with -inf so scale stacks align.
    """
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    lobe = size // 3
    half = (size - 1) // 2
    out = np.full((h, w), -np.inf)
    y0, y1 = half, h - half
    x0, x1 = half, w - half
    if y1 <= y0 or x1 <= x0:
        return out

    mid = (lobe - 1) // 2
    dyy = (_box_field(ii, y0, y1, x0, x1, -half, -half + lobe, -mid, mid + 1)
           + _box_field(ii, y0, y1, x0, x1, half - lobe + 1, half + 1, -mid, mid + 1)
           - 2.0 * _box_field(ii, y0, y1, x0, x1, -mid, mid + 1, -mid, mid + 1))
    dxx = (_box_field(ii, y0, y1, x0, x1, -mid, mid + 1, -half, -half + lobe)
           + _box_field(ii, y0, y1, x0, x1, -mid, mid + 1, half - lobe + 1, half + 1)
           - 2.0 * _box_field(ii, y0, y1, x0, x1, -mid, mid + 1, -mid, mid + 1))
    dxy = (_box_field(ii, y0, y1, x0, x1, -lobe, 0, -lobe, 0)
           + _box_field(ii, y0, y1, x0, x1, 1, lobe + 1, 1, lobe + 1)
           - _box_field(ii, y0, y1, x0, x1, -lobe, 0, 1, lobe + 1)
           - _box_field(ii, y0, y1, x0, x1, 1, lobe + 1, -lobe, 0))
    norm = 1.0 / (size * size)
    out[y0:y1, x0:x1] = (dxx * norm) * (dyy * norm) - (0.9 * dxy * norm) ** 2
    return out


def _refine(f_minus: float, f0: float, f_plus: float) -> float:
    # neighbors at the valid-region border are -inf; skip refinement there
    if not (np.isfinite(f_minus) and np.isfinite(f_plus)):
        return 0.0
    denom = f_minus - 2.0 * f0 + f_plus
    if denom == 0.0:
        return 0.0
    return float(np.clip(0.5 * (f_minus - f_plus) / denom, -0.5, 0.5))


def detect_and_describe(gray: np.ndarray, max_points: int = 200,
                        threshold: float = SURF_DET_THRESHOLD) -> list[InterestPoint]:
    """Box-filter Hessian detector with 3x3x3 non-max suppression across
    scales, keeping the strongest ``max_points`` responses, each with a 64-d
    Haar-sum descriptor (L2-normalized; all-zero for flat patches).
    """
    g = np.asarray(gray, dtype=np.float64)
    if g.ndim != 2:
        raise ValidationError(f"detector needs a grayscale image, got shape {g.shape}")
    g = g / 255.0
    ii = integral_image(g)
    stack = np.stack([hessian_determinant(ii, s) for s in SURF_FILTER_SIZES])

    padded = np.pad(stack, 1, mode="constant", constant_values=-np.inf)
    center = padded[1:-1, 1:-1, 1:-1]
    neighbor_max = np.full_like(center, -np.inf)
    for dz in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dz == dy == dx == 0:
                    continue
                view = padded[1 + dz:center.shape[0] + 1 + dz,
                              1 + dy:center.shape[1] + 1 + dy,
                              1 + dx:center.shape[2] + 1 + dx]
                np.maximum(neighbor_max, view, out=neighbor_max)
    is_max = (center > neighbor_max) & (center > threshold)
    is_max[0] = False
    is_max[-1] = False

    sis, ys, xs = np.nonzero(is_max)
    if sis.size == 0:
        return []
    responses = stack[sis, ys, xs]
    order = np.lexsort((sis, xs, ys, -responses))[:max_points]

    points = []
    for idx in order:
        si, y, x = int(sis[idx]), int(ys[idx]), int(xs[idx])
        size = SURF_FILTER_SIZES[si]
        ry = y + _refine(stack[si, y - 1, x], stack[si, y, x], stack[si, y + 1, x])
        rx = x + _refine(stack[si, y, x - 1], stack[si, y, x], stack[si, y, x + 1])
        scale = 1.2 * size / 9.0
        desc = _descriptor(ii, rx, ry, scale)
        points.append(InterestPoint(rx, ry, scale, float(responses[idx]), desc))
    return points


def _descriptor(ii: np.ndarray, x: float, y: float, scale: float) -> np.ndarray:
    """Upright 64-d descriptor: a 20s x 20s grid of Haar responses, summarized
    per 4x4 subregion as (sum dx, sum |dx|, sum dy, sum |dy|).

    Sample and wavelet coordinates are rounded to integers and clamped to the
    image, so points near the border stay well-defined.
    """
    h, w = ii.shape[0] - 1, ii.shape[1] - 1
    s = max(1, int(round(scale)))
    offs = (np.arange(20) - 9.5) * scale
    sy = np.clip(np.round(y + offs).astype(np.int64), 0, h - 1)
    sx = np.clip(np.round(x + offs).astype(np.int64), 0, w - 1)
    yy = np.repeat(sy, 20)
    xx = np.tile(sx, 20)

    y0 = np.clip(yy - s, 0, h)
    y1 = np.clip(yy + s, 0, h)
    x0 = np.clip(xx - s, 0, w)
    x1 = np.clip(xx + s, 0, w)
    yc = np.clip(yy, 0, h)
    xc = np.clip(xx, 0, w)

    def box(a, b, c, d):
        return ii[b, d] - ii[a, d] - ii[b, c] + ii[a, c]

    dx = box(y0, y1, xc, x1) - box(y0, y1, x0, xc)
    dy = box(yc, y1, x0, x1) - box(y0, yc, x0, x1)

    dx = dx.reshape(4, 5, 4, 5)
    dy = dy.reshape(4, 5, 4, 5)
    parts = np.stack([
        dx.sum(axis=(1, 3)),
        np.abs(dx).sum(axis=(1, 3)),
        dy.sum(axis=(1, 3)),
        np.abs(dy).sum(axis=(1, 3)),
    ], axis=-1)
    desc = parts.reshape(-1)
    norm = np.linalg.norm(desc)
    if norm > 0:
        desc = desc / norm
    return desc


# ---------------------------------------------------------------------------
# Bag of visual words
# ---------------------------------------------------------------------------

@dataclass
class CodeBook:
    k: int
    centroids: np.ndarray
    seed: int
    training_size: int
    inertia_history: tuple[float, ...] = ()

    @property
    def dim(self) -> int:
        return int(self.centroids.shape[1])


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (points ** 2).sum(axis=1)[:, None] + (centers ** 2).sum(axis=1)[None, :]
    d2 -= 2.0 * points @ centers.T
    return np.maximum(d2, 0.0)


def build_codebook(descriptors, k: int, seed: int, max_iter: int = 100) -> CodeBook:
    """k-means with k-means++ seeding and Lloyd iterations to convergence.

    Deterministic for a given (seed, descriptor multiset, iteration cap);
    inertia is recorded per assignment step and is non-increasing.
    """
    pts = np.asarray(descriptors, dtype=np.float64)
    if pts.ndim != 2:
        raise ValidationError(f"descriptors must be 2-d, got shape {pts.shape}")
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if np.unique(pts, axis=0).shape[0] < k:
        raise ValidationError(f"need at least {k} distinct descriptors")
    n = pts.shape[0]
    rng = np.random.Generator(np.random.PCG64(seed))

    centers = np.empty((k, pts.shape[1]))
    centers[0] = pts[rng.integers(n)]
    d2 = _squared_distances(pts, centers[:1]).ravel()
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
            choice = rng.choice(n, p=probs)
        else:
            choice = rng.integers(n)
        centers[j] = pts[choice]
        d2 = np.minimum(d2, _squared_distances(pts, centers[j:j + 1]).ravel())

    assign = np.full(n, -1, dtype=np.int64)
    inertia_history: list[float] = []
    for _ in range(max_iter):
        d2 = _squared_distances(pts, centers)
        new_assign = d2.argmin(axis=1)
        inertia_history.append(float(d2[np.arange(n), new_assign].sum()))
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        dists = d2[np.arange(n), assign].copy()
        for j in range(k):
            mask = assign == j
            if mask.any():
                centers[j] = pts[mask].mean(axis=0)
            else:
                far = int(dists.argmax())
                centers[j] = pts[far]
                dists[far] = 0.0
    return CodeBook(k=k, centroids=centers, seed=seed, training_size=n,
                    inertia_history=tuple(inertia_history))


def bow_encode(points, book: CodeBook, image_id: str = "") -> FeatureVector:
    """Histogram over nearest-centroid assignments (ties to the lowest index),
    normalized to sum 1; an empty point list yields the all-zero vector.
    """
    if not points:
        return FeatureVector(image_id, Attribute.SURF, np.zeros(book.k))
    descs = np.stack([p.descriptor for p in points])
    if descs.shape[1] != book.dim:
        raise ValidationError(
            f"descriptor dim {descs.shape[1]} does not match codebook dim {book.dim}"
        )
    assign = _squared_distances(descs, book.centroids).argmin(axis=1)
    hist = np.bincount(assign, minlength=book.k) / len(points)
    return FeatureVector(image_id, Attribute.SURF, hist)


def save_codebook(book: CodeBook, path) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(CODEBOOK_MAGIC)
        fh.write(struct.pack("<BIIqQ", CODEBOOK_VERSION, book.k, book.dim,
                             book.seed, book.training_size))
        fh.write(np.ascontiguousarray(book.centroids, dtype="<f8").tobytes())


def load_codebook(path) -> CodeBook:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != CODEBOOK_MAGIC:
        raise ValidationError(f"{path}: not a codebook file")
    version, k, d, seed, training_size = struct.unpack_from("<BIIqQ", raw, 4)
    if version != CODEBOOK_VERSION:
        raise ValidationError(f"{path}: unsupported codebook version {version}")
    header = 4 + struct.calcsize("<BIIqQ")
    centroids = np.frombuffer(raw, dtype="<f8", count=k * d, offset=header).reshape(k, d).copy()
    return CodeBook(k=k, centroids=centroids, seed=seed, training_size=training_size)

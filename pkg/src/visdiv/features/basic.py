"""Low-level attribute extractors: HSV color histograms, HOG, and texture
(GLCM statistics concatenated with a local-binary-pattern histogram).

All extractors are pure functions of a single image and safe to run in
parallel across images.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..types import Attribute, FeatureVector

HSV_BINS = 32
HOG_CELL = 8
HOG_BINS = 9
HOG_BLOCK = 2
HOG_EPS = 1e-6
GLCM_LEVELS = 8
# Distance-1 offsets at 0, 45, 90, 135 degrees, as (dy, dx) with y growing down.
GLCM_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
GLCM_STAT_NAMES = ("contrast", "correlation", "energy", "homogeneity")


def _require_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValidationError(f"expected a 2-d grayscale image, got shape {img.shape}")
    return img


def rgb_to_hsv(img: np.ndarray):
    """Vectorized RGB -> (H in [0,360), S in [0,1], V in [0,1]).

    Achromatic pixels (max == min, including pure black) get H = 0 and S = 0
    so histogram mass is always exactly 1.
    """
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn

    v = mx
    s = np.divide(delta, mx, out=np.zeros_like(mx), where=mx > 0)

    safe_delta = np.where(delta > 0, delta, 1.0)
    h = np.zeros_like(mx)
    rmax = (delta > 0) & (mx == r)
    gmax = (delta > 0) & (mx == g) & ~rmax
    bmax = (delta > 0) & ~rmax & ~gmax
    h = np.where(rmax, (60.0 * (g - b) / safe_delta) % 360.0, h)
    h = np.where(gmax, 60.0 * (b - r) / safe_delta + 120.0, h)
    h = np.where(bmax, 60.0 * (r - g) / safe_delta + 240.0, h)
    return h, s, v


def color_hsv(img: np.ndarray, image_id: str = "") -> FeatureVector:
    """HSV color distribution: three 32-bin histograms (H over [0,360); S and V
    over [0,1]), each normalized to sum 1, concatenated to a 96-d vector.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValidationError(f"color_hsv needs an RGB image, got shape {img.shape}")
    h, s, v = rgb_to_hsv(img)
    n = h.size

    h_idx = np.minimum((h.ravel() / (360.0 / HSV_BINS)).astype(np.int64), HSV_BINS - 1)
    s_idx = np.minimum((s.ravel() * HSV_BINS).astype(np.int64), HSV_BINS - 1)
    v_idx = np.minimum((v.ravel() * HSV_BINS).astype(np.int64), HSV_BINS - 1)

    hists = [np.bincount(idx, minlength=HSV_BINS) / n for idx in (h_idx, s_idx, v_idx)]
    return FeatureVector(image_id, Attribute.COLOR, np.concatenate(hists))


def _gradients(gray: np.ndarray):
    """Central differences with edge replication."""
    g = gray.astype(np.float64)
    p = np.pad(g, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) * 0.5
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) * 0.5
    return gx, gy


def hog_cells(gray: np.ndarray, cell: int = HOG_CELL, bins: int = HOG_BINS) -> np.ndarray:
    """Magnitude-weighted orientation histograms per cell (unsigned bins over
    [0,180), hard assignment). Returns an array of shape (cells_y, cells_x, bins).
    """
    gray = _require_gray(gray)
    hgt, wid = gray.shape
    cy, cx = hgt // cell, wid // cell
    if cy == 0 or cx == 0:
        raise ValidationError(f"image {gray.shape} smaller than one {cell}x{cell} cell")
    gray = gray[: cy * cell, : cx * cell]
    gx, gy = _gradients(gray)
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    bin_idx = np.minimum((ang / (180.0 / bins)).astype(np.int64), bins - 1)

    rows = np.arange(cy * cell) // cell
    cols = np.arange(cx * cell) // cell
    cell_idx = rows[:, None] * cx + cols[None, :]
    flat = (cell_idx * bins + bin_idx).ravel()
    hist = np.bincount(flat, weights=mag.ravel(), minlength=cy * cx * bins)
    return hist.reshape(cy, cx, bins)


def hog(gray: np.ndarray, image_id: str = "") -> FeatureVector:
    """Dense HOG descriptor: 8x8 cells, 9 unsigned bins, overlapping 2x2 blocks
    with L2-hys normalization (clip 0.2), blocks and cells flattened row-major.

    On the canonical 256x256 image the dimension is 31*31*4*9 = 34596. A
    constant image yields the all-zero descriptor.
    """
    cells = hog_cells(gray)
    cy, cx, bins = cells.shape
    if cy < HOG_BLOCK or cx < HOG_BLOCK:
        raise ValidationError(f"cell grid {cy}x{cx} smaller than a {HOG_BLOCK}x{HOG_BLOCK} block")
    by, bx = cy - HOG_BLOCK + 1, cx - HOG_BLOCK + 1
    # blocks[i, j] = cells[i:i+2, j:j+2] flattened (cells row-major, bins fastest)
    blocks = np.empty((by, bx, HOG_BLOCK * HOG_BLOCK * bins))
    k = 0
    for dy in range(HOG_BLOCK):
        for dx in range(HOG_BLOCK):
            blocks[:, :, k * bins:(k + 1) * bins] = cells[dy:dy + by, dx:dx + bx]
            k += 1
    norms = np.sqrt(np.einsum("ijk,ijk->ij", blocks, blocks) + HOG_EPS ** 2)
    blocks = blocks / norms[:, :, None]
    np.clip(blocks, None, 0.2, out=blocks)
    norms = np.sqrt(np.einsum("ijk,ijk->ij", blocks, blocks) + HOG_EPS ** 2)
    blocks = blocks / norms[:, :, None]
    return FeatureVector(image_id, Attribute.HOG, blocks.ravel())


def quantize_gray(gray: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Uniform quantization of 8-bit gray values into ``levels`` bins."""
    return (np.asarray(gray, dtype=np.int64) * levels) // 256


def glcm_matrix(gray: np.ndarray, offset: tuple[int, int], levels: int = GLCM_LEVELS) -> np.ndarray:
    """Symmetrized, normalized co-occurrence matrix for one (dy, dx) offset."""
    q = quantize_gray(_require_gray(gray), levels)
    dy, dx = offset
    h, w = q.shape
    ys = slice(max(0, -dy), h - max(0, dy))
    xs = slice(max(0, -dx), w - max(0, dx))
    a = q[ys, xs]
    b = q[max(0, dy):h - max(0, -dy), max(0, dx):w - max(0, -dx)]
    counts = np.bincount((a.ravel() * levels + b.ravel()), minlength=levels * levels)
    counts = counts.reshape(levels, levels).astype(np.float64)
    sym = counts + counts.T
    total = sym.sum()
    if total > 0:
        sym /= total
    return sym


def _glcm_props(p: np.ndarray):
    """(contrast, correlation, energy, homogeneity, degenerate) of one GLCM.

    energy is the angular second moment (sum of squared entries). Correlation
    of a zero-variance matrix is 0 by convention, signaled via ``degenerate``.
    """
    levels = p.shape[0]
    i = np.arange(levels, dtype=np.float64)
    diff = i[:, None] - i[None, :]
    contrast = float((p * diff ** 2).sum())
    energy = float((p * p).sum())
    homogeneity = float((p / (1.0 + diff ** 2)).sum())
    px = p.sum(axis=1)
    mu = float((i * px).sum())
    var = float(((i - mu) ** 2 * px).sum())
    if var <= 0.0:
        return contrast, 0.0, energy, homogeneity, True
    corr = float((p * (i[:, None] - mu) * (i[None, :] - mu)).sum() / var)
    return contrast, corr, energy, homogeneity, False


def glcm_stats(gray: np.ndarray, image_id: str = "", levels: int = GLCM_LEVELS) -> FeatureVector:
    """Contrast, correlation, energy, homogeneity for each of the four
    distance-1 offsets: 16 reals in offset-major order.
    """
    vals = []
    degenerate = False
    for off in GLCM_OFFSETS:
        contrast, corr, energy, homog, degen = _glcm_props(glcm_matrix(gray, off, levels))
        degenerate |= degen
        vals.extend((contrast, corr, energy, homog))
    flags = ("glcm_zero_variance",) if degenerate else ()
    return FeatureVector(image_id, Attribute.TEXTURE, np.array(vals), flags=flags)


def lbp_codes(gray: np.ndarray) -> np.ndarray:
    """Radius-1, 8-neighbor LBP code per interior pixel.

    Neighbor order is clockwise from the top-left corner; bit i has weight 2**i
    and fires when neighbor >= center.
    """
    g = _require_gray(gray)
    if g.shape[0] < 3 or g.shape[1] < 3:
        raise ValidationError(f"LBP needs at least a 3x3 image, got {g.shape}")
    c = g[1:-1, 1:-1]
    neighbors = (
        g[:-2, :-2], g[:-2, 1:-1], g[:-2, 2:],   # TL, T, TR
        g[1:-1, 2:],                             # R
        g[2:, 2:], g[2:, 1:-1], g[2:, :-2],      # BR, B, BL
        g[1:-1, :-2],                            # L
    )
    codes = np.zeros(c.shape, dtype=np.int64)
    for bit, nb in enumerate(neighbors):
        codes |= (nb >= c).astype(np.int64) << bit
    return codes


def lbph(gray: np.ndarray, image_id: str = "") -> FeatureVector:
    """256-bin histogram of LBP codes, normalized to sum 1."""
    codes = lbp_codes(gray)
    hist = np.bincount(codes.ravel(), minlength=256) / codes.size
    return FeatureVector(image_id, Attribute.TEXTURE, hist)


def texture(gray: np.ndarray, image_id: str = "") -> FeatureVector:
    """The Texture attribute: GLCM statistics (16) followed by the LBP
    histogram (256), 272-d total.
    """
    g = glcm_stats(gray, image_id)
    l = lbph(gray, image_id)
    return FeatureVector(image_id, Attribute.TEXTURE,
                         np.concatenate([g.values, l.values]), flags=g.flags)

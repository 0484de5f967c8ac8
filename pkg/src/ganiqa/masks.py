"""Binary mask generation mimicking DIBR dis-occlusion holes.

Three mask families are provided: dilated object boundaries (type 1), a
shifted copy of those boundaries (type 2), and unions of size-selected
superpixels (type 3). ``punch_holes`` applies a mask to produce the
degraded training input.
"""

import random
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InvalidParam, MissingFile, NoEligibleSegments
from .validation import check_image, check_mask

SMALL_MAX_PIXELS = 100        # superpixels below this count are "small"
MEDIUM_RANGE = (200, 1000)    # inclusive pixel-count range for "medium"


@dataclass
class SuperpixelLabels:
    labels: np.ndarray  # H x W int array, values in [0, n_segments)
    n_segments: int


def _disk(radius):
    r = int(radius)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    return (yy * yy + xx * xx) <= r * r


def slic_segment(img, n_segments, compactness=10.0, max_iters=10):
    """Segment an image into spatially coherent superpixels.

    Lloyd-style iterations in joint color+position space, seeded on a
    regular grid, followed by 4-connectivity enforcement. Small stray
    components are merged into their largest neighbor.
    """
    arr = check_image(img)
    if n_segments < 1:
        raise InvalidParam("n_segments must be >= 1")
    if compactness <= 0:
        raise InvalidParam("compactness must be > 0")
    h, w = arr.shape[:2]
    if n_segments == 1:
        return SuperpixelLabels(labels=np.zeros((h, w), dtype=np.int64), n_segments=1)

    step = np.sqrt(h * w / n_segments)
    ny = max(1, round(h / step))
    nx = max(1, round(w / step))
    # pixel-center coordinates, so an even grid tiles without ties
    cy = (np.arange(ny) + 0.5) * h / ny - 0.5
    cx = (np.arange(nx) + 0.5) * w / nx - 0.5
    centers_pos = np.array([(y, x) for y in cy for x in cx])
    centers_col = np.array(
        [arr[int(round(y)), int(round(x))] for y, x in centers_pos]
    )

    rows, cols = np.mgrid[0:h, 0:w]
    labels = np.full((h, w), -1, dtype=np.int64)
    win = int(np.ceil(2 * step))

    for _ in range(max_iters):
        dist = np.full((h, w), np.inf)
        labels.fill(-1)
        for k, (py, px) in enumerate(centers_pos):
            y0, y1 = max(0, int(py) - win), min(h, int(py) + win + 1)
            x0, x1 = max(0, int(px) - win), min(w, int(px) + win + 1)
            sub = arr[y0:y1, x0:x1]
            dc = ((sub - centers_col[k]) ** 2).sum(axis=2)
            ds = (rows[y0:y1, x0:x1] - py) ** 2 + (cols[y0:y1, x0:x1] - px) ** 2
            d = dc / (compactness**2) + ds / (step**2)
            better = d < dist[y0:y1, x0:x1]
            dist[y0:y1, x0:x1][better] = d[better]
            labels[y0:y1, x0:x1][better] = k

        # pixels outside every search window fall back to nearest center
        if (labels < 0).any():
            miss = labels < 0
            my, mx = rows[miss], cols[miss]
            d_all = (my[:, None] - centers_pos[:, 0]) ** 2 + (
                mx[:, None] - centers_pos[:, 1]
            ) ** 2
            labels[miss] = d_all.argmin(axis=1)

        new_pos = centers_pos.copy()
        new_col = centers_col.copy()
        for k in range(len(centers_pos)):
            sel = labels == k
            if sel.any():
                new_pos[k] = (rows[sel].mean(), cols[sel].mean())
                new_col[k] = arr[sel].mean(axis=0)
        shift = np.abs(new_pos - centers_pos).max()
        centers_pos, centers_col = new_pos, new_col
        if shift < 1e-3:
            break

    labels = _enforce_connectivity(labels, min_size=max(1, (h * w) // len(centers_pos) // 4))
    return SuperpixelLabels(labels=labels, n_segments=int(labels.max()) + 1)


def _enforce_connectivity(labels, min_size):
    """Split disconnected labels into components and absorb tiny ones."""
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    comp = np.full(labels.shape, -1, dtype=np.int64)
    next_id = 0
    for lab in np.unique(labels):
        cc, n = ndimage.label(labels == lab, structure=structure)
        for i in range(1, n + 1):
            comp[cc == i] = next_id
            next_id += 1

    sizes = np.bincount(comp.ravel())
    adj = _adjacency(comp)
    # merge smallest-first so chains of tiny fragments collapse into one
    for lab in np.argsort(sizes):
        if sizes[lab] >= min_size or sizes[lab] == 0:
            continue
        neighbors = adj.get(lab, set())
        if not neighbors:
            continue
        target = max(neighbors, key=lambda n: sizes[n])
        comp[comp == lab] = target
        sizes[target] += sizes[lab]
        sizes[lab] = 0
        for n in neighbors:
            if n != target:
                adj[target].add(n)
                adj[n].discard(lab)
                adj[n].add(target)
        adj[target].discard(lab)
        adj[target].discard(target)
        del adj[lab]

    # compact label ids to 0..n-1
    uniq, compacted = np.unique(comp, return_inverse=True)
    return compacted.reshape(labels.shape)


def _adjacency(labels):
    """Map each label to the set of 4-adjacent labels."""
    adj = {}
    for a, b in (
        (labels[:-1, :], labels[1:, :]),
        (labels[:, :-1], labels[:, 1:]),
    ):
        diff = a != b
        for x, y in zip(a[diff].ravel(), b[diff].ravel()):
            adj.setdefault(int(x), set()).add(int(y))
            adj.setdefault(int(y), set()).add(int(x))
    return adj


def boundary_pixels(seg):
    """Pixels whose segmentation label differs from a 4-neighbor."""
    seg = np.asarray(seg)
    out = np.zeros(seg.shape, dtype=bool)
    out[:-1, :] |= seg[:-1, :] != seg[1:, :]
    out[1:, :] |= seg[1:, :] != seg[:-1, :]
    out[:, :-1] |= seg[:, :-1] != seg[:, 1:]
    out[:, 1:] |= seg[:, 1:] != seg[:, :-1]
    return out


def mask_type1(seg, dilation_radius=7):
    """Dilated object boundaries of a segmentation map."""
    if dilation_radius < 1:
        raise InvalidParam("dilation_radius must be >= 1")
    boundary = boundary_pixels(seg)
    mask = ndimage.binary_dilation(boundary, structure=_disk(dilation_radius))
    return mask.astype(np.uint8)


def mask_type2(mask, shift=(10, 0)):
    """Shift a mask by (dx, dy) pixels; out-of-range reads produce 0."""
    m = check_mask(mask)
    dx, dy = shift
    out = np.zeros_like(m)
    h, w = m.shape
    src_r = slice(max(0, -dy), min(h, h - dy))
    dst_r = slice(max(0, dy), min(h, h + dy))
    src_c = slice(max(0, -dx), min(w, w - dx))
    dst_c = slice(max(0, dx), min(w, w + dx))
    if src_r.start < src_r.stop and src_c.start < src_c.stop:
        out[dst_r, dst_c] = m[src_r, src_c]
    return out


def mask_type3(labels, size_class, rng_seed, fraction=0.25):
    """Union of randomly chosen size-eligible superpixels.

    ``size_class`` is "small" (< 100 pixels) or "medium" (200 to 1000
    pixels). Chosen superpixels are kept mutually non-adjacent so every
    connected hole stays within its size class.
    """
    lab = labels.labels if isinstance(labels, SuperpixelLabels) else np.asarray(labels)
    counts = np.bincount(lab.ravel())
    if size_class == "small":
        eligible = [int(i) for i, c in enumerate(counts) if 0 < c < SMALL_MAX_PIXELS]
    elif size_class == "medium":
        lo, hi = MEDIUM_RANGE
        eligible = [int(i) for i, c in enumerate(counts) if lo <= c <= hi]
    else:
        raise InvalidParam(f"unknown size_class {size_class!r}")
    if not eligible:
        raise NoEligibleSegments(f"no superpixel qualifies as {size_class}")

    n_pick = max(1, round(fraction * len(eligible)))
    rng = random.Random(rng_seed)
    rng.shuffle(eligible)
    adj = _adjacency(lab)
    chosen = []
    for cand in eligible:
        if len(chosen) >= n_pick:
            break
        if any(cand in adj.get(c, set()) for c in chosen):
            continue
        chosen.append(cand)
    mask = np.isin(lab, chosen).astype(np.uint8)
    return mask


def punch_holes(img, mask):
    """Zero out masked pixels; unmasked pixels pass through unchanged."""
    arr = check_image(img)
    m = check_mask(mask, image_shape=arr.shape)
    return arr * (1.0 - m[:, :, None])


def save_mask(mask, path):
    m = check_mask(mask)
    Image.fromarray((m * 255).astype(np.uint8)).convert("1").save(path)


def load_mask(path):
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("1"))
    except FileNotFoundError as exc:
        raise MissingFile(str(path)) from exc
    return arr.astype(np.uint8)

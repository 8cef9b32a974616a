"""Synthetic inputs with known answers, plus brute-force oracles.

Pattern generators produce maps and tensors whose metric values are
predictable by construction: checkerboards decorrelate at one pixel,
pure sinusoids put their power at a known frequency, step edges put all
gradient on one line. The scene generator builds piecewise-constant
layouts with region labels, and the encoder-pair generator derives two
feature pyramids from one scene: a region labeler (high structural
coherence, low edge fidelity) and a boundary detector (the reverse,
sharpest at stride 16). The oracles are deliberately naive
re-implementations used only to cross-check the fast paths.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import BadSpec, TooLarge
from .image_ops import ScalarMap, _sobel_xy, resize_nearest
from .numerics import ClusterAssignment, PointMatrix
from .prng import Stream, derive, normals
from .tensor_store import (
    FEATURE_STRIDES,
    EncoderFeatureSet,
    FeatureTensor,
    LabelMap,
)

# Per-stride ridge width (pixels) and white-noise fraction for the
# boundary-detector flavor. The widths make stride 16 the sharpest
# stage in its own grid, so its edge fidelity peaks there.
EDGE_SIGMA = {4: 3.0, 8: 1.8, 16: 0.7, 32: 2.0}
EDGE_NOISE = {4: 0.05, 8: 0.05, 16: 0.05, 32: 0.05}

# Region-labeler flavor: embedding blur (pixels) and noise fraction.
STRUCT_BLUR = 2.5
STRUCT_NOISE = 0.01


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic map or tensor."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> SynthSpec:
        if not isinstance(doc, dict) or "kind" not in doc:
            raise BadSpec("synth spec needs a kind")
        params = {k: v for k, v in doc.items() if k not in ("kind", "seed")}
        return cls(doc["kind"], params, int(doc.get("seed", 0)))


def _need(params: dict, *names: str) -> list:
    missing = [n for n in names if n not in params]
    if missing:
        raise BadSpec(f"missing parameters: {', '.join(missing)}")
    return [params[n] for n in names]


def _grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    return np.arange(h)[:, None], np.arange(w)[None, :]


def generate(spec: SynthSpec):
    """Build the map or tensor a spec describes."""
    p = dict(spec.params)
    kind = spec.kind

    if kind == "checkerboard":
        h, w = _need(p, "h", "w")
        cell = int(p.get("cell", 1))
        if cell < 1:
            raise BadSpec(f"cell must be >= 1, got {cell}")
        ys, xs = _grid(h, w)
        values = np.where(((ys // cell) + (xs // cell)) % 2 == 0, 1.0, -1.0)
        return ScalarMap(values.astype(np.float32), "raw")

    if kind == "sinusoid":
        h, w = _need(p, "h", "w")
        fx = float(p.get("fx", 0.0))
        fy = float(p.get("fy", 0.0))
        phase = float(p.get("phase", 0.0))
        ys, xs = _grid(h, w)
        values = np.cos(2.0 * np.pi * (fx * xs + fy * ys) + phase)
        return ScalarMap(values.astype(np.float32), "raw")

    if kind == "step_edge":
        h, w, column = _need(p, "h", "w", "column")
        if not 0 < column < w:
            raise BadSpec(f"column must split the width, got {column} of {w}")
        ys, xs = _grid(h, w)
        values = (xs >= column).astype(np.float32) * np.ones((h, 1), dtype=np.float32)
        return ScalarMap(values, "raw")

    if kind == "disc":
        h, w, cy, cx, radius = _need(p, "h", "w", "cy", "cx", "radius")
        ys, xs = _grid(h, w)
        inside = (ys - cy) ** 2 + (xs - cx) ** 2 <= radius**2
        values = np.where(inside, float(p.get("inside", 1.0)), float(p.get("outside", 0.0)))
        return ScalarMap(values.astype(np.float32), "raw")

    if kind == "noise":
        h, w = _need(p, "h", "w")
        amplitude = float(p.get("amplitude", 1.0))
        values = amplitude * normals(derive(spec.seed, "noise"), h * w).reshape(h, w)
        return ScalarMap(values.astype(np.float32), "raw")

    if kind == "piecewise_tensor":
        h, w = _need(p, "h", "w")
        by = int(p.get("blocks_y", 2))
        bx = int(p.get("blocks_x", 2))
        c = int(p.get("channels", 1))
        if by < 1 or bx < 1 or c < 1:
            raise BadSpec("blocks and channels must be >= 1")
        levels = Stream(derive(spec.seed, "piecewise")).uniforms(by * bx * c)
        levels = levels.reshape(c, by, bx)
        ys = np.minimum(np.arange(h) * by // h, by - 1)
        xs = np.minimum(np.arange(w) * bx // w, bx - 1)
        data = levels[:, ys[:, None], xs[None, :]]
        return FeatureTensor(data.astype(np.float32), int(p.get("stride", 4)))

    if kind == "ridge_tensor":
        h, w, c = _need(p, "h", "w", "channels")
        column = int(p.get("column", w // 2))
        sigma = float(p.get("sigma", 0.8))
        noise = float(p.get("noise", 0.05))
        _, xs = _grid(h, w)
        ridge = np.exp(-((xs - column) ** 2) / (2.0 * sigma**2)) * np.ones((h, 1))
        gains = 0.6 + 0.8 * Stream(derive(spec.seed, "ridge-gains")).uniforms(c)
        data = gains[:, None, None] * ridge[None, :, :]
        data += noise * normals(derive(spec.seed, "ridge-noise"), c * h * w).reshape(c, h, w)
        return FeatureTensor(data.astype(np.float32), int(p.get("stride", 16)))

    raise BadSpec(f"unknown synth kind {kind!r}")


def blur_tensor(tensor: FeatureTensor, sigma: float) -> FeatureTensor:
    """Gaussian blur of each channel; the standard degraded variant."""
    if sigma <= 0:
        raise BadSpec(f"sigma must be positive, got {sigma}")
    data = ndimage.gaussian_filter(
        tensor.data.astype(np.float64), sigma=(0.0, sigma, sigma), mode="nearest"
    )
    return FeatureTensor(data.astype(np.float32), tensor.stride)


def make_scene(
    seed: int = 0,
    size: int = 640,
    n_rects: int = 5,
    n_discs: int = 3,
) -> tuple[ScalarMap, LabelMap]:
    """Piecewise-constant scene of rectangles and discs over a background.

    Returns the grayscale image and the matching segment labels.
    Region ids start at 1 (background); 0 stays reserved for ignore.
    Gray levels are a shuffled even spread so neighboring regions always
    contrast.
    """
    if size < 64:
        raise BadSpec(f"scene size must be >= 64, got {size}")
    n_shapes = n_rects + n_discs
    stream = Stream(derive(seed, "scene"))

    levels = np.linspace(0.08, 0.92, n_shapes + 1)
    levels = levels[stream.permutation(n_shapes + 1)]

    ids = np.ones((size, size), dtype=np.uint16)
    ys, xs = _grid(size, size)
    for i in range(n_rects):
        u = stream.uniforms(4)
        y0 = int(u[0] * size * 0.7)
        x0 = int(u[1] * size * 0.7)
        hh = int(size * (0.12 + 0.28 * u[2]))
        ww = int(size * (0.12 + 0.28 * u[3]))
        ids[y0 : min(size, y0 + hh), x0 : min(size, x0 + ww)] = 2 + i
    for i in range(n_discs):
        u = stream.uniforms(3)
        cy = int(size * (0.15 + 0.7 * u[0]))
        cx = int(size * (0.15 + 0.7 * u[1]))
        radius = size * (0.06 + 0.1 * u[2])
        ids[(ys - cy) ** 2 + (xs - cx) ** 2 <= radius**2] = 2 + n_rects + i

    image = levels[ids - 1]
    return ScalarMap(image.astype(np.float32), "raw"), LabelMap(ids)


def _boundary_mask(ids: np.ndarray) -> np.ndarray:
    b = np.zeros(ids.shape, dtype=bool)
    b[:-1, :] |= ids[:-1, :] != ids[1:, :]
    b[1:, :] |= ids[:-1, :] != ids[1:, :]
    b[:, :-1] |= ids[:, :-1] != ids[:, 1:]
    b[:, 1:] |= ids[:, :-1] != ids[:, 1:]
    return b


def make_encoder_set(
    flavor: str,
    image: ScalarMap,
    labels: LabelMap,
    seed: int = 0,
    channels: int = 16,
    encoder_id: str | None = None,
) -> EncoderFeatureSet:
    """Derive a four-stage feature pyramid of the requested flavor.

    "structure" embeds each region as a constant channel vector and
    blurs it: a region labeler. "edge" responds along region boundaries
    with a per-stride ridge width from EDGE_SIGMA: a boundary detector.
    """
    if flavor not in ("structure", "edge"):
        raise BadSpec(f"flavor must be structure or edge, got {flavor!r}")
    name = encoder_id or f"synth-{flavor}"
    tensors: dict[int, FeatureTensor] = {}
    max_id = int(labels.ids.max())
    embeddings = normals(derive(seed, "embeddings"), (max_id + 1) * channels)
    embeddings = embeddings.reshape(max_id + 1, channels)

    for stride in FEATURE_STRIDES:
        h = -(-image.height // stride)
        w = -(-image.width // stride)
        ids_s = resize_nearest(labels.ids, (h, w))
        if flavor == "structure":
            data = embeddings[ids_s].transpose(2, 0, 1)
            data = ndimage.gaussian_filter(
                data, sigma=(0.0, STRUCT_BLUR, STRUCT_BLUR), mode="nearest"
            )
            noise_amp = STRUCT_NOISE
        else:
            # Contrast-weighted boundary response: strong edges in the
            # image draw proportionally strong features, like a real
            # boundary detector would.
            img_s = resize_nearest(image.values.astype(np.float64), (h, w))
            gx, gy = _sobel_xy(img_s)
            ridge = ndimage.gaussian_filter(
                np.hypot(gx, gy), sigma=EDGE_SIGMA[stride], mode="nearest"
            )
            peak = ridge.max()
            if peak > 0:
                ridge /= peak
            gains = 0.6 + 0.8 * Stream(derive(seed, "gains", stride)).uniforms(channels)
            data = gains[:, None, None] * ridge[None, :, :]
            noise_amp = EDGE_NOISE[stride]
        noise = normals(derive(seed, flavor, "noise", stride), channels * h * w)
        data = data + noise_amp * noise.reshape(channels, h, w)
        tensors[stride] = FeatureTensor(data.astype(np.float32), stride)

    return EncoderFeatureSet(name, image, tensors, labels)


def make_encoder_pair(
    seed: int = 0,
    size: int = 640,
    channels: int = 16,
) -> tuple[EncoderFeatureSet, EncoderFeatureSet]:
    """One scene, two pyramids: (structure flavor, edge flavor)."""
    image, labels = make_scene(seed, size)
    structure = make_encoder_set(
        "structure", image, labels, derive(seed, "structure"), channels
    )
    edge = make_encoder_set("edge", image, labels, derive(seed, "edge"), channels)
    return structure, edge


# ----- oracles: slow by design, used only to vet the fast paths -----


def oracle_silhouette(points: PointMatrix, assign: ClusterAssignment) -> float:
    """Definitional silhouette: per-point loops over explicit distances."""
    n = points.n
    if n > 2000:
        raise TooLarge(f"oracle capped at 2000 points, got {n}")
    x = points.data.astype(np.float64)
    labels = assign.labels
    counts = np.bincount(labels, minlength=assign.k)
    scores = []
    for i in range(n):
        dists = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
        own = labels[i]
        if counts[own] == 1:
            scores.append(0.0)
            continue
        a = dists[labels == own].sum() / (counts[own] - 1)
        b = np.inf
        for c in range(assign.k):
            if c == own or counts[c] == 0:
                continue
            b = min(b, dists[labels == c].mean())
        denom = max(a, b)
        scores.append(0.0 if denom == 0 else (b - a) / denom)
    return float(np.mean(scores))


def oracle_dft_power(m: ScalarMap) -> np.ndarray:
    """Textbook DFT power spectrum, one output bin at a time."""
    h, w = m.values.shape
    if h > 64 or w > 64:
        raise TooLarge(f"oracle capped at 64x64, got {h}x{w}")
    v = m.values.astype(np.float64)
    ys, xs = _grid(h, w)
    power = np.empty((h, w), dtype=np.float64)
    for u in range(h):
        for vv in range(w):
            phase = -2.0j * np.pi * (u * ys / h + vv * xs / w)
            power[u, vv] = np.abs((v * np.exp(phase)).sum()) ** 2
    return power


def oracle_distance_transform(mask: np.ndarray) -> np.ndarray:
    """Exhaustive nearest-set-pixel distance for every pixel."""
    m = np.asarray(mask, dtype=bool)
    if m.size > 16384:
        raise TooLarge(f"oracle capped at 16384 pixels, got {m.size}")
    h, w = m.shape
    out = np.full((h, w), np.inf)
    set_pts = np.argwhere(m)
    if set_pts.size == 0:
        return out
    for y in range(h):
        for x in range(w):
            d2 = ((set_pts[:, 0] - y) ** 2 + (set_pts[:, 1] - x) ** 2).min()
            out[y, x] = np.sqrt(d2)
    return out


def oracle_pca_scores(points: PointMatrix, n_components: int) -> tuple[np.ndarray, np.ndarray]:
    """PCA via eigendecomposition of the sample covariance matrix."""
    n, d = points.n, points.d
    if n > 4096 or d > 256:
        raise TooLarge(f"oracle capped at 4096x256, got {n}x{d}")
    x = points.data.astype(np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    keep = min(n_components, d, n - 1)
    for i in range(keep):
        j = int(np.argmax(np.abs(eigvecs[:, i])))
        if eigvecs[j, i] < 0:
            eigvecs[:, i] = -eigvecs[:, i]
    scores = centered @ eigvecs[:, :keep]
    return scores, eigvals[:keep]


def oracle_kmeans_inertia(points: PointMatrix, k: int) -> float:
    """Globally optimal k-means inertia by enumerating every labeling."""
    n = points.n
    if k**n > 200000:
        raise TooLarge(f"oracle cannot enumerate {k}^{n} labelings")
    x = points.data.astype(np.float64)
    best = np.inf
    for labeling in itertools.product(range(k), repeat=n):
        lab = np.array(labeling)
        inertia = 0.0
        for c in range(k):
            members = x[lab == c]
            if len(members):
                inertia += ((members - members.mean(axis=0)) ** 2).sum()
        best = min(best, inertia)
    return float(best)


def inertia_of(points: PointMatrix, assign: ClusterAssignment) -> float:
    """Within-cluster sum of squared distances for a given assignment."""
    x = points.data.astype(np.float64)
    total = 0.0
    for c in range(assign.k):
        members = x[assign.labels == c]
        if len(members):
            total += ((members - members.mean(axis=0)) ** 2).sum()
    return float(total)

"""
Pull-push hole filling.

Holes next to known pixels take the mean of their known 4-neighbors; the rest
take the value of a coarser level built by 2x2 known-weighted averaging. Every
filled value is a convex combination of known values, so fills never leave the
[min, max] range of the input.
"""
import numpy as np

from .errors import DegenerateInputError


def pull_push_fill(values: np.ndarray, known: np.ndarray) -> np.ndarray:
    """Fill `values` (HxW or HxWxC) where `known` is False; returns float64."""
    known = np.asarray(known, dtype=bool)
    if values.shape[:2] != known.shape:
        raise ValueError(f"values {values.shape[:2]} and known {known.shape} differ in size")
    if not known.any():
        raise DegenerateInputError("nothing to propagate from: every pixel is a hole")
    v = values.astype(np.float64)
    squeeze = v.ndim == 2
    if squeeze:
        v = v[..., None]
    out = _fill_level(v, known)
    return out[..., 0] if squeeze else out


def fill_rgb(image: np.ndarray, holes: np.ndarray) -> np.ndarray:
    """uint8 RGB pull-push fill; pixels outside `holes` are returned untouched."""
    holes = np.asarray(holes, dtype=bool)
    filled = pull_push_fill(image, ~holes)
    out = image.copy()
    out[holes] = np.clip(np.rint(filled[holes]), 0, 255).astype(np.uint8)
    return out


def _fill_level(v: np.ndarray, known: np.ndarray) -> np.ndarray:
    if known.all():
        return v
    out = v.copy()
    out[~known] = 0.0

    # Mean of known 4-neighbors.
    k = known.astype(np.float64)
    kp = np.pad(k, 1)
    vp = np.pad(out * k[..., None], ((1, 1), (1, 1), (0, 0)))
    n_sum = kp[:-2, 1:-1] + kp[2:, 1:-1] + kp[1:-1, :-2] + kp[1:-1, 2:]
    v_sum = vp[:-2, 1:-1] + vp[2:, 1:-1] + vp[1:-1, :-2] + vp[1:-1, 2:]
    near = ~known & (n_sum > 0)
    out[near] = v_sum[near] / n_sum[near][:, None]

    rest = ~known & ~near
    if rest.any():
        coarse, coarse_known = _pull(out, known)
        filled = _fill_level(coarse, coarse_known)
        up = np.repeat(np.repeat(filled, 2, axis=0), 2, axis=1)[:v.shape[0], :v.shape[1]]
        out[rest] = up[rest]
    return out


def _pull(v: np.ndarray, known: np.ndarray):
    """2x2 known-weighted average; odd edges are padded with zero weight."""
    h, w = known.shape
    ph, pw = h % 2, w % 2
    wgt = np.pad(known.astype(np.float64), ((0, ph), (0, pw)))
    val = np.pad(v, ((0, ph), (0, pw), (0, 0))) * wgt[..., None]

    hh, ww = wgt.shape[0] // 2, wgt.shape[1] // 2
    w_sum = wgt.reshape(hh, 2, ww, 2).sum(axis=(1, 3))
    v_sum = val.reshape(hh, 2, ww, 2, -1).sum(axis=(1, 3))
    coarse_known = w_sum > 0
    coarse = np.zeros_like(v_sum)
    coarse[coarse_known] = v_sum[coarse_known] / w_sum[coarse_known][:, None]
    return coarse, coarse_known

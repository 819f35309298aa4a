"""Z2 cubical relative homology and local Morse homology.

Sublevel pairs (X, A) = ({f <= c} n box, {f <= c - delta} n box) are realized
on a node grid: an elementary cube belongs to a mask when all its vertices
do, which makes both complexes closed and A a closed subcomplex of X.  The
homology of the pair is computed from boundary matrices over GF(2), with
ranks obtained by bit-packed Gaussian elimination.

The sampling is an approximation; the correctness gate is stabilization of
the graded ranks across the two finest grid resolutions, plus an Euler
characteristic cross-check against the Brouwer degree of the gradient
computed independently by boundary winding (plane fields only).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    CriticalValueInWindow,
    NotIsolated,
    NotStabilized,
    WindingUnresolved,
)
from .fields import Box, SampledField

__all__ = [
    "GradedRanks",
    "CubicalPair",
    "sublevel_pair",
    "relative_homology_z2",
    "local_morse_homology",
    "MorseReport",
    "gradient_degree",
]


# ------------------------------------------------------------- graded ranks


@dataclass(frozen=True)
class GradedRanks:
    """Finitely supported map degree -> rank."""

    items: tuple

    @classmethod
    def from_dict(cls, d: Dict[int, int]) -> "GradedRanks":
        cleaned = {int(k): int(v) for k, v in d.items() if v != 0}
        if any(v < 0 for v in cleaned.values()):
            raise ValueError("ranks must be nonnegative")
        return cls(items=tuple(sorted(cleaned.items())))

    def as_dict(self) -> Dict[int, int]:
        return dict(self.items)

    def rank(self, degree: int) -> int:
        return dict(self.items).get(degree, 0)

    @property
    def total(self) -> int:
        return sum(r for _, r in self.items)

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(d for d, _ in self.items)

    def euler(self) -> int:
        return sum((-1) ** d * r for d, r in self.items)

    def shift(self, s: int) -> "GradedRanks":
        return GradedRanks(items=tuple((d + s, r) for d, r in self.items))

    def convolve(self, other: "GradedRanks") -> "GradedRanks":
        out: Dict[int, int] = {}
        for d1, r1 in self.items:
            for d2, r2 in other.items:
                out[d1 + d2] = out.get(d1 + d2, 0) + r1 * r2
        return GradedRanks.from_dict(out)

    def to_json(self) -> Dict[str, int]:
        return {str(d): r for d, r in self.items}

    @classmethod
    def from_json(cls, data: Dict[str, int]) -> "GradedRanks":
        return cls.from_dict({int(k): int(v) for k, v in data.items()})


# ------------------------------------------------------- complexes and rank


def _cube_mask(node_mask: np.ndarray, dirs: Tuple[int, ...]) -> np.ndarray:
    """Mask of cubes spanned along dirs whose vertices all pass."""
    out = node_mask
    for ax in dirs:
        lo = [slice(None)] * out.ndim
        hi = [slice(None)] * out.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        out = out[tuple(lo)] & out[tuple(hi)]
    return out


@dataclass(frozen=True)
class CubicalPair:
    """Node masks for the pair (X, A); cells are derived lazily."""

    x_mask: np.ndarray
    a_mask: np.ndarray
    delta: float

    @property
    def m(self) -> int:
        return self.x_mask.ndim

    def __post_init__(self):
        if self.x_mask.shape != self.a_mask.shape:
            raise ValueError("mask shapes differ")
        if np.any(self.a_mask & ~self.x_mask):
            raise ValueError("A not contained in X")

    def relative_cell_masks(self, d: int) -> Dict[Tuple[int, ...], np.ndarray]:
        out = {}
        for dirs in combinations(range(self.m), d):
            out[dirs] = _cube_mask(self.x_mask, dirs) & ~_cube_mask(self.a_mask, dirs)
        return out


def _gf2_rank(nrows: int, ncols: int, rows: np.ndarray, cols: np.ndarray) -> int:
    if nrows == 0 or ncols == 0 or len(rows) == 0:
        return 0
    words = (ncols + 63) // 64
    mat = np.zeros((nrows, words), dtype=np.uint64)
    np.bitwise_or.at(
        mat,
        (rows, cols >> 6),
        np.uint64(1) << (cols.astype(np.uint64) & np.uint64(63)),
    )
    rank = 0
    one = np.uint64(1)
    for col in range(ncols):
        w = col >> 6
        bit = one << np.uint64(col & 63)
        candidates = np.nonzero(mat[rank:, w] & bit)[0]
        if candidates.size == 0:
            continue
        p = rank + int(candidates[0])
        if p != rank:
            mat[[rank, p]] = mat[[p, rank]]
        others = np.nonzero(mat[:, w] & bit)[0]
        others = others[others != rank]
        if others.size:
            mat[others] ^= mat[rank]
        rank += 1
        if rank == nrows:
            break
    return rank


def relative_homology_z2(pair: CubicalPair) -> GradedRanks:
    """Ranks of H_*(X, A; Z2) by boundary-matrix elimination."""
    m = pair.m
    cell_masks = [pair.relative_cell_masks(d) for d in range(m + 1)]
    ids: List[Dict[Tuple[int, ...], np.ndarray]] = []
    counts = []
    for d in range(m + 1):
        offset = 0
        layer = {}
        for dirs, mask in cell_masks[d].items():
            idx = -np.ones(mask.shape, dtype=np.int64)
            cnt = int(np.sum(mask))
            idx[mask] = offset + np.arange(cnt)
            offset += cnt
            layer[dirs] = idx
        ids.append(layer)
        counts.append(offset)

    def boundary_rank(d: int) -> int:
        if d == 0:
            return 0
        rows_all: List[np.ndarray] = []
        cols_all: List[np.ndarray] = []
        for dirs, idx_d in ids[d].items():
            cell_ok = idx_d >= 0
            for ax in dirs:
                sub = tuple(x for x in dirs if x != ax)
                idx_f = ids[d - 1][sub]
                lo_sl = [slice(None)] * m
                hi_sl = [slice(None)] * m
                lo_sl[ax] = slice(0, -1)
                hi_sl[ax] = slice(1, None)
                for face_ids in (idx_f[tuple(lo_sl)], idx_f[tuple(hi_sl)]):
                    keep = cell_ok & (face_ids >= 0)
                    rows_all.append(idx_d[keep])
                    cols_all.append(face_ids[keep])
        if not rows_all:
            return 0
        return _gf2_rank(
            counts[d],
            counts[d - 1],
            np.concatenate(rows_all),
            np.concatenate(cols_all),
        )

    b_rank = [boundary_rank(d) for d in range(m + 1)] + [0]
    ranks = {}
    for d in range(m + 1):
        ranks[d] = counts[d] - b_rank[d] - b_rank[d + 1]
    return GradedRanks.from_dict(ranks)


# ----------------------------------------------------------- sublevel pairs


FieldLike = Union[SampledField, Callable[[np.ndarray], np.ndarray]]


def _as_callable(f: FieldLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, SampledField):
        return f.interpolator()
    return f


def _grid_values(f: FieldLike, box: Box, resolution: int) -> np.ndarray:
    fn = _as_callable(f)
    return np.asarray(fn(box.nodes(resolution)), dtype=float).reshape(
        (resolution,) * box.m
    )


def _grad_grids(
    values: np.ndarray, spacing: float, grad: Optional[Callable], box: Box, resolution: int
) -> np.ndarray:
    if grad is not None:
        g = np.asarray(grad(box.nodes(resolution)), dtype=float)
        return g.reshape((resolution,) * box.m + (box.m,))
    grads = np.gradient(values, spacing, edge_order=2)
    if box.m == 1:
        grads = [grads]
    return np.stack(grads, axis=-1)


def sublevel_pair(
    f: FieldLike,
    c: float,
    delta: float,
    box: Box,
    resolution: int,
    grad: Optional[Callable] = None,
    exclude_fraction: float = 0.5,
) -> CubicalPair:
    """The pair ({f <= c}, {f <= c - delta}) on the box grid.

    Checks that no critical point with value inside [c - delta, c + delta]
    exists away from the center: at any node in the value window outside
    exclude_fraction of the box the gradient must exceed a per-node
    resolution floor 0.75 h |Hess|_F, below which a zero of the gradient
    within one node spacing cannot be ruled out (half-diagonal reach
    h sqrt(m)/2 times operator norm, estimated as |Hess|_F / sqrt(m)).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    values = _grid_values(f, box, resolution)
    h = box.spacing(resolution)
    g = _grad_grids(values, h, grad, box, resolution)
    gnorm = np.linalg.norm(g, axis=-1)
    hess_sq = np.zeros_like(values)
    for i in range(box.m):
        comps = np.gradient(g[..., i], h, edge_order=1)
        if box.m == 1:
            comps = [comps]
        for cgrid in comps:
            hess_sq += cgrid * cgrid
    floor = 0.75 * h * np.sqrt(hess_sq)
    radii = np.max(
        np.abs(box.nodes(resolution) - np.asarray(box.center)), axis=1
    ).reshape(values.shape)
    window = (
        (values >= c - delta)
        & (values <= c + delta)
        & (radii > exclude_fraction * box.radius)
    )
    bad = window & (gnorm <= floor)
    if np.any(bad):
        weakest = float(np.min(gnorm[bad]))
        there = float(np.max(floor[bad]))
        raise CriticalValueInWindow(
            f"gradient norm {weakest:.3e} under resolution floor (up to {there:.3e}) "
            f"at a node with value inside [c - delta, c + delta]"
        )
    snap = 1e-12 * max(1.0, float(np.max(np.abs(values))))
    return CubicalPair(
        x_mask=values <= c + snap,
        a_mask=values <= c - delta,
        delta=delta,
    )


# ------------------------------------------------------ local Morse homology


@dataclass(frozen=True)
class MorseReport:
    ranks: GradedRanks
    resolutions: tuple
    deltas: tuple
    per_resolution: tuple

    def to_json(self) -> dict:
        return {
            "ranks": self.ranks.to_json(),
            "resolutions": list(self.resolutions),
            "deltas": list(self.deltas),
            "per_resolution": [r.to_json() for r in self.per_resolution],
        }


def local_morse_homology(
    f: FieldLike,
    box: Box,
    resolutions: Sequence[int] = (17, 25, 33),
    delta: Optional[float] = None,
    grad: Optional[Callable] = None,
    shell: Tuple[float, float] = (0.25, 1.0),
    exclude_fraction: float = 0.5,
    return_report: bool = False,
):
    """Local Morse homology of f at the origin over Z2.

    Computes sublevel-pair homology at each resolution and requires the
    graded ranks to agree across the two finest (NotStabilized otherwise).
    The critical point must be isolated: the gradient may not vanish on the
    shell annulus (NotIsolated).

    The default delta at each resolution is h times the median gradient
    norm over the box: wide enough that the gap between the sub-c and
    sub-(c - delta) sets resolves on the grid, narrow enough that the
    collar stays inside the box; pass an explicit delta to override.
    """
    if box.m == 4 and max(resolutions) > 33:
        raise ValueError("dimension 4 restricted to resolutions <= 33")
    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions for the stabilization gate")
    res_sorted = sorted(int(r) for r in resolutions)
    fn = _as_callable(f)
    c = float(np.asarray(fn(np.zeros((1, box.m))))[0])

    fine = res_sorted[-1]
    values_fine = _grid_values(f, box, fine)
    h_fine = box.spacing(fine)
    g_fine = _grad_grids(values_fine, h_fine, grad, box, fine)
    radii = np.max(np.abs(box.nodes(fine) - np.asarray(box.center)), axis=1).reshape(
        values_fine.shape
    )
    shell_mask = (radii >= shell[0] * box.radius) & (radii <= shell[1] * box.radius)
    gnorm_shell = np.linalg.norm(g_fine[shell_mask], axis=-1)
    scale = max(float(np.max(np.linalg.norm(g_fine, axis=-1))), 1e-300)
    if float(np.min(gnorm_shell)) <= 1e-9 * scale:
        raise NotIsolated(
            "gradient vanishes on the shell; the critical point is not isolated"
        )

    results = []
    deltas = []
    for res in res_sorted:
        values = _grid_values(f, box, res)
        h = box.spacing(res)
        g = _grad_grids(values, h, grad, box, res)
        if delta is not None:
            d = delta
        else:
            gn = np.linalg.norm(g, axis=-1)
            d = h * max(float(np.median(gn)), 0.05 * float(np.max(gn)))
        pair = sublevel_pair(
            f, c, d, box, res, grad=grad, exclude_fraction=exclude_fraction
        )
        results.append(relative_homology_z2(pair))
        deltas.append(d)
    if results[-1] != results[-2]:
        raise NotStabilized(
            f"ranks {results[-2].as_dict()} at {res_sorted[-2]} vs "
            f"{results[-1].as_dict()} at {res_sorted[-1]}"
        )
    report = MorseReport(
        ranks=results[-1],
        resolutions=tuple(res_sorted),
        deltas=tuple(deltas),
        per_resolution=tuple(results),
    )
    return report if return_report else results[-1]


# ------------------------------------------------------------ degree oracle


def gradient_degree(
    grad: Callable[[np.ndarray], np.ndarray],
    radius: float,
    samples: int = 512,
    max_samples: int = 1 << 16,
) -> int:
    """Brouwer degree of a plane vector field at 0 via boundary winding."""
    n = samples
    while True:
        t = np.linspace(0.0, 2.0 * np.pi, n + 1)
        pts = radius * np.stack([np.cos(t), np.sin(t)], axis=1)
        v = np.asarray(grad(pts), dtype=float)
        norms = np.linalg.norm(v, axis=1)
        if float(np.min(norms)) <= 0.0:
            raise WindingUnresolved("vector field vanishes on the probe circle")
        ang = np.arctan2(v[:, 1], v[:, 0])
        incr = np.angle(np.exp(1j * np.diff(ang)))
        if float(np.max(np.abs(incr))) < 0.5 * np.pi:
            total = float(np.sum(incr))
            deg = round(total / (2.0 * np.pi))
            if abs(total / (2.0 * np.pi) - deg) > 0.05:
                raise WindingUnresolved(f"winding {total / (2*np.pi)} not near an integer")
            return int(deg)
        n *= 2
        if n > max_samples:
            raise WindingUnresolved("boundary winding did not resolve")

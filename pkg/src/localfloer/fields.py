"""Boxes, grids, and sampled scalar fields.

Everything downstream samples functions on axis-aligned cubes centered near
the origin: generating functions on 2n-dimensional boxes, Morse data on
m-dimensional ones.  A Box is a center plus a half-width; grids are uniform
with an odd node count preferred so the center is a node.

Sampled grids serialize to .npy (header carries only dtype and shape, so
output is byte-stable) with a small JSON sidecar for the geometry.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

__all__ = ["Box", "SampledField", "sample_field", "save_field", "load_field"]


@dataclass(frozen=True)
class Box:
    center: tuple
    radius: float

    @property
    def m(self) -> int:
        return len(self.center)

    def axes(self, resolution: int) -> List[np.ndarray]:
        return [
            np.linspace(c - self.radius, c + self.radius, resolution)
            for c in self.center
        ]

    def nodes(self, resolution: int) -> np.ndarray:
        """All grid nodes, shape (resolution**m, m), x-axis fastest last."""
        mesh = np.meshgrid(*self.axes(resolution), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.m)

    def spacing(self, resolution: int) -> float:
        return 2.0 * self.radius / (resolution - 1)

    def contains(self, points: np.ndarray, slack: float = 1e-12) -> np.ndarray:
        p = np.atleast_2d(points)
        c = np.asarray(self.center)
        return np.all(np.abs(p - c) <= self.radius + slack, axis=1)

    def to_json(self) -> dict:
        return {"center": [float(v) for v in self.center], "radius": self.radius}

    @classmethod
    def from_json(cls, data: dict) -> "Box":
        return cls(center=tuple(float(v) for v in data["center"]), radius=float(data["radius"]))


@dataclass(frozen=True)
class SampledField:
    """Node samples of a scalar function on a box grid, shape (res,) * m."""

    box: Box
    values: np.ndarray

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    def __post_init__(self):
        res = self.values.shape[0]
        if self.values.shape != (res,) * self.box.m:
            raise ValueError(
                f"values shape {self.values.shape} does not match box dimension {self.box.m}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def interpolator(self) -> Callable[[np.ndarray], np.ndarray]:
        """Multilinear interpolation on the grid; consistent with node values."""
        from scipy.interpolate import RegularGridInterpolator

        rgi = RegularGridInterpolator(
            tuple(self.box.axes(self.resolution)),
            self.values,
            method="linear",
            bounds_error=False,
            fill_value=None,
        )
        return lambda pts: np.asarray(rgi(np.atleast_2d(pts)), dtype=float)


def sample_field(f: Callable[[np.ndarray], np.ndarray], box: Box, resolution: int) -> SampledField:
    vals = np.asarray(f(box.nodes(resolution)), dtype=float)
    return SampledField(box=box, values=vals.reshape((resolution,) * box.m))


def save_field(field: SampledField, path) -> None:
    base = Path(path)
    np.save(base.with_suffix(".npy"), field.values)
    meta = {"box": field.box.to_json(), "resolution": field.resolution}
    base.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def load_field(path) -> SampledField:
    base = Path(path)
    values = np.load(base.with_suffix(".npy"))
    meta = json.loads(base.with_suffix(".json").read_text())
    return SampledField(box=Box.from_json(meta["box"]), values=values)

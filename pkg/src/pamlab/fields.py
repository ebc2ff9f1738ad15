"""Grid fields on centered boxes Q_r = (-r, r)^d.

A Field stores real values on a uniform cell-centered grid: along each axis
the n cell centers sit at -r + (i + 1/2) h with spacing h = 2r/n, so the box
edges themselves are excluded.  The discrete L2 norm is h^(d/2) times the
Euclidean norm of the values, which makes ||f||_2 = 1 equivalent to the
piecewise-constant density f^2 having unit mass.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec

_MAGIC = b"PAMF"
_VERSION = 1


def grid_centers(box_radius: float, n: int) -> np.ndarray:
    """Cell centers along one axis."""
    h = 2.0 * box_radius / n
    return -box_radius + (np.arange(n) + 0.5) * h


@dataclass(frozen=True)
class Field:
    """Real-valued function sampled on the cell-centered grid over Q_r.

    ``values`` has shape (n,)*d (row-major).  Fields are immutable after
    construction; the value buffer is marked read-only.
    """

    box_radius: float
    values: np.ndarray
    epsilon: float | None = None
    kernel: KernelSpec | None = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if self.box_radius <= 0:
            raise ValueError("box_radius must be positive")
        if vals.ndim < 1 or len({s for s in vals.shape}) != 1:
            raise ValueError("values must be a cubic array of shape (n,)*d")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def points_per_dim(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * self.box_radius / self.points_per_dim

    def axis_centers(self) -> np.ndarray:
        return grid_centers(self.box_radius, self.points_per_dim)

    def meshgrid(self) -> list[np.ndarray]:
        c = self.axis_centers()
        return np.meshgrid(*([c] * self.dimension), indexing="ij")

    def l2_norm(self) -> float:
        return self.h ** (self.dimension / 2) * float(np.linalg.norm(self.values))

    def normalized(self) -> "Field":
        nrm = self.l2_norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero field")
        return self.with_values(self.values / nrm)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(self.box_radius, values, epsilon=self.epsilon, kernel=self.kernel)

    def interp(self, points: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at points of shape (..., d).

        Values outside the grid hull are clamped to the nearest cell center;
        callers that need a hard domain check do it themselves.
        """
        from scipy.ndimage import map_coordinates

        pts = np.asarray(points, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., np.newaxis]
        shape = pts.shape[:-1]
        # center i sits at -r + (i+1/2)h  =>  fractional index (x + r)/h - 1/2
        idx = (pts.reshape(-1, self.dimension).T + self.box_radius) / self.h - 0.5
        out = map_coordinates(self.values, idx, order=1, mode="nearest")
        return out.reshape(shape)

    def nearest_cell_values(self, points: np.ndarray) -> np.ndarray:
        """Value of the containing cell (piecewise-constant evaluation)."""
        pts = np.asarray(points, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., np.newaxis]
        shape = pts.shape[:-1]
        idx = np.floor((pts.reshape(-1, self.dimension) + self.box_radius) / self.h).astype(int)
        idx = np.clip(idx, 0, self.points_per_dim - 1)
        out = self.values[tuple(idx.T)]
        return out.reshape(shape)

    def barycenter(self) -> np.ndarray:
        """Barycenter of the probability density values^2 (after normalization)."""
        g = self.values**2
        mass = g.sum()
        if mass == 0:
            return np.zeros(self.dimension)
        c = self.axis_centers()
        out = np.empty(self.dimension)
        for ax in range(self.dimension):
            other = tuple(i for i in range(self.dimension) if i != ax)
            out[ax] = (g.sum(axis=other) * c).sum() / mass
        return out

    # -- serialization ------------------------------------------------------

    def save(self, path) -> None:
        """Flat binary format: header (d, n, r, eps, kernel block) + LE float64."""
        kern_block = self.kernel.to_config_block().encode() if self.kernel else b""
        eps = float("nan") if self.epsilon is None else float(self.epsilon)
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIId", _VERSION, self.dimension, self.points_per_dim, self.box_radius))
            fh.write(struct.pack("<dI", eps, len(kern_block)))
            fh.write(kern_block)
            fh.write(self.values.astype("<f8").tobytes(order="C"))

    @classmethod
    def load(cls, path) -> "Field":
        with open(path, "rb") as fh:
            if fh.read(4) != _MAGIC:
                raise ValueError("not a field file")
            version, d, n, r = struct.unpack("<IIId", fh.read(20))
            if version != _VERSION:
                raise ValueError(f"unsupported field format version {version}")
            eps, klen = struct.unpack("<dI", fh.read(12))
            kern = KernelSpec.from_config_block(fh.read(klen).decode()) if klen else None
            vals = np.frombuffer(fh.read(8 * n**d), dtype="<f8").reshape((n,) * d)
        return cls(r, vals.copy(), epsilon=None if np.isnan(eps) else eps, kernel=kern)

    def to_csv(self, path_or_buf) -> None:
        """CSV export (small grids): one row per cell, columns x1..xd,value."""
        mesh = self.meshgrid()
        cols = [m.ravel() for m in mesh] + [self.values.ravel()]
        header = ",".join(f"x{i+1}" for i in range(self.dimension)) + ",value"
        data = np.column_stack(cols)
        if isinstance(path_or_buf, (str, bytes)) or hasattr(path_or_buf, "__fspath__"):
            with open(path_or_buf, "w", newline="\n") as fh:
                _write_csv(fh, header, data)
        else:
            _write_csv(path_or_buf, header, data)


def _write_csv(fh, header, data):
    fh.write(header + "\n")
    for row in data:
        fh.write(",".join(repr(v) for v in row) + "\n")


def field_from_function(box_radius: float, n: int, d: int, func, **meta) -> Field:
    """Sample a callable func(points (..., d) -> values) on the grid."""
    c = grid_centers(box_radius, n)
    mesh = np.meshgrid(*([c] * d), indexing="ij")
    pts = np.stack(mesh, axis=-1)
    return Field(box_radius, np.asarray(func(pts), dtype=float), **meta)


def inner(a: Field, b: Field) -> float:
    """Discrete L2 inner product h^d sum(a*b); grids must match."""
    if a.values.shape != b.values.shape or a.box_radius != b.box_radius:
        raise ValueError("fields live on different grids")
    return a.h**a.dimension * float(np.vdot(a.values, b.values))

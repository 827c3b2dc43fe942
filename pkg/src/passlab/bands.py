"""Level-band regions around a center level and the distance-quotient cutoff.

The partition is driven by a center level c and half-width eps:

    A-range = [c - 2 eps, c + 2 eps]   (deformation band, minus the fixed set D)
    B-range = [c - eps,   c - 0.6 eps] (pushed up)
    C-range = [c + 0.6 eps, c + eps]   (pushed down)

The cutoff is

    psi(u) = (dC - dB) dXA / ((dC + dB) dXA + dB dC)

with dB = dist(u, B), dC = dist(u, C), dXA = dist(u, complement of A).
It equals +1 on B, -1 on C and 0 outside the band and on D, exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegeneratePartition, EmptyRegion, InvalidRegionSpec
from .fields import DomainBox, ScalarField

# Minimum separation (in units of eps) between D's value range and the
# B/C value ranges; closer specs make the cutoff quotient degenerate.
D_SEPARATION = 0.05

_UNDERFLOW = 1e-300


class RegionTag(Enum):
    OUTSIDE = "OUTSIDE"
    D = "D"
    B = "B"
    C = "C"
    A_OTHER = "A_OTHER"


@dataclass(frozen=True)
class DeformationParams:
    c: float
    eps: float
    min_grad_floor: float = 1e-8

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be > 0")
        if self.min_grad_floor <= 0:
            raise ValueError("min_grad_floor must be > 0")


@dataclass(frozen=True)
class RegionSpec:
    """Specification of the fixed set D: empty, a level set, or a point cloud."""

    kind: str = "empty"  # "empty" | "level_set" | "point_cloud"
    value: Optional[float] = None
    thickness: Optional[float] = None
    points: Optional[np.ndarray] = None

    @classmethod
    def empty(cls) -> "RegionSpec":
        return cls("empty")

    @classmethod
    def level_set(cls, value: float, thickness: Optional[float] = None) -> "RegionSpec":
        return cls("level_set", value=float(value), thickness=thickness)

    @classmethod
    def point_cloud(cls, points) -> "RegionSpec":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls("point_cloud", points=pts)


@dataclass(frozen=True)
class BandPartition:
    """The regions A, B, C, D induced by a field, a center level and eps."""

    field: ScalarField
    box: DomainBox
    params: DeformationParams
    d_spec: RegionSpec = dc_field(default_factory=RegionSpec.empty)

    def __post_init__(self):
        if self.field.dim != self.box.dim:
            raise ValueError("field and box dimensions differ")
        self._validate_d()

    # value ranges -----------------------------------------------------
    @property
    def a_range(self):
        c, e = self.params.c, self.params.eps
        return (c - 2.0 * e, c + 2.0 * e)

    @property
    def b_range(self):
        c, e = self.params.c, self.params.eps
        return (c - e, c - 0.6 * e)

    @property
    def c_range(self):
        c, e = self.params.c, self.params.eps
        return (c + 0.6 * e, c + e)

    @property
    def d_thickness(self) -> float:
        if self.d_spec.thickness is not None:
            return self.d_spec.thickness
        return 1e-6 * self.params.eps

    def _validate_d(self):
        c, e = self.params.c, self.params.eps
        spec = self.d_spec
        if spec.kind == "empty":
            return
        if spec.kind == "level_set":
            values = np.array([spec.value])
        else:
            if spec.points.shape[1] != self.field.dim:
                raise InvalidRegionSpec("point cloud dimension mismatch")
            values = np.asarray(self.field.evaluate(spec.points))
        lo = c - (0.6 - D_SEPARATION) * e   # keep >= 0.05 eps above B's top
        hi = c + (0.6 - D_SEPARATION) * e   # keep >= 0.05 eps below C's bottom
        lo = max(lo, c - 0.5 * e)           # the fixed set lives in [c-0.5eps, c+eps]
        pad = self.d_thickness
        if np.any(values - pad < lo) or np.any(values + pad > hi):
            raise InvalidRegionSpec(
                f"D values {values} must lie in [{lo}, {hi}] "
                f"(0.05*eps-separated from the B and C value ranges)"
            )

    # membership -------------------------------------------------------
    def in_d(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        spec = self.d_spec
        if spec.kind == "empty":
            return np.zeros(u.shape[:-1], dtype=bool)
        if spec.kind == "level_set":
            phi = self.field.evaluate(u)
            return np.abs(phi - spec.value) <= self.d_thickness
        d, _ = cKDTree(spec.points).query(np.atleast_2d(u))
        out = d <= 1e-12 * max(1.0, self.box.diagonal)
        return out.reshape(u.shape[:-1])

    def classify(self, u) -> np.ndarray:
        """Vectorized region tags; precedence D, OUTSIDE, B, C, A_OTHER."""
        u = np.asarray(u, dtype=float)
        phi = np.asarray(self.field.evaluate(u))
        tags = np.full(phi.shape, RegionTag.A_OTHER, dtype=object)
        a_lo, a_hi = self.a_range
        b_lo, b_hi = self.b_range
        c_lo, c_hi = self.c_range
        tags[(phi >= b_lo) & (phi <= b_hi)] = RegionTag.B
        tags[(phi >= c_lo) & (phi <= c_hi)] = RegionTag.C
        tags[(phi < a_lo) | (phi > a_hi)] = RegionTag.OUTSIDE
        tags[self.in_d(u)] = RegionTag.D
        return tags

    # distance to D ----------------------------------------------------
    def d_distance(self, u) -> np.ndarray:
        """First-order distance estimate to D (exact for affine fields)."""
        u = np.asarray(u, dtype=float)
        spec = self.d_spec
        if spec.kind == "empty":
            return np.full(u.shape[:-1], np.inf)
        if spec.kind == "level_set":
            phi = self.field.evaluate(u)
            gn = np.maximum(self.field.grad_norm(u), self.params.min_grad_floor)
            return np.minimum(np.abs(phi - spec.value) / gn, self.box.diagonal)
        d, _ = cKDTree(spec.points).query(np.atleast_2d(u))
        return d.reshape(u.shape[:-1])


def classify_region(part: BandPartition, u) -> RegionTag:
    """Tag of a single point."""
    u = np.asarray(u, dtype=float)
    return part.classify(u[None, :])[0]


def _slab_distance(phi, lo, hi, anorm):
    """Distance from phi-values to the slab phi in [lo, hi], for ||grad|| = anorm."""
    return np.maximum.reduce([np.zeros_like(phi), lo - phi, phi - hi]) / anorm


class ExactAffineBackend:
    """Closed-form slab distances; valid only for exactly affine fields."""

    name = "exact_affine"

    def __init__(self, part: BandPartition):
        if part.field.affine is None:
            raise ValueError("ExactAffineBackend requires an affine field")
        self.part = part
        a, _ = part.field.affine
        self.anorm = float(np.linalg.norm(a))
        if self.anorm == 0.0:
            raise ValueError("affine field has zero gradient")

    def distances(self, u):
        part = self.part
        u = np.asarray(u, dtype=float)
        phi = part.field.evaluate(u)
        dB = _slab_distance(phi, *part.b_range, self.anorm)
        dC = _slab_distance(phi, *part.c_range, self.anorm)
        a_lo, a_hi = part.a_range
        inside = np.minimum(phi - a_lo, a_hi - phi) / self.anorm
        d_out = np.maximum(inside, 0.0)
        dXA = np.minimum(d_out, part.d_distance(u))
        dXA[part.in_d(u)] = 0.0
        return dB, dC, dXA


class SampledBackend:
    """Rejection-sampled region clouds on a regular grid, with KD-tree lookup.

    Reported distances err from true set distances by at most one grid-cell
    diagonal; membership is decided exactly from phi-values so the cutoff's
    plateau values stay exact.
    """

    name = "sampled"

    def __init__(self, part: BandPartition, resolution: int = 201):
        if resolution < 3:
            raise ValueError("resolution must be >= 3 per axis")
        self.part = part
        self.resolution = resolution
        box = part.box
        axes = [np.linspace(box.lo[i], box.hi[i], resolution) for i in range(box.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        phi = part.field.evaluate(pts)
        b_lo, b_hi = part.b_range
        c_lo, c_hi = part.c_range
        a_lo, a_hi = part.a_range
        self.clouds = {
            "B": pts[(phi >= b_lo) & (phi <= b_hi)],
            "C": pts[(phi >= c_lo) & (phi <= c_hi)],
            "OUT": pts[(phi < a_lo) | (phi > a_hi)],
        }
        self.trees = {k: (cKDTree(v) if len(v) else None) for k, v in self.clouds.items()}
        self.cell_diagonal = float(np.linalg.norm(
            [(box.hi[i] - box.lo[i]) / (resolution - 1) for i in range(box.dim)]))

    def _cloud_distance(self, key, u):
        tree = self.trees[key]
        if tree is None:
            raise EmptyRegion(f"region {key} has no sampled points inside the box")
        d, _ = tree.query(np.atleast_2d(u))
        return d.reshape(np.asarray(u).shape[:-1])

    def distances(self, u):
        part = self.part
        u = np.asarray(u, dtype=float)
        phi = part.field.evaluate(u)
        b_lo, b_hi = part.b_range
        c_lo, c_hi = part.c_range
        a_lo, a_hi = part.a_range
        dB = self._cloud_distance("B", u)
        dB = np.where((phi >= b_lo) & (phi <= b_hi), 0.0, dB)
        dC = self._cloud_distance("C", u)
        dC = np.where((phi >= c_lo) & (phi <= c_hi), 0.0, dC)
        d_out = self._cloud_distance("OUT", u)
        dXA = np.minimum(d_out, part.d_distance(u))
        dXA = np.where((phi < a_lo) | (phi > a_hi), 0.0, dXA)
        dXA = np.asarray(dXA)
        dXA[part.in_d(u)] = 0.0
        return dB, dC, dXA


def build_backend(part: BandPartition, kind: str = "sampled", resolution: int = 201):
    if kind == "exact_affine":
        return ExactAffineBackend(part)
    if kind == "sampled":
        return SampledBackend(part, resolution)
    raise ValueError(f"unknown backend kind {kind!r}")


def region_distance(part: BandPartition, backend, u, region: str):
    """Distance from u to one of B, C, or the complement of A."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    dB, dC, dXA = backend.distances(u[None, :] if single else u)
    pick = {"B": dB, "C": dC, "complement_of_A": dXA}
    try:
        d = pick[region]
    except KeyError:
        raise ValueError(f"region must be one of {sorted(pick)}, got {region!r}")
    return float(d[0]) if single else d


def psi(part: BandPartition, backend, u):
    """The cutoff value(s) at u; in [-1, 1] with exact plateaus.

    Plateau values (+1 on B, -1 on C, 0 outside the band and on D) are
    resolved from phi-membership alone; set distances are only queried for
    the interpolation region between the plateaus, so configurations whose
    B or C band is empty still deform their plateau points.
    """
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    U = u[None, :] if single else u
    phi = np.asarray(part.field.evaluate(U))
    a_lo, a_hi = part.a_range
    b_lo, b_hi = part.b_range
    c_lo, c_hi = part.c_range
    zero = (phi < a_lo) | (phi > a_hi) | part.in_d(U)
    in_b = (phi >= b_lo) & (phi <= b_hi) & ~zero
    in_c = (phi >= c_lo) & (phi <= c_hi) & ~zero
    out = np.zeros(phi.shape)
    out[in_b] = 1.0
    out[in_c] = -1.0
    rest = ~(zero | in_b | in_c)
    if np.any(rest):
        dB, dC, dXA = backend.distances(U[rest])
        num = (dC - dB) * dXA
        den = (dC + dB) * dXA + dB * dC
        tiny = den < _UNDERFLOW
        if np.any(tiny & (np.abs(num) >= _UNDERFLOW)):
            raise DegeneratePartition(
                "cutoff denominator underflowed while the numerator did not "
                "(the fixed set D touches B or C)")
        out[rest] = np.where(tiny, 0.0, num / np.where(tiny, 1.0, den))
    return float(out[0]) if single else out


def export_region_clouds(part: BandPartition, backend, path: str):
    """CSV dump (coords, phi, tag) of the backend's cached region clouds."""
    if not isinstance(backend, SampledBackend):
        raise ValueError("only the sampled backend caches region clouds")
    dim = part.field.dim
    header = ["x", "y", "z"][:dim] + ["phi", "tag"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for tag, pts in backend.clouds.items():
            if len(pts) == 0:
                continue
            phis = part.field.evaluate(pts)
            for p, v in zip(pts, phis):
                w.writerow([*map(float, p), float(v), tag])

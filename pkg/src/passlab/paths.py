"""Discrete paths with exactly pinned nodes, and their nodewise deformation.

A path is M+1 nodes at parameters t_i = i/M, with M a multiple of 4.  In
"interior" pin mode the nodes at t = 1/4 and t = 1/2 are pinned to the two
anchor points (both path endpoints stay free); "endpoints" mode pins t = 0
and t = 1 instead.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .errors import InvalidM, PinMoved
from .fields import DomainBox, ScalarField
from .flow import DeformationField, FlowConfig, eta_batch


@dataclass(frozen=True)
class MountainPassInstance:
    field: ScalarField
    box: DomainBox
    pin_zero: np.ndarray
    pin_e: np.ndarray
    pin_mode: str = "interior"  # "interior" | "endpoints"
    radius: Optional[float] = None

    def __post_init__(self):
        z = np.asarray(self.pin_zero, dtype=float)
        e = np.asarray(self.pin_e, dtype=float)
        object.__setattr__(self, "pin_zero", z)
        object.__setattr__(self, "pin_e", e)
        if z.shape != (self.field.dim,) or e.shape != (self.field.dim,):
            raise ValueError("pin dimensions must match the field")
        if np.array_equal(z, e):
            raise ValueError("the two pins must differ")
        if self.pin_mode not in ("interior", "endpoints"):
            raise ValueError(f"unknown pin mode {self.pin_mode!r}")
        if self.radius is not None:
            if self.radius <= 0:
                raise ValueError("radius must be > 0")
            if self.pin_mode == "endpoints" and np.linalg.norm(e) <= self.radius:
                raise ValueError("endpoints mode requires ||e|| > radius")

    def pinned_indices(self, M: int):
        if self.pin_mode == "interior":
            return (M // 4, M // 2)
        return (0, M)


@dataclass
class DiscretePath:
    nodes: np.ndarray          # (M+1, dim)
    pinned: tuple              # (index of the zero-pin, index of the e-pin)

    @property
    def M(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def params(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.nodes.shape[0])

    def copy(self) -> "DiscretePath":
        return DiscretePath(self.nodes.copy(), self.pinned)

    def to_csv(self, path: str, field: Optional[ScalarField] = None):
        dim = self.nodes.shape[1]
        header = ["index", "t"] + [f"x{i+1}" for i in range(dim)]
        phis = None
        if field is not None:
            header.append("phi")
            phis = field.evaluate(self.nodes)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i, (t, p) in enumerate(zip(self.params, self.nodes)):
                row = [i, float(t), *map(float, p)]
                if phis is not None:
                    row.append(float(phis[i]))
                w.writerow(row)


def _check_m(M: int):
    if M < 8 or M % 4 != 0:
        raise InvalidM(f"M must be a multiple of 4 and >= 8, got {M}")


def make_path(inst: MountainPassInstance, M: int, init: str = "axis",
              scale: float = 0.1, seed: int = 0) -> DiscretePath:
    """Build a pinned path.

    "axis": straight line between the pins on the pinned segment; free
    prefix collapsed on the zero-pin and free suffix on the e-pin.
    "jitter": axis plus Gaussian noise of the given scale on free nodes.
    """
    _check_m(M)
    i0, i1 = inst.pinned_indices(M)
    nodes = np.empty((M + 1, inst.field.dim))
    nodes[: i0 + 1] = inst.pin_zero
    frac = np.linspace(0.0, 1.0, i1 - i0 + 1)[:, None]
    nodes[i0: i1 + 1] = (1.0 - frac) * inst.pin_zero + frac * inst.pin_e
    nodes[i1:] = inst.pin_e
    if init == "jitter":
        rng = np.random.default_rng(seed)
        noise = rng.normal(0.0, scale, size=nodes.shape)
        noise[i0] = 0.0
        noise[i1] = 0.0
        nodes = inst.box.clip(nodes + noise)
        nodes[i0] = inst.pin_zero
        nodes[i1] = inst.pin_e
    elif init != "axis":
        raise ValueError(f"unknown init {init!r}")
    return DiscretePath(nodes, (i0, i1))


def path_extrema(inst: MountainPassInstance, path: DiscretePath,
                 samples_per_segment: int = 0) -> dict:
    """Node-level extrema, optionally refined by linear segment subsamples.

    Arg indices refer to nodes; a subsample inside segment [i, i+1] is
    attributed to node i.  Ties break toward the lowest index.
    """
    vals = np.asarray(inst.field.evaluate(path.nodes))
    cand_vals = [vals]
    cand_idx = [np.arange(path.M + 1, dtype=float)]
    if samples_per_segment > 0:
        s = samples_per_segment
        frac = (np.arange(1, s + 1) / (s + 1))[None, :, None]
        seg = (1.0 - frac) * path.nodes[:-1, None, :] + frac * path.nodes[1:, None, :]
        sv = np.asarray(inst.field.evaluate(seg.reshape(-1, path.nodes.shape[1])))
        cand_vals.append(sv)
        cand_idx.append(np.repeat(np.arange(path.M, dtype=float), s) + 0.5)
    allv = np.concatenate(cand_vals)
    alli = np.concatenate(cand_idx)
    order = np.lexsort((alli,))  # stable sort by candidate index
    allv, alli = allv[order], alli[order]
    imin = int(np.argmin(allv))   # first occurrence = lowest index on ties
    imax = int(np.argmax(allv))
    return {
        "min_value": float(allv[imin]),
        "min_arg_index": int(alli[imin]),
        "max_value": float(allv[imax]),
        "max_arg_index": int(alli[imax]),
    }


def deform_path(df: DeformationField, cfg: FlowConfig,
                path: DiscretePath) -> DiscretePath:
    """Apply the deformation to every node; pins must be preserved exactly."""
    if path.nodes.shape[1] != df.field.dim:
        raise ValueError("path dimension does not match the deformation field")
    images = eta_batch(df, cfg, path.nodes)
    for idx in path.pinned:
        if np.any(images[idx] != path.nodes[idx]):
            raise PinMoved(
                f"pinned node {idx} moved from {path.nodes[idx].tolist()} "
                f"to {images[idx].tolist()}")
    return DiscretePath(images, path.pinned)


@dataclass
class PathEnsemble:
    members: list
    seed: int

    def __post_init__(self):
        Ms = {m.M for m in self.members}
        pins = {m.pinned for m in self.members}
        if len(Ms) > 1 or len(pins) > 1:
            raise ValueError("ensemble members must share M and pin indices")

    def dump(self, out_dir: str, field: Optional[ScalarField] = None):
        os.makedirs(out_dir, exist_ok=True)
        names = []
        for i, m in enumerate(self.members):
            fn = f"member_{i:03d}.csv"
            m.to_csv(os.path.join(out_dir, fn), field)
            names.append(fn)
        manifest = {"seed": self.seed, "members": names,
                    "M": self.members[0].M if self.members else None}
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)

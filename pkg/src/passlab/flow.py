"""Pseudo-gradient flow driven by the cutoff, and its property checker.

The vector field is

    f(u) = psi(u) * grad(u) / ||grad(u)||^2     where psi(u) != 0
         = 0                                    where psi(u) = 0

and the deformation is eta(u) = sigma(T, u) with horizon T = 2 eps, where
sigma solves dsigma/dt = f(sigma), sigma(0) = u.  Points with a zero field
at the start are returned bit-identically (the unique constant solution),
so the fixed-point property is machine-exact rather than tolerance-based.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field, asdict
from typing import Optional

import numpy as np

from .bands import BandPartition, RegionTag, psi as psi_fn
from .errors import EmptyRegion, VectorFieldSingular
from .fields import ScalarField


@dataclass(frozen=True)
class DeformationField:
    field: ScalarField
    part: BandPartition
    backend: object

    def __post_init__(self):
        if self.field is not self.part.field and self.field.dim != self.part.field.dim:
            raise ValueError("field and partition dimensions differ")

    def psi(self, u):
        return psi_fn(self.part, self.backend, u)

    @property
    def horizon(self) -> float:
        return 2.0 * self.part.params.eps


@dataclass(frozen=True)
class FlowConfig:
    """Fixed-step integrator settings; step defaults to horizon/1000."""

    step: Optional[float] = None
    record_every: int = 1

    def grid(self, horizon: float):
        step = self.step if self.step is not None else horizon / 1000.0
        if step <= 0 or step > horizon:
            raise ValueError("need 0 < step <= horizon")
        n = max(1, round(horizon / step))
        return n, horizon / n


@dataclass
class Trajectory:
    times: np.ndarray            # (n_rec,)
    points: np.ndarray           # (n_rec, dim)
    phi_values: np.ndarray
    psi_values: np.ndarray
    confined_in: Optional[RegionTag]
    clamped: bool

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def to_csv(self, path: str):
        dim = self.points.shape[1]
        header = ["t"] + [f"x{i+1}" for i in range(dim)] + ["phi", "psi"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t, p, ph, ps in zip(self.times, self.points,
                                    self.phi_values, self.psi_values):
                w.writerow([float(t), *map(float, p), float(ph), float(ps)])


def vector_field(df: DeformationField, u):
    """f at u; exact zero vector wherever psi vanishes."""
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    U = u[None, :] if single else u
    psi_vals = np.asarray(df.psi(U))
    out = np.zeros_like(U)
    active = psi_vals != 0.0
    if np.any(active):
        g = df.field.gradient(U[active])
        gn = np.linalg.norm(g, axis=-1)
        floor = df.part.params.min_grad_floor
        if np.any(gn < floor):
            bad = U[active][gn < floor][0]
            raise VectorFieldSingular(
                f"||grad|| < {floor} at {bad.tolist()} where the cutoff is nonzero")
        out[active] = (psi_vals[active] / gn ** 2)[:, None] * g
    return out[0] if single else out


def _integrate_batch(df: DeformationField, cfg: FlowConfig, U0: np.ndarray):
    """RK4 on a batch of starts; returns (times, records, clamped, frozen).

    records has shape (n_rec, N, dim).  Rows whose field is exactly zero at
    the start are frozen to their initial value (bit-equal constant solution).
    Rows that leave the box are clamped to it and flagged.
    """
    box = df.part.box
    n, h = cfg.grid(df.horizon)
    rec = sorted(set(range(0, n + 1, cfg.record_every)) | {n})
    f0 = vector_field(df, U0)
    frozen = np.all(f0 == 0.0, axis=-1)
    U = U0.copy()
    clamped = np.zeros(len(U0), dtype=bool)
    records = [U0.copy()]
    times = [0.0]
    rec_set = set(rec)
    for k in range(1, n + 1):
        k1 = vector_field(df, U)
        k2 = vector_field(df, U + (0.5 * h) * k1)
        k3 = vector_field(df, U + (0.5 * h) * k2)
        k4 = vector_field(df, U + h * k3)
        U = U + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        Uc = box.clip(U)
        clamped |= np.any(Uc != U, axis=-1)
        U = Uc
        U[frozen] = U0[frozen]
        if k in rec_set:
            records.append(U.copy())
            times.append(k * h)
    return np.asarray(times), np.stack(records), clamped, frozen


def integrate_flow(df: DeformationField, cfg: FlowConfig, u) -> Trajectory:
    """Solve the flow from a single start over [0, 2 eps]."""
    u = np.asarray(u, dtype=float)
    f0 = vector_field(df, u)
    if np.all(f0 == 0.0):
        times = np.array([0.0, df.horizon])
        pts = np.stack([u, u])
        tags = df.part.classify(pts)
        conf = tags[0] if tags[0] == tags[1] else None
        return Trajectory(times, pts,
                          np.asarray(df.field.evaluate(pts)),
                          np.asarray(df.psi(pts)),
                          conf, False)
    times, rec, clamped, _ = _integrate_batch(df, cfg, u[None, :])
    pts = rec[:, 0, :]
    tags = df.part.classify(pts)
    conf = tags[0] if all(t == tags[0] for t in tags) else None
    return Trajectory(times, pts,
                      np.asarray(df.field.evaluate(pts)),
                      np.asarray(df.psi(pts)),
                      conf, bool(clamped[0]))


def eta(df: DeformationField, cfg: FlowConfig, u):
    """Deformation endpoint sigma(2 eps, u)."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        f0 = vector_field(df, u)
        if np.all(f0 == 0.0):
            return u.copy()
        _, rec, _, _ = _integrate_batch(df, cfg, u[None, :])
        return rec[-1, 0, :]
    return eta_batch(df, cfg, u)


def eta_batch(df: DeformationField, cfg: FlowConfig, U):
    U = np.asarray(U, dtype=float)
    _, rec, _, _ = _integrate_batch(df, cfg, U)
    return rec[-1]


@dataclass
class DeformationReport:
    samples: int
    seed: int
    hypothesis_min_grad: float
    a_prime_checked: int
    a_prime_violations: int
    b_prime: dict
    c_prime: dict
    eq31_max_residual: float
    eq31_intervals_used: int
    eq31_intervals_excluded: int
    speed_checked_states: int
    speed_violations: int
    speed_max_norm: float
    clamped_trajectories: int

    def to_dict(self) -> dict:
        return asdict(self)


def verify_deformation(df: DeformationField, cfg: FlowConfig, samples: int,
                       seed: int, tol: float = 1e-3) -> DeformationReport:
    """Sample-based audit of the deformation's claimed properties.

    The fixed-point check is bit-exact on points outside the band or in D.
    The push-up/push-down conclusions are reported both conditionally
    (trajectories confined to B resp. C for the whole horizon) and as the
    unconditional fraction that reached the target level.  The derivative
    identity d/dt phi(sigma) = psi(sigma) is audited by finite differences
    over record intervals whose endpoints and spatial midpoint share one
    region tag; intervals straddling a region boundary are excluded and
    counted, because the midpoint stencil is only second-order accurate
    away from the cutoff's derivative kinks.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    part = df.part
    c, eps = part.params.c, part.params.eps
    rng = np.random.default_rng(seed)
    U0 = part.box.sample(rng, samples)
    phi0 = np.asarray(df.field.evaluate(U0))
    tags0 = part.classify(U0)

    a_lo, a_hi = part.a_range
    band = (phi0 >= a_lo) & (phi0 <= a_hi)
    gn0 = df.field.grad_norm(U0)
    hyp_min = float(np.min(gn0[band])) if np.any(band) else float("nan")

    in_b = tags0 == RegionTag.B
    in_c = tags0 == RegionTag.C
    if not np.any(in_b):
        raise EmptyRegion("no sampled points fell in B inside the box")
    if not np.any(in_c):
        raise EmptyRegion("no sampled points fell in C inside the box")

    times, rec, clamped, frozen = _integrate_batch(df, cfg, U0)
    finals = rec[-1]

    # fixed-point property on OUTSIDE and D samples (bit-exact)
    fixed_mask = (tags0 == RegionTag.OUTSIDE) | (tags0 == RegionTag.D)
    a_checked = int(np.sum(fixed_mask))
    a_viol = int(np.sum(np.any(finals[fixed_mask] != U0[fixed_mask], axis=-1)))

    # recorded phi / psi / tags over the whole batch
    n_rec, N, dim = rec.shape
    flat = rec.reshape(-1, dim)
    phis = np.asarray(df.field.evaluate(flat)).reshape(n_rec, N)
    psis = np.asarray(df.psi(flat)).reshape(n_rec, N)
    tags = part.classify(flat).reshape(n_rec, N)

    ok = ~clamped  # clamped trajectories are excluded from property stats

    def push_record(mask_region, target_check, confined_tag):
        m = mask_region & ok
        sampled = int(np.sum(mask_region))
        confined = np.all(tags == confined_tag, axis=0) & m
        phi_end = phis[-1]
        satisfied = confined & target_check(phi_end)
        reached = m & target_check(phi_end)
        return {
            "sampled": sampled,
            "confined": int(np.sum(confined)),
            "confined_satisfying": int(np.sum(satisfied)),
            "unconditional_fraction": float(np.sum(reached) / max(1, np.sum(m))),
        }

    b_rec = push_record(in_b, lambda p: p >= c + eps - tol, RegionTag.B)
    b_prime = {"sampled_B": b_rec["sampled"],
               "confined_in_B": b_rec["confined"],
               "confined_satisfying": b_rec["confined_satisfying"],
               "unconditional_fraction_reaching_c_plus_eps":
                   b_rec["unconditional_fraction"]}
    c_rec = push_record(in_c, lambda p: p <= c - eps + tol, RegionTag.C)
    c_prime = {"sampled_C": c_rec["sampled"],
               "confined_in_C": c_rec["confined"],
               "confined_satisfying": c_rec["confined_satisfying"],
               "unconditional_fraction_reaching_c_minus_eps":
                   c_rec["unconditional_fraction"]}

    # derivative identity residual over uniform-tag record intervals
    dt = np.diff(times)[:, None]
    dphi = np.diff(phis, axis=0)
    mids = 0.5 * (rec[:-1] + rec[1:])
    psi_mid = np.asarray(df.psi(mids.reshape(-1, dim))).reshape(n_rec - 1, N)
    tag_mid = part.classify(mids.reshape(-1, dim)).reshape(n_rec - 1, N)
    same = (tags[:-1] == tags[1:]) & (tags[:-1] == tag_mid) & ok[None, :]
    resid = np.abs(dphi / dt - psi_mid)
    used = int(np.sum(same))
    excluded = int(np.sum(~same & ok[None, :]))
    eq31 = float(np.max(resid[same])) if used else float("nan")

    # speed bound over all recorded states with ||grad|| >= 2 eps
    gns = df.field.grad_norm(flat).reshape(n_rec, N)
    with np.errstate(divide="ignore", invalid="ignore"):
        fnorm = np.where(psis != 0.0, np.abs(psis) / gns, 0.0)
    check = gns >= 2.0 * eps
    bound = 1.0 / (2.0 * eps) + 1e-12
    speed_viol = int(np.sum(fnorm[check] > bound))
    speed_max = float(np.max(fnorm[check])) if np.any(check) else 0.0

    return DeformationReport(
        samples=samples, seed=seed,
        hypothesis_min_grad=hyp_min,
        a_prime_checked=a_checked, a_prime_violations=a_viol,
        b_prime=b_prime, c_prime=c_prime,
        eq31_max_residual=eq31,
        eq31_intervals_used=used, eq31_intervals_excluded=excluded,
        speed_checked_states=int(np.sum(check)), speed_violations=speed_viol,
        speed_max_norm=speed_max,
        clamped_trajectories=int(np.sum(clamped)),
    )

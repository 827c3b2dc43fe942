"""Scalar fields on bounded boxes: evaluation, analytic gradients, audit.

All fields are vectorized: points may be a single vector of shape (dim,)
or a batch of shape (..., dim).
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidPoint

MAX_POLY_DEGREE = 8


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned box in R^n, n in {1, 2, 3}."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("lo and hi must be 1-D arrays of equal length")
        if lo.size not in (1, 2, 3):
            raise ValueError("box dimension must be 1, 2 or 3")
        if not np.all(lo < hi):
            raise ValueError("need lo[i] < hi[i] on every axis")

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.all((u >= self.lo) & (u <= self.hi), axis=-1)

    def clip(self, u) -> np.ndarray:
        return np.clip(np.asarray(u, dtype=float), self.lo, self.hi)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n uniform points in the box, shape (n, dim)."""
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))


@dataclass(frozen=True)
class ScalarField:
    """A scalar functional with analytic gradient.

    eval_fn maps (..., dim) -> (...); grad_fn maps (..., dim) -> (..., dim).
    Both must be deterministic. affine holds (a, b) coefficients when the
    field is exactly a . u + b, enabling closed-form set distances.
    """

    name: str
    dim: int
    eval_fn: Callable[[np.ndarray], np.ndarray] = dc_field(repr=False)
    grad_fn: Callable[[np.ndarray], np.ndarray] = dc_field(repr=False)
    affine: Optional[tuple] = None

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 0 or u.shape[-1] != self.dim:
            raise InvalidPoint(
                f"field {self.name!r} has dim {self.dim}, got point shape {u.shape}"
            )
        return u

    def evaluate(self, u) -> np.ndarray:
        u = self._check(u)
        return self.eval_fn(u)

    def gradient(self, u) -> np.ndarray:
        u = self._check(u)
        return self.grad_fn(u)

    def grad_norm(self, u) -> np.ndarray:
        return np.linalg.norm(self.gradient(u), axis=-1)


def affine_field(a=(1.0, 0.0), b: float = 0.0, name: str = "affine") -> ScalarField:
    a = np.asarray(a, dtype=float)

    def ev(u):
        return u @ a + b

    def gr(u):
        return np.broadcast_to(a, u.shape).copy()

    return ScalarField(name, a.size, ev, gr, affine=(a, float(b)))


def paraboloid_field(dim: int = 2) -> ScalarField:
    def ev(u):
        return np.sum(u * u, axis=-1)

    def gr(u):
        return 2.0 * u

    return ScalarField("paraboloid", dim, ev, gr)


def saddle_field() -> ScalarField:
    def ev(u):
        return u[..., 0] ** 2 - u[..., 1] ** 2

    def gr(u):
        return np.stack([2.0 * u[..., 0], -2.0 * u[..., 1]], axis=-1)

    return ScalarField("saddle", 2, ev, gr)


def well_to_saddle_field() -> ScalarField:
    """phi(x, y) = x^2 (x - 2)^2 + y^2: wells at x=0 and x=2, saddle at x=1."""

    def ev(u):
        x, y = u[..., 0], u[..., 1]
        return x * x * (x - 2.0) ** 2 + y * y

    def gr(u):
        x, y = u[..., 0], u[..., 1]
        gx = 2.0 * x * (x - 2.0) * (2.0 * x - 2.0)
        return np.stack([gx, 2.0 * y], axis=-1)

    return ScalarField("well_to_saddle", 2, ev, gr)


def exp_decay_field() -> ScalarField:
    """phi(x, y) = exp(-x) + y^2: no critical point, flattens as x grows."""

    def ev(u):
        return np.exp(-u[..., 0]) + u[..., 1] ** 2

    def gr(u):
        return np.stack([-np.exp(-u[..., 0]), 2.0 * u[..., 1]], axis=-1)

    return ScalarField("exp_decay", 2, ev, gr)


_CATALOG = {
    "affine": affine_field,
    "paraboloid": paraboloid_field,
    "saddle": saddle_field,
    "well_to_saddle": well_to_saddle_field,
    "exp_decay": exp_decay_field,
}

_DEFAULT_BOXES = {
    "affine": ([-1.0, -1.0], [1.0, 1.0]),
    "paraboloid": ([-2.0, -2.0], [2.0, 2.0]),
    "saddle": ([-2.0, -2.0], [2.0, 2.0]),
    "well_to_saddle": ([-1.0, -2.0], [3.0, 2.0]),
    "exp_decay": ([-1.0, -2.0], [12.0, 2.0]),
}


def catalog_field(name: str) -> ScalarField:
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown catalog field {name!r}; have {sorted(_CATALOG)}")


def catalog_names():
    return sorted(_CATALOG)


def default_box(name: str) -> DomainBox:
    lo, hi = _DEFAULT_BOXES[name]
    return DomainBox(np.asarray(lo), np.asarray(hi))


def polynomial_field(dim: int, terms: Sequence[tuple], name: str = "poly") -> ScalarField:
    """Dense multi-index polynomial: terms is a list of (exps, coef).

    exps is a length-dim tuple of nonnegative integer exponents with total
    degree <= 8. Degree-1 polynomials get closed-form affine coefficients.
    """
    parsed = []
    for exps, coef in terms:
        exps = tuple(int(e) for e in exps)
        if len(exps) != dim or any(e < 0 for e in exps):
            raise ValueError(f"bad exponent tuple {exps} for dim {dim}")
        if sum(exps) > MAX_POLY_DEGREE:
            raise ValueError(f"term degree {sum(exps)} exceeds cap {MAX_POLY_DEGREE}")
        parsed.append((exps, float(coef)))

    def ev(u):
        out = np.zeros(u.shape[:-1])
        for exps, coef in parsed:
            term = np.full(u.shape[:-1], coef)
            for ax, e in enumerate(exps):
                if e:
                    term = term * u[..., ax] ** e
            out = out + term
        return out

    def gr(u):
        out = np.zeros(u.shape)
        for exps, coef in parsed:
            for ax, e in enumerate(exps):
                if e == 0:
                    continue
                term = np.full(u.shape[:-1], coef * e)
                for ax2, e2 in enumerate(exps):
                    p = e2 - 1 if ax2 == ax else e2
                    if p:
                        term = term * u[..., ax2] ** p
                out[..., ax] += term
        return out

    affine = None
    if all(sum(exps) <= 1 for exps, _ in parsed):
        a = np.zeros(dim)
        b = 0.0
        for exps, coef in parsed:
            if sum(exps) == 0:
                b += coef
            else:
                a[exps.index(1)] += coef
        affine = (a, b)
    return ScalarField(name, dim, ev, gr, affine=affine)


def gradient_check(field: ScalarField, box: DomainBox, samples: int = 1000,
                   step: float = 1e-4, seed: int = 0) -> dict:
    """Compare analytic gradients to central differences at random points.

    Reports the maximum relative error (absolute where the analytic gradient
    norm is below 1e-8) and the worst offending point.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if step <= 0:
        raise ValueError("step must be > 0")
    rng = np.random.default_rng(seed)
    pts = box.sample(rng, samples)
    analytic = field.gradient(pts)
    fd = np.empty_like(analytic)
    for ax in range(field.dim):
        h = np.zeros(field.dim)
        h[ax] = step
        fd[:, ax] = (field.evaluate(pts + h) - field.evaluate(pts - h)) / (2.0 * step)
    diff = np.linalg.norm(fd - analytic, axis=-1)
    anorm = np.linalg.norm(analytic, axis=-1)
    rel = np.where(anorm < 1e-8, diff, diff / np.maximum(anorm, 1e-300))
    worst = int(np.argmax(rel))
    return {
        "max_rel_error": float(rel[worst]),
        "worst_point": pts[worst].tolist(),
        "samples": samples,
        "step": step,
    }

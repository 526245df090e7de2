"""Catalog of scalar test functions on P^2.

Each observable is a bounded function of the canonical unit homogeneous
representative, carries a smoothness tag, and a grid-estimated norm.  Norm
estimates scale reported constants only; they never enter fitted rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParam
from .projective import canonicalize_rows

NORM_GRID_SIDE = 256
NORM_GRID_RADIUS = 2.0


@dataclass(frozen=True)
class Observable:
    name: str
    params: dict
    smoothness: str  # "C1", "C2", or "Holder(alpha)"
    norm_estimate: float
    fn: Callable = field(compare=False)

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        return self.fn(Z)


def _bump_profile(r2: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def _make_affine_bump(params):
    cx = complex(params.get("cx", 0.0))
    cy = complex(params.get("cy", 0.0))
    radius = float(params.get("radius", 2.0))
    chart = int(params.get("chart", 2))
    if radius <= 0:
        raise InvalidParam("bump radius must be positive")
    others = [j for j in range(3) if j != chart]
    center = np.zeros(2, dtype=complex)
    center[:] = (cx, cy)

    def fn(Z):
        piv = Z[..., chart]
        num = np.abs(Z[..., others[0]] - center[0] * piv) ** 2
        num = num + np.abs(Z[..., others[1]] - center[1] * piv) ** 2
        den = radius**2 * np.abs(piv) ** 2
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r2 = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
        return _bump_profile(r2)

    return fn


def _make_fs_coordinate(params):
    index = int(params.get("index", 0))
    if not 0 <= index <= 2:
        raise InvalidParam("coordinate index must lie in [0, 2]")

    def fn(Z):
        return np.abs(Z[..., index]) ** 2

    return fn


def _make_holder_crease(params):
    alpha = float(params.get("alpha", 0.5))
    index = int(params.get("index", 0))
    level = float(params.get("level", 0.4))
    if not 0 < alpha <= 1:
        raise InvalidParam("Holder exponent must lie in (0, 1]")

    def fn(Z):
        return np.abs(np.abs(Z[..., index]) ** 2 - level) ** alpha

    return fn


def _make_constant(params):
    value = float(params.get("value", 1.0))

    def fn(Z):
        return np.full(Z.shape[:-1], value)

    return fn


def _norm_grid(chart: int = 2):
    rng = np.random.default_rng([0x0B5, chart])
    n = NORM_GRID_SIDE * NORM_GRID_SIDE
    aff = NORM_GRID_RADIUS * np.sqrt(rng.uniform(size=(n, 2))) * np.exp(
        2j * np.pi * rng.uniform(size=(n, 2))
    )
    return aff


def _chart_eval(fn, aff, chart: int = 2):
    Z = np.insert(aff, chart, 1.0, axis=1)
    return fn(canonicalize_rows(Z))


def estimate_norm(fn, smoothness: str, chart: int = 2) -> float:
    """Grid estimate of the C^1/C^2/Holder norm by finite differences."""
    aff = _norm_grid(chart)
    base = _chart_eval(fn, aff, chart)
    sup = float(np.max(np.abs(base)))
    directions = [
        np.array([1.0, 0.0]),
        np.array([1j, 0.0]),
        np.array([0.0, 1.0]),
        np.array([0.0, 1j]),
    ]
    if smoothness.startswith("Holder"):
        alpha = float(smoothness[smoothness.index("(") + 1 : -1])
        quotient = 0.0
        for scale in range(4, 11):
            h = 2.0**-scale
            for e in directions:
                shifted = _chart_eval(fn, aff + h * e, chart)
                quotient = max(quotient, float(np.max(np.abs(shifted - base))) / h**alpha)
        return sup + quotient
    h1 = 1e-3
    grad = 0.0
    for e in directions:
        plus = _chart_eval(fn, aff + h1 * e, chart)
        minus = _chart_eval(fn, aff - h1 * e, chart)
        grad = max(grad, float(np.max(np.abs(plus - minus))) / (2 * h1))
    total = sup + grad
    if smoothness == "C2":
        h2 = 1e-2
        hess = 0.0
        for e in directions:
            plus = _chart_eval(fn, aff + h2 * e, chart)
            minus = _chart_eval(fn, aff - h2 * e, chart)
            hess = max(hess, float(np.max(np.abs(plus - 2 * base + minus))) / h2**2)
        total += hess
    return total


_BUILDERS = {
    "constant": (_make_constant, "C2"),
    "affine-bump": (_make_affine_bump, "C2"),
    "fs-coordinate": (_make_fs_coordinate, "C2"),
    "holder-crease": (_make_holder_crease, None),
}


def observable_catalog(name: str, params: dict = None) -> Observable:
    """Built-in observables: constant, affine-bump, fs-coordinate, holder-crease."""
    params = dict(params or {})
    if name not in _BUILDERS:
        raise InvalidParam(f"unknown observable {name!r}")
    builder, smoothness = _BUILDERS[name]
    fn = builder(params)
    if smoothness is None:
        smoothness = f"Holder({float(params.get('alpha', 0.5))})"
    if name == "constant":
        norm = abs(float(params.get("value", 1.0)))
    else:
        norm = estimate_norm(fn, smoothness)
    return Observable(name=name, params=params, smoothness=smoothness, norm_estimate=norm, fn=fn)

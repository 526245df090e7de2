"""Quasi-potentials, the auxiliary log-log function, the dynamical cut-off,
and the Henon escape-rate Green function.

The truncated quasi-potential of the normalized pullback d^{-n}(f^*)^n omega
telescopes into one-step increments along the orbit:

    v_n(z) = sum_{j<n} d^{-j} u1(f^j(z)) - shift,
    u1(z)  = (1/d) log ||F(z)||   on unit representatives.

The shift is calibrated once on a fixed per-chart point set so that
v_n <= -e there, which makes w_n = -log(-v_n) <= -1 and keeps the cut-off
chi_A = h(w_n / A) well defined.  Values that dive below -1e3 are mapped to
a -inf sentinel instead of raising: potentials appear inside integrands
where singular samples are legitimately discarded by cut-offs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, NonConvergence, ShiftCalibrationError
from .maps import BirationalPair, eval_rows_checked
from .projective import ProjPoint, canonicalize_rows

SENTINEL_FLOOR = -1e3
CALIBRATION_SIDE = 128
CALIBRATION_RADIUS = 2.0


def smoothstep(x):
    """C^2 step h: 0 for x <= -2, 1 for x >= -1, quintic in between."""
    x = np.asarray(x, dtype=float)
    t = np.clip(x + 2.0, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def u1_rows(pair: BirationalPair, Z: np.ndarray) -> np.ndarray:
    """One-step increment (1/d) log ||F(z)|| on unit rows; -inf sentinel."""
    F = pair.fwd.eval_rows(Z)
    nrm = np.linalg.norm(F, axis=-1)
    with np.errstate(divide="ignore"):
        val = np.log(nrm) / pair.d
    return np.where(val < SENTINEL_FLOOR, -np.inf, val)


def u1(pair: BirationalPair, p: ProjPoint) -> float:
    return float(u1_rows(pair, p.coords[None, :])[0])


def calibration_points(chart: int, k: int = 2) -> np.ndarray:
    """Fixed per-chart calibration point set (128^2 points, seeded)."""
    rng = np.random.default_rng([0xCA11B, chart])
    n = CALIBRATION_SIDE * CALIBRATION_SIDE
    aff = CALIBRATION_RADIUS * np.sqrt(rng.uniform(size=(n, k))) * np.exp(
        2j * np.pi * rng.uniform(size=(n, k))
    )
    Z = np.insert(aff, chart, 1.0, axis=1)
    return canonicalize_rows(Z)


def _unshifted_v_rows(pair: BirationalPair, Z: np.ndarray, depth: int) -> np.ndarray:
    total = np.zeros(Z.shape[0])
    cur = np.asarray(Z, dtype=complex)
    alive = np.ones(Z.shape[0], dtype=bool)
    for j in range(depth):
        inc = u1_rows(pair, cur)
        alive &= np.isfinite(inc)
        total = np.where(alive, total + pair.d ** (-j) * np.where(alive, inc, 0.0), -np.inf)
        if j < depth - 1:
            cur, ok = eval_rows_checked(pair.fwd, cur)
            alive &= ok
    return total


@dataclass(frozen=True)
class QuasiPotentialSeries:
    """Truncated quasi-potential with a calibrated normalization shift."""

    pair: BirationalPair
    n: int
    shift: float

    @classmethod
    def calibrate(cls, pair: BirationalPair, n: int) -> "QuasiPotentialSeries":
        """Shift = grid maximum of the unshifted v_n, plus e."""
        if n < 0:
            raise InvalidParam("truncation depth must be >= 0")
        peak = -math.inf
        for chart in range(pair.k + 1):
            vals = _unshifted_v_rows(pair, calibration_points(chart, pair.k), n)
            finite = vals[np.isfinite(vals)]
            if len(finite):
                peak = max(peak, float(finite.max()))
        if not math.isfinite(peak):
            peak = 0.0
        return cls(pair=pair, n=n, shift=peak + math.e)


def v_n_rows(series: QuasiPotentialSeries, Z: np.ndarray, depth: int = None) -> np.ndarray:
    """Shifted quasi-potential at depth <= series depth (default: full)."""
    depth = series.n if depth is None else depth
    if depth < 0 or depth > series.n:
        raise InvalidParam("depth must lie in [0, series.n]")
    return _unshifted_v_rows(series.pair, Z, depth) - series.shift


def v_n(series: QuasiPotentialSeries, p: ProjPoint, depth: int = None) -> float:
    return float(v_n_rows(series, p.coords[None, :], depth)[0])


def w_n_rows(series: QuasiPotentialSeries, Z: np.ndarray) -> np.ndarray:
    v = v_n_rows(series, Z)
    finite = np.isfinite(v)
    if np.any(v[finite] > -math.e):
        raise ShiftCalibrationError(
            "v_n > -e off the calibration grid; recalibrate the shift"
        )
    with np.errstate(divide="ignore"):
        return np.where(finite, -np.log(-v), -np.inf)


def w_n(series: QuasiPotentialSeries, p: ProjPoint) -> float:
    return float(w_n_rows(series, p.coords[None, :])[0])


def chi_A_rows(series: QuasiPotentialSeries, Z: np.ndarray, A: float) -> np.ndarray:
    if A <= 0:
        raise InvalidParam("cut-off scale A must be positive")
    w = w_n_rows(series, Z)
    out = np.zeros_like(w)
    finite = np.isfinite(w)
    out[finite] = smoothstep(w[finite] / A)
    return out


def chi_A(series: QuasiPotentialSeries, p: ProjPoint, A: float) -> float:
    return float(chi_A_rows(series, p.coords[None, :], A)[0])


def green_plus_henon(
    pair: BirationalPair,
    p_affine,
    max_iter: int = 200,
    R_escape: float = 100.0,
) -> float:
    """Escape-rate Green function G+ for a Henon pair, on affine C^2.

    G+(z) = lim d^{-n} log+ ||f^n(z)||; 0 is reported for orbits that stay
    bounded through ``max_iter``.  After escape the tail is accumulated in
    renormalized variables, so the result satisfies G+ o f = d G+ to
    near machine precision.
    """
    if pair.meta.get("family") != "henon":
        raise InvalidParam("escape-rate Green function requires a Henon pair")
    if max_iter < 1 or R_escape < 10:
        raise InvalidParam("need max_iter >= 1 and R_escape >= 10")
    a = pair.meta["a"]
    coeffs = pair.meta["p_coeffs"]
    d = pair.d
    lc = coeffs[-1]
    # radius beyond which |y| >= max(|x|, R) forces monotone escape
    R0 = (sum(abs(c) for c in coeffs[:-1]) + abs(a) + 2.0) / abs(lc)
    R = max(R_escape, R0)

    def p_of(y):
        acc = 0.0 + 0.0j
        for c in reversed(coeffs):
            acc = acc * y + c
        return acc

    x, y = complex(p_affine[0]), complex(p_affine[1])
    for n in range(max_iter + 1):
        ay, ax = abs(y), abs(x)
        if ay >= R and ay >= ax:
            break
        if max(ax, ay) > 1e120:
            raise NonConvergence("orbit grew without meeting the escape criterion")
        x, y = y, p_of(y) - a * x
    else:
        if max(abs(x), abs(y)) <= R_escape:
            return 0.0
        raise NonConvergence("orbit neither escaped nor stayed bounded; raise max_iter")

    # renormalized escape tail: t = x/y, w = 1/y
    G = math.log(abs(y)) / d**n
    t, w = x / y, 1.0 / y
    scale = 1.0 / d ** (n + 1)
    for _ in range(200):
        # rho = y_{j+1} / y_j^d = sum_i c_i w^{d-i} - a t w^{d-1}
        rho = 0.0 + 0.0j
        for i, c in enumerate(coeffs):
            rho += c * w ** (d - i)
        rho -= a * t * w ** (d - 1)
        corr = math.log(abs(rho))
        G += scale * corr
        if abs(w) < 1e-300 or scale * abs(corr) < 1e-16:
            break
        t, w = w ** (d - 1) / rho, w**d / rho
        scale /= d
    return max(G, 0.0)

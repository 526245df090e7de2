"""Homogeneous polynomial maps, FS differentials, and map families.

Iteration is always pointwise (the map applied n times); compositions are
never expanded symbolically, so degrees stay at d per step.  Differentials
of the induced map on P^2 are computed analytically from the homogeneous
Jacobian, expressed between Hermitian-orthonormal frames of the tangent
spaces; all form densities are ratios against omega^k and therefore
independent of the overall metric normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IndeterminacyProximity, InvalidParam
from .projective import ProjPoint, canonicalize_rows, normalize, tangent_frames

EPS_IND = 1e-10


@dataclass(frozen=True)
class HomogeneousPolynomial:
    """Homogeneous polynomial as a table multi-index -> coefficient."""

    degree: int
    terms: tuple  # ((exponents, coefficient), ...)

    @classmethod
    def from_dict(cls, degree: int, coeffs: dict) -> "HomogeneousPolynomial":
        terms = []
        for exps, c in sorted(coeffs.items()):
            if sum(exps) != degree:
                raise InvalidParam(f"multi-index {exps} does not sum to degree {degree}")
            if c != 0:
                terms.append((tuple(exps), complex(c)))
        if not terms:
            raise InvalidParam("polynomial has no nonzero coefficient")
        return cls(degree=degree, terms=tuple(terms))

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z)
        out = np.zeros(Z.shape[:-1], dtype=complex)
        for exps, c in self.terms:
            t = np.full(Z.shape[:-1], c, dtype=complex)
            for j, e in enumerate(exps):
                if e == 1:
                    t = t * Z[..., j]
                elif e > 1:
                    t = t * Z[..., j] ** e
            out += t
        return out

    def partial(self, var: int) -> "HomogeneousPolynomial":
        """Formal partial derivative (may be the zero polynomial)."""
        terms = []
        for exps, c in self.terms:
            if exps[var] > 0:
                new = list(exps)
                new[var] -= 1
                terms.append((tuple(new), c * exps[var]))
        return HomogeneousPolynomial(degree=max(self.degree - 1, 0), terms=tuple(terms))


@dataclass(frozen=True)
class RationalMapRep:
    """A rational map of P^k as k+1 homogeneous components of equal degree."""

    components: tuple
    degree: int
    _partials: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for comp in self.components:
            if comp.degree != self.degree:
                raise InvalidParam("component degrees differ")
        partials = tuple(
            tuple(comp.partial(v) for v in range(len(self.components)))
            for comp in self.components
        )
        object.__setattr__(self, "_partials", partials)

    @property
    def nvars(self) -> int:
        return len(self.components)

    def eval_rows(self, Z: np.ndarray) -> np.ndarray:
        return np.stack([comp(Z) for comp in self.components], axis=-1)

    def jacobian_rows(self, Z: np.ndarray) -> np.ndarray:
        """Homogeneous Jacobian, shape ``(..., k+1, k+1)``."""
        n = self.nvars
        rows = []
        for i in range(n):
            rows.append(np.stack([self._partials[i][j](Z) for j in range(n)], axis=-1))
        return np.stack(rows, axis=-2)


def identity_map(k: int = 2) -> RationalMapRep:
    comps = []
    for i in range(k + 1):
        exps = tuple(1 if j == i else 0 for j in range(k + 1))
        comps.append(HomogeneousPolynomial.from_dict(1, {exps: 1.0}))
    return RationalMapRep(components=tuple(comps), degree=1)


def linear_map(A: np.ndarray) -> RationalMapRep:
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    comps = []
    for i in range(n):
        coeffs = {}
        for j in range(n):
            if A[i, j] != 0:
                exps = tuple(1 if v == j else 0 for v in range(n))
                coeffs[exps] = A[i, j]
        comps.append(HomogeneousPolynomial.from_dict(1, coeffs))
    return RationalMapRep(components=tuple(comps), degree=1)


@dataclass(frozen=True)
class BirationalPair:
    """Forward/backward map pair with indeterminacy data."""

    fwd: RationalMapRep
    bwd: RationalMapRep
    k: int
    s: int
    ind_fwd: tuple
    ind_bwd: tuple
    regular: bool
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.d < 2:
            raise InvalidParam("algebraic degree must be >= 2")
        if self.d**self.s != self.delta ** (self.k - self.s):
            raise InvalidParam("degree relation d^s = delta^(k-s) violated")

    @property
    def d(self) -> int:
        return self.fwd.degree

    @property
    def delta(self) -> int:
        return self.bwd.degree

    def map_for(self, direction: str) -> RationalMapRep:
        if direction == "fwd":
            return self.fwd
        if direction == "bwd":
            return self.bwd
        raise InvalidParam(f"unknown direction {direction!r}")

    def degree_sequence(self) -> list:
        """d_q for q = 0..k: d^q for q <= s, delta^(k-q) for q >= s."""
        return [self.d**q if q <= self.s else self.delta ** (self.k - q) for q in range(self.k + 1)]


def eval_point(map_rep: RationalMapRep, p: ProjPoint) -> ProjPoint:
    """Image of p, or IndeterminacyProximity if numerically on I(f)."""
    F = map_rep.eval_rows(p.coords)
    nrm = np.linalg.norm(F)
    if nrm < EPS_IND:
        raise IndeterminacyProximity(f"point {p} is numerically indeterminate", step=0)
    return normalize(F)


def eval_rows_checked(map_rep: RationalMapRep, Z: np.ndarray):
    """Vectorized evaluation; returns (images, alive mask).

    Dead rows (||F|| < eps on unit input) keep their input value so that
    downstream array code stays finite.
    """
    F = map_rep.eval_rows(Z)
    nrm = np.linalg.norm(F, axis=-1)
    alive = nrm >= EPS_IND
    safe = np.where(alive[..., None], F, Z)
    safe = safe / np.linalg.norm(safe, axis=-1, keepdims=True)
    return safe, alive


def iterate(pair: BirationalPair, p: ProjPoint, n: int, direction: str = "fwd") -> list:
    """Orbit [p, f(p), ..., f^n(p)]; raises with the failing step index."""
    if n < 0:
        raise InvalidParam("orbit length must be >= 0")
    map_rep = pair.map_for(direction)
    orbit = [p]
    for step in range(n):
        try:
            p = eval_point(map_rep, p)
        except IndeterminacyProximity as exc:
            raise IndeterminacyProximity(
                f"orbit hit indeterminacy proximity at step {step}", step=step
            ) from exc
        orbit.append(p)
    return orbit


@dataclass(frozen=True)
class FsForm:
    """Components of a (1,1)-form in an FS-orthonormal coframe at a point."""

    matrix: np.ndarray
    base_point: ProjPoint


def differential_rows(map_rep: RationalMapRep, Z: np.ndarray):
    """One-step FS differential on unit rows.

    Returns ``(W, D, alive)`` where ``W`` are the canonical images and
    ``D`` is the 2x2 differential between orthonormal frames at z and
    f(z): D = B_out^dag J B_in / ||F(z)||.
    """
    F = map_rep.eval_rows(Z)
    nrm = np.linalg.norm(F, axis=-1)
    alive = nrm >= EPS_IND
    safe_nrm = np.where(alive, nrm, 1.0)
    W = np.where(alive[:, None], F, Z) / np.where(alive, nrm, np.linalg.norm(Z, axis=-1))[:, None]
    J = map_rep.jacobian_rows(Z)
    B_in = tangent_frames(Z)
    B_out = tangent_frames(W)
    D = np.einsum("nia,nij,njb->nab", np.conj(B_out), J, B_in) / safe_nrm[:, None, None]
    return W, D, alive


def pullback_chain(pair: BirationalPair, Z0: np.ndarray, m: int, direction: str = "fwd"):
    """FS pullback form of f^m along orbits, by the chain rule.

    Returns ``(H, alive, Z_final)`` with ``H = D_m^dag D_m`` of shape
    ``(N, 2, 2)``.  Rows whose orbit hits indeterminacy proximity are
    frozen and flagged dead.
    """
    if pair.k != 2:
        raise DimensionMismatch("pullback chains implemented for k = 2 only")
    map_rep = pair.map_for(direction)
    N = Z0.shape[0]
    D_total = np.tile(np.eye(2, dtype=complex), (N, 1, 1))
    alive = np.ones(N, dtype=bool)
    Z = np.asarray(Z0, dtype=complex)
    for _ in range(m):
        W, D, ok = differential_rows(map_rep, Z)
        alive = alive & ok
        D_total = np.where(alive[:, None, None], D @ D_total, D_total)
        Z = np.where(alive[:, None], W, Z)
    H = np.einsum("nca,ncb->nab", np.conj(D_total), D_total)
    return H, alive, Z


def fs_pullback_form(map_rep: RationalMapRep, p: ProjPoint) -> FsForm:
    """Pointwise f^* omega as a PSD Hermitian 2x2 matrix at p."""
    Z = p.coords[None, :]
    _, D, alive = differential_rows(map_rep, Z)
    if not alive[0]:
        raise IndeterminacyProximity(f"point {p} is numerically indeterminate", step=0)
    H = np.conj(D[0]).T @ D[0]
    H = 0.5 * (H + np.conj(H).T)
    return FsForm(matrix=H, base_point=p)


def pullback_density(map_rep: RationalMapRep, p: ProjPoint) -> float:
    """Density of f^* omega wedge omega^{k-1} against omega^k: tr/k."""
    form = fs_pullback_form(map_rep, p)
    k = len(p.coords) - 1
    return float(np.real(np.trace(form.matrix)) / k)


def wedge_density_rows(Ha: np.ndarray, Hb: np.ndarray) -> np.ndarray:
    """Pointwise density of alpha wedge beta / omega^2 for 2x2 forms."""
    val = (
        Ha[..., 0, 0] * Hb[..., 1, 1]
        + Ha[..., 1, 1] * Hb[..., 0, 0]
        - Ha[..., 0, 1] * Hb[..., 1, 0]
        - Ha[..., 1, 0] * Hb[..., 0, 1]
    ) / 2.0
    return np.real(val)


def wedge_density(A: FsForm, B: FsForm) -> float:
    """Wedge density of two (1,1)-forms at a common base point (k=2)."""
    if A.matrix.shape != (2, 2) or B.matrix.shape != (2, 2):
        raise DimensionMismatch("wedge density defined for k = 2 only")
    return float(wedge_density_rows(A.matrix, B.matrix))


def make_henon(a: complex, p_coeffs, *_, **__) -> BirationalPair:
    """Henon pair (x, y) -> (y, p(y) - a x) with deg p >= 2.

    ``p_coeffs`` lists the coefficients of p from constant to leading.
    """
    a = complex(a)
    if a == 0:
        raise InvalidParam("Henon parameter a must be nonzero")
    p_coeffs = [complex(c) for c in p_coeffs]
    deg = len(p_coeffs) - 1
    if deg < 2 or p_coeffs[-1] == 0:
        raise InvalidParam("p must have exact degree >= 2")

    def homog_p(var: int) -> dict:
        # p(coords[var]/Z) * Z^deg as a table in (X, Y, Z)
        table = {}
        for i, c in enumerate(p_coeffs):
            if c == 0:
                continue
            exps = [0, 0, deg - i]
            exps[var] = i
            table[tuple(exps)] = table.get(tuple(exps), 0) + c
        return table

    # forward: [Y Z^{deg-1} : P(Y,Z) - a X Z^{deg-1} : Z^deg]
    f0 = HomogeneousPolynomial.from_dict(deg, {(0, 1, deg - 1): 1.0})
    f1_table = homog_p(1)
    f1_table[(1, 0, deg - 1)] = f1_table.get((1, 0, deg - 1), 0) - a
    f1 = HomogeneousPolynomial.from_dict(deg, f1_table)
    f2 = HomogeneousPolynomial.from_dict(deg, {(0, 0, deg): 1.0})
    fwd = RationalMapRep(components=(f0, f1, f2), degree=deg)

    # backward ((p(x) - y)/a, x), denominators cleared:
    # [P(X,Z) - Y Z^{deg-1} : a X Z^{deg-1} : a Z^deg]
    g0_table = homog_p(0)
    g0_table[(0, 1, deg - 1)] = g0_table.get((0, 1, deg - 1), 0) - 1.0
    g0 = HomogeneousPolynomial.from_dict(deg, g0_table)
    g1 = HomogeneousPolynomial.from_dict(deg, {(1, 0, deg - 1): a})
    g2 = HomogeneousPolynomial.from_dict(deg, {(0, 0, deg): a})
    bwd = RationalMapRep(components=(g0, g1, g2), degree=deg)

    return BirationalPair(
        fwd=fwd,
        bwd=bwd,
        k=2,
        s=1,
        ind_fwd=(normalize([1, 0, 0]),),
        ind_bwd=(normalize([0, 1, 0]),),
        regular=True,
        meta={"family": "henon", "a": a, "p_coeffs": tuple(p_coeffs)},
    )


def _cremona_involution_components() -> tuple:
    return (
        HomogeneousPolynomial.from_dict(2, {(0, 1, 1): 1.0}),
        HomogeneousPolynomial.from_dict(2, {(1, 0, 1): 1.0}),
        HomogeneousPolynomial.from_dict(2, {(1, 1, 0): 1.0}),
    )


def make_cremona_composed(A: np.ndarray) -> BirationalPair:
    """Pair f = J o A with J[x:y:z] = [yz:xz:xy] and A in GL(3, C)."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (3, 3):
        raise InvalidParam("A must be a 3x3 matrix")
    if abs(np.linalg.det(A)) < 1e-12:
        raise InvalidParam("A is numerically singular")
    A_inv = np.linalg.inv(A)

    # fwd components: quadratic forms (Ax)_i (Ax)_j expanded monomially
    def product_form(r1: np.ndarray, r2: np.ndarray) -> HomogeneousPolynomial:
        table = {}
        for i in range(3):
            for j in range(3):
                c = r1[i] * r2[j]
                if c == 0:
                    continue
                exps = [0, 0, 0]
                exps[i] += 1
                exps[j] += 1
                key = tuple(exps)
                table[key] = table.get(key, 0) + c
        return HomogeneousPolynomial.from_dict(2, table)

    fwd = RationalMapRep(
        components=(
            product_form(A[1], A[2]),
            product_form(A[0], A[2]),
            product_form(A[0], A[1]),
        ),
        degree=2,
    )

    # bwd components: A_inv applied to (yz, xz, xy)
    j_monomials = [(0, 1, 1), (1, 0, 1), (1, 1, 0)]
    bwd_comps = []
    for i in range(3):
        table = {}
        for jm, c in zip(j_monomials, A_inv[i]):
            if c != 0:
                table[jm] = table.get(jm, 0) + c
        bwd_comps.append(HomogeneousPolynomial.from_dict(2, table))
    bwd = RationalMapRep(components=tuple(bwd_comps), degree=2)

    coord_points = tuple(normalize(e) for e in np.eye(3))
    ind_fwd = tuple(normalize(A_inv @ e) for e in np.eye(3))
    return BirationalPair(
        fwd=fwd,
        bwd=bwd,
        k=2,
        s=1,
        ind_fwd=ind_fwd,
        ind_bwd=coord_points,
        regular=False,
        meta={"family": "cremona_composed"},
    )


def random_unitary(seed: int, n: int = 3) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(G)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def roundtrip_residuals(pair: BirationalPair, count: int, seed: int, guard: float = 1e-3) -> np.ndarray:
    """FS distances ||bwd(fwd(z)) - z|| on random points away from I(f)."""
    from .projective import fs_distance_rows, sample_fs_rows

    Z = sample_fs_rows(count, seed, pair.k)
    keep = np.ones(len(Z), dtype=bool)
    for q in pair.ind_fwd:
        keep &= fs_distance_rows(Z, np.broadcast_to(q.coords, Z.shape)) >= guard
    Z = Z[keep]
    W, alive1 = eval_rows_checked(pair.fwd, Z)
    B, alive2 = eval_rows_checked(pair.bwd, W)
    B = canonicalize_rows(B)
    Zc = canonicalize_rows(Z)
    res = fs_distance_rows(B, Zc)
    return res[alive1 & alive2]

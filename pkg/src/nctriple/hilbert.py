"""Dense lattice operators on Ĥ = L²(G)⊗L²(ℝ) and ℋ = Ĥ⊗ℂ².

States are flattened with index (i·nb + j)·spin + σ. Inner products carry
the trapezoid weights, ⟨ξ,η⟩ = Σ w conj(ξ) η, so adjoints are weighted:
M† = W⁻¹ M^H W. Conjugate-linear operators (the real structure) are stored
as a matrix R acting after conjugation: ξ ↦ R·conj(ξ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, beta_z, interp_b, hat_matrix
from .errors import ConfigError, ShapeError
from .group_model import Grid1D

GAMMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
GAMMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class HilbertGrid:
    a_grid: Grid1D
    b_grid: Grid1D

    @property
    def size(self) -> int:
        return self.a_grid.count * self.b_grid.count

    @property
    def weights(self) -> np.ndarray:
        return np.kron(self.a_grid.weights, self.b_grid.weights)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        A, B = np.meshgrid(self.a_grid.points, self.b_grid.points, indexing="ij")
        return A.ravel(), B.ravel()


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Dense matrix plus quadrature weights; ``antilinear`` means ξ ↦ M·conj(ξ)."""

    matrix: np.ndarray
    weights: np.ndarray
    antilinear: bool = False
    spin: int = 1

    def __post_init__(self) -> None:
        n = self.weights.size
        if self.matrix.shape != (n, n):
            raise ShapeError(f"matrix {self.matrix.shape} does not match {n} weights")

    @property
    def size(self) -> int:
        return self.weights.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ (np.conj(v) if self.antilinear else v)

    def __matmul__(self, other: "DiscretizedOperator") -> "DiscretizedOperator":
        _compatible(self, other)
        right = np.conj(other.matrix) if self.antilinear else other.matrix
        return DiscretizedOperator(self.matrix @ right, self.weights,
                                   self.antilinear != other.antilinear, self.spin)

    def _combine(self, other: "DiscretizedOperator", sign: float) -> "DiscretizedOperator":
        _compatible(self, other)
        if self.antilinear != other.antilinear:
            raise ShapeError("cannot add a linear and a conjugate-linear operator")
        return DiscretizedOperator(self.matrix + sign * other.matrix, self.weights,
                                   self.antilinear, self.spin)

    def __add__(self, other: "DiscretizedOperator") -> "DiscretizedOperator":
        return self._combine(other, 1.0)

    def __sub__(self, other: "DiscretizedOperator") -> "DiscretizedOperator":
        return self._combine(other, -1.0)

    def scaled(self, k: complex) -> "DiscretizedOperator":
        # for antilinear ops, scaling on the left
        return DiscretizedOperator(k * self.matrix, self.weights, self.antilinear, self.spin)

    def adjoint(self) -> "DiscretizedOperator":
        if self.antilinear:
            raise ShapeError("adjoint of a conjugate-linear operator is not provided")
        w = self.weights
        return DiscretizedOperator((self.matrix.conj().T * w[None, :]) / w[:, None], w,
                                   False, self.spin)

    def hermiticity_residual(self) -> float:
        """max |w_i M_ij − conj(M_ji) w_j| relative to max |w_i M_ij|."""
        wm = self.weights[:, None] * self.matrix
        scale = float(np.max(np.abs(wm))) or 1.0
        return float(np.max(np.abs(wm - wm.conj().T))) / scale

    def with_spin(self) -> "DiscretizedOperator":
        """X ⊗ 𝟙₂."""
        if self.spin != 1:
            raise ShapeError("operator already acts on the spinor space")
        return DiscretizedOperator(np.kron(self.matrix, IDENTITY2), np.repeat(self.weights, 2),
                                   self.antilinear, 2)

    @classmethod
    def identity(cls, weights: np.ndarray, spin: int = 1) -> "DiscretizedOperator":
        return cls(np.eye(weights.size, dtype=complex), weights, False, spin)

    @classmethod
    def diagonal(cls, diag: np.ndarray, weights: np.ndarray, spin: int = 1) -> "DiscretizedOperator":
        return cls(np.diag(np.asarray(diag, dtype=complex)), weights, False, spin)


def _compatible(x: DiscretizedOperator, y: DiscretizedOperator) -> None:
    if x.size != y.size or x.spin != y.spin or not np.array_equal(x.weights, y.weights):
        raise ShapeError("operators act on different lattices")


# ---------------------------------------------------------------------------
# operators on H = L²(ℝ, db) and Ĥ


def build_ualpha(b_grid: Grid1D, r: float) -> DiscretizedOperator:
    """(U_r ξ)(b) = e^{r/2} ξ(e^{r} b) by linear interpolation (zero outside)."""
    b = b_grid.points
    M = hat_matrix(b_grid, (math.exp(r) * b)[:, None], np.array([math.exp(0.5 * r)]))
    return DiscretizedOperator(M.astype(complex), b_grid.weights)


def multiplication_b(b_grid: Grid1D, fn) -> DiscretizedOperator:
    return DiscretizedOperator.diagonal(fn(b_grid.points), b_grid.weights)


@dataclass(frozen=True)
class TripleParams:
    eta: float
    omega: float
    s: float = 3.0
    c: float = 0.0

    def __post_init__(self) -> None:
        vals = (self.eta, self.omega, self.s, self.c)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("triple parameters must be finite")
        if self.omega == 0.0:
            raise ConfigError("omega must be nonzero")
        if self.c < 0.0:
            raise ConfigError("modular power c must be >= 0")


@dataclass(frozen=True, eq=False)
class ExtendedOperators:
    D_hat: DiscretizedOperator
    Theta_hat: DiscretizedOperator
    T: DiscretizedOperator
    Dirac: DiscretizedOperator
    Theta: DiscretizedOperator


def build_extended_operators(grid: HilbertGrid, p: TripleParams) -> ExtendedOperators:
    """D̂ = e^{−a}b, θ̂ = e^{−a}, 𝒯 = η + ωe^{−a} on Ĥ; 𝒟 = D̂⊗γ¹ + 𝒯⊗γ², Θ = θ̂⊗𝟙₂."""
    A, B = grid.mesh()
    w = grid.weights
    d = np.exp(-A) * B
    th = np.exp(-A)
    t = p.eta + p.omega * np.exp(-A)
    w2 = np.repeat(w, 2)
    dirac = np.kron(np.diag(d), GAMMA1) + np.kron(np.diag(t), GAMMA2)
    return ExtendedOperators(
        D_hat=DiscretizedOperator.diagonal(d, w),
        Theta_hat=DiscretizedOperator.diagonal(th, w),
        T=DiscretizedOperator.diagonal(t, w),
        Dirac=DiscretizedOperator(dirac, w2, False, 2),
        Theta=DiscretizedOperator(np.kron(np.diag(th), IDENTITY2).astype(complex), w2, False, 2),
    )


def represent(f: AlgebraElement, grid: HilbertGrid) -> DiscretizedOperator:
    """ρ̂(f): kernel e^{−a_i} f(a_i − a_k)(e^{−a_i}(b_j − b_l)) w_k w_l."""
    if f.a_grid != grid.a_grid or f.b_grid != grid.b_grid:
        raise ShapeError("element and Hilbert lattice use different grids")
    ag, bg = grid.a_grid, grid.b_grid
    if not ag.symmetric:
        raise ShapeError("the group grid must be symmetric about 0 with an odd count")
    na, nb = ag.count, bg.count
    mid = na // 2
    a, b = ag.points, bg.points
    wa, wb = ag.weights, bg.weights
    K = np.zeros((na, nb, na, nb), dtype=complex)
    if not f.empty:
        fi0, fi1 = f.support[0], f.support[1]
        rows = f.values[fi0: fi1 + 1]
        diff = b[:, None] - b[None, :]
        for i in range(na):
            vals = interp_b(rows, bg, math.exp(-a[i]) * diff)  # (m, nb, nb)
            for m in range(fi0, fi1 + 1):
                k = i - m + mid
                if 0 <= k < na:
                    K[i, :, k, :] = math.exp(-a[i]) * wa[k] * vals[m - fi0] * wb[None, :]
    return DiscretizedOperator(K.reshape(na * nb, na * nb), grid.weights)


def twisted_commutator(op: DiscretizedOperator, f: AlgebraElement, grid: HilbertGrid,
                       z: complex = 1.0) -> DiscretizedOperator:
    """op·π(f) − π(β_z f)·op, with π = ρ̂ or ρ̂⊗𝟙₂ according to op's spin."""
    pf = represent(f, grid)
    pb = represent(beta_z(f, z), grid)
    if op.spin == 2:
        pf, pb = pf.with_spin(), pb.with_spin()
    return op @ pf - pb @ op


def commutator(op: DiscretizedOperator, f: AlgebraElement, grid: HilbertGrid) -> DiscretizedOperator:
    pf = represent(f, grid)
    if op.spin == 2:
        pf = pf.with_spin()
    return op @ pf - pf @ op


def real_structure(grid: HilbertGrid, p: TripleParams | None = None,
                   spin: bool = True) -> DiscretizedOperator:
    """𝒥 = Ĵ ⊗ (γ¹∘conj) with (Ĵξ)(a)(b) = e^{−a/2} conj ξ(−a)(−e^{−a}b).

    Requires η = −ω. On the spinor factor the conjugation is followed by γ¹,
    which commutes with both conj(γ¹) = γ¹ and conj(γ²) = −γ² up to the
    common sign needed for 𝒥𝒟 = −Θ⁻¹𝒟𝒥.
    """
    if p is not None and not math.isclose(p.eta, -p.omega, rel_tol=0.0, abs_tol=1e-12):
        raise ConfigError(
            f"the real structure needs eta = -omega (epsilon = -1); got eta={p.eta}, omega={p.omega}")
    ag, bg = grid.a_grid, grid.b_grid
    if not ag.symmetric:
        raise ShapeError("the group grid must be symmetric about 0 with an odd count")
    na, nb = ag.count, bg.count
    a, b = ag.points, bg.points
    R = np.zeros((na, nb, na, nb), dtype=complex)
    for i in range(na):
        R[i, :, na - 1 - i, :] = hat_matrix(bg, (-math.exp(-a[i]) * b)[:, None],
                                            np.array([math.exp(-0.5 * a[i])]))
    R = R.reshape(na * nb, na * nb)
    if not spin:
        return DiscretizedOperator(R, grid.weights, True, 1)
    return DiscretizedOperator(np.kron(R, GAMMA1), np.repeat(grid.weights, 2), True, 2)


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations: int
    converged: bool


def operator_norm(op: DiscretizedOperator, rtol: float = 1e-8, max_iter: int = 10_000,
                  seed: int = 0) -> NormEstimate:
    """Largest singular value in the weighted norm, by power iteration on M†M."""
    M = op.matrix
    w = op.weights
    if not np.any(M):
        return NormEstimate(0.0, 0, True)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
    lam = 0.0
    for it in range(1, max_iter + 1):
        v = v / math.sqrt(float(np.real(np.vdot(v, w * v))))
        # M^H y computed as conj(M^T conj(y)) to avoid copying M
        u = np.conj(M.T @ np.conj(w * (M @ v))) / w
        new = float(np.real(np.vdot(v, w * u)))
        if it > 1 and abs(new - lam) <= rtol * abs(new):
            return NormEstimate(math.sqrt(max(new, 0.0)), it, True)
        lam = new
        v = u
    return NormEstimate(math.sqrt(max(lam, 0.0)), max_iter, False)


def weighted_svd_norm(op: DiscretizedOperator) -> float:
    """Reference value: spectral norm of W^{1/2} M W^{−1/2}."""
    s = np.sqrt(op.weights)
    return float(np.linalg.norm(s[:, None] * op.matrix / s[None, :], 2))


def smooth_subspace(grid: HilbertGrid, a_radius: float, b_radius: float,
                    deg_a: int = 2, deg_b: int = 5, spin: int = 1,
                    a_center: float = 0.0, b_center: float = 0.0) -> np.ndarray:
    """Weighted-orthonormal basis of smooth compactly supported lattice states.

    Products P_m(a)·P_n(b)·bump(a)·bump(b) with Legendre polynomials and
    the C⁴ window (1−x²)⁴. Lattice identities that hold only up to
    interpolation error are measured on this subspace, where the error
    shrinks with the spacing; on Nyquist-scale states it does not.
    """
    A, B = grid.mesh()
    xa = (A - a_center) / a_radius
    xb = (B - b_center) / b_radius
    wa = np.clip(1 - xa ** 2, 0, None) ** 4
    wb = np.clip(1 - xb ** 2, 0, None) ** 4
    leg = np.polynomial.legendre.legval
    cols = []
    for m in range(deg_a + 1):
        pa = leg(xa, np.eye(deg_a + 1)[m]) * wa
        for n in range(deg_b + 1):
            cols.append(pa * leg(xb, np.eye(deg_b + 1)[n]) * wb)
    V = np.array(cols, dtype=complex).T
    if spin == 2:
        V = np.concatenate([np.kron(V, np.array([[1.0], [0.0]])),
                            np.kron(V, np.array([[0.0], [1.0]]))], axis=1)
    w = np.repeat(grid.weights, spin)
    s = np.sqrt(w)[:, None]
    q, _ = np.linalg.qr(s * V)
    return q / s


def restricted_norm(Y: np.ndarray, weights: np.ndarray) -> float:
    """‖X|_V‖ given Y = X·Q for a weighted-orthonormal basis Q of V."""
    g = Y.conj().T @ (weights[:, None] * Y)
    return math.sqrt(max(float(np.max(np.linalg.eigvalsh(g))), 0.0))


def commutator_bound(f: AlgebraElement) -> tuple[float, float]:
    """(M_{f,z}, μ_G(S_f)): sup_a ∫|b·f(a)(b)| db and the Haar measure of the a-support."""
    wb = f.b_grid.weights
    m = float(np.max(np.abs(f.values * f.b[None, :]) @ wb)) if not f.empty else 0.0
    i0, i1 = f.support[0], f.support[1]
    mu = float(f.a[i1] - f.a[i0]) if i1 >= i0 else 0.0
    return m, mu


@dataclass(frozen=True)
class RealStructureDefects:
    j_squared: float
    j_dirac: float
    opposite_commutator: float


def real_structure_defects(grid: HilbertGrid, p: TripleParams, f: AlgebraElement,
                           g: AlgebraElement, basis: np.ndarray) -> RealStructureDefects:
    """The three reality defects measured on span(basis) ⊂ ℋ.

    ‖(𝒥²−𝟙)|_V‖, ‖(𝒥𝒟 + Θ⁻¹𝒟𝒥)|_V‖/‖𝒟|_V‖ and
    ‖[π(f), 𝒥π(g)𝒥]|_V‖/(‖π(f)‖‖π(g)‖), using matrix-block products only.
    """
    J = real_structure(grid, p)
    ops = build_extended_operators(grid, p)
    w2 = np.repeat(grid.weights, 2)
    Q = basis
    jj = J.apply(J.apply(Q)) - Q
    dirac = ops.Dirac.matrix
    theta_inv = 1.0 / np.real(np.diag(ops.Theta.matrix))
    jd = J.apply(dirac @ Q) + theta_inv[:, None] * (dirac @ J.apply(Q))
    pf = represent(f, grid)
    pg = represent(g, grid)

    def pi(P: DiscretizedOperator, X: np.ndarray) -> np.ndarray:
        n = X.shape[0] // 2
        Y = X.reshape(n, 2, -1)
        return np.einsum("ij,jsk->isk", P.matrix, Y).reshape(X.shape)

    def opp(X: np.ndarray) -> np.ndarray:
        return J.apply(pi(pg, J.apply(X)))

    comm = pi(pf, opp(Q)) - opp(pi(pf, Q))
    nf = operator_norm(pf).value
    ng = operator_norm(pg).value
    return RealStructureDefects(
        restricted_norm(jj, w2),
        restricted_norm(jd, w2) / restricted_norm(dirac @ Q, w2),
        restricted_norm(comm, w2) / (nf * ng),
    )

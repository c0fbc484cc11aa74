"""Resolvent boundary data and Weyl discs.

For a finite zipper with right boundary V and |z| < 1, the boundary value

    E(z, V) = T(N,0)^(-1) . V*

(iterated inverse Moebius action of the transfer matrices on V*) lies in the
Siegel disc; the Caratheodory-type resolvent matrix and Green matrix follow as

    F = (E + 1)(E - 1)^(-1) / i,      G = E (1 - E)^(-1) / z .

As V runs over the unitary group, F sweeps a matrix ball (the Weyl surface)
with center and radius operators read off the Cayley transform of the
accumulated quadratic form; the radius shrinks at least like 8/(N (1-|z|^2)^2),
which is the limit-point mechanism making the semi-infinite F independent of
the far boundary condition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matrix_core as mc
from .errors import (
    NotOnSurfaceError,
    SingularBlockError,
    ValidationError,
    ZeroZError,
)
from .transfer import TransferFactory, initial_frame
from .zipper import BlockBandedUnitary, SemiInfiniteZipper, Zipper

# Direct transfer products are trusted up to this length; beyond it the
# log-scaled frame propagation must be used for radius norms.
PRODUCT_STABILITY_CAP = 64


def _check_disc_z(z: complex, allow_zero: bool = False) -> complex:
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValidationError(f"|z| = {abs(z):.6f} must be < 1")
    if z == 0 and not allow_zero:
        raise ZeroZError("z = 0 is handled by the exact value F(0) = i")
    return z


def _resolve_v(zipper, v_boundary):
    if v_boundary is not None:
        v = mc.as_cmatrix(v_boundary)
    elif isinstance(zipper, Zipper) and zipper.boundary_v is not None:
        v = zipper.boundary_v
    else:
        raise ValidationError("a right boundary unitary V is required")
    if mc.unitary_defect(v) > 1e-9:
        raise ValidationError("V must be unitary")
    return v


def _resolve_n(zipper, upto):
    if upto is not None:
        if upto % 2:
            raise ValidationError("the site count must be even")
        return upto
    if isinstance(zipper, SemiInfiniteZipper):
        raise ValidationError("a truncation length is required for semi-infinite zippers")
    return zipper.N


def e_matrix(zipper, z: complex, v_boundary=None, upto: Optional[int] = None,
             factory: Optional[TransferFactory] = None) -> np.ndarray:
    """Boundary value E in the Siegel disc, by the stepwise inverse-Moebius chain.

    Each factor maps the closed disc into itself (strictly inside for even
    steps), so the chain is unconditionally stable in N; a singular
    denominator here would contradict the contraction property and is
    surfaced as a numerical breakdown.
    """
    z = _check_disc_z(z)
    N = _resolve_n(zipper, upto)
    V = _resolve_v(zipper, v_boundary)
    fac = factory or TransferFactory(zipper)
    Z = mc.adj(V)
    for n in range(N, 0, -1):
        Z = mc.mobius(fac.transfer_inverse(n, z), Z, tol=1e-13)
    return Z


def e_matrix_closed(zipper, z: complex, v_boundary=None, upto: Optional[int] = None) -> np.ndarray:
    """E from the closed form (C - V A)^(-1)(V B - D) of the full transfer product.

    Cross-check route only: the raw product overflows for long hyperbolic runs.
    """
    z = _check_disc_z(z)
    N = _resolve_n(zipper, upto)
    V = _resolve_v(zipper, v_boundary)
    A, B, C, D = mc.split_blocks(TransferFactory(zipper).product(N, z))
    return np.linalg.solve(C - V @ A, V @ B - D)


def f_matrix(zipper, z: complex, v_boundary=None, upto: Optional[int] = None,
             factory: Optional[TransferFactory] = None) -> np.ndarray:
    """Resolvent matrix F = (E + 1)(E - 1)^(-1) / i; F(0) = i 1 exactly."""
    z = complex(z)
    L = zipper.L
    if z == 0:
        return 1j * mc.eye(L)
    E = e_matrix(zipper, z, v_boundary, upto, factory)
    one = mc.eye(L)
    return -1j * np.linalg.solve((E - one).T, (E + one).T).T


def g_matrix(zipper, z: complex, v_boundary=None, upto: Optional[int] = None,
             factory: Optional[TransferFactory] = None) -> np.ndarray:
    """Green matrix G = E (1 - E)^(-1) / z (the site-1 block of the resolvent)."""
    z = _check_disc_z(z)
    E = e_matrix(zipper, z, v_boundary, upto, factory)
    one = mc.eye(zipper.L)
    return np.linalg.solve((one - E).T, E.T).T / z


@dataclass
class ResolventPoint:
    """The triple (E, F, G) of boundary resolvent data at one disc point.

    E lies in the Siegel disc, F has positive imaginary part, and the two are
    linked by F = (E + 1)(E - 1)^(-1) / i and G = E (1 - E)^(-1) / z.
    """

    z: complex
    e_value: np.ndarray
    f_value: np.ndarray
    g_value: np.ndarray


def resolvent_point(zipper, z: complex, v_boundary=None, upto: Optional[int] = None) -> ResolventPoint:
    """E, F, G at one point, from a single inverse-Moebius chain."""
    z = _check_disc_z(z)
    E = e_matrix(zipper, z, v_boundary, upto)
    one = mc.eye(zipper.L)
    F = -1j * np.linalg.solve((E - one).T, (E + one).T).T
    G = np.linalg.solve((one - E).T, E.T).T / z
    return ResolventPoint(z, E, F, G)


def dense_f(op: BlockBandedUnitary, z: complex) -> np.ndarray:
    """Dense oracle for F: i pi_1* (X + z)(X - z)^(-1) pi_1 by direct solve."""
    X = op.to_dense()
    L = op.L
    pi1 = np.zeros((op.dim, L), dtype=complex)
    pi1[:L] = mc.eye(L)
    sol = np.linalg.solve(X - z * np.eye(op.dim), (X + z * np.eye(op.dim)) @ pi1)
    return 1j * (mc.adj(pi1) @ sol)


def dense_g(op: BlockBandedUnitary, z: complex) -> np.ndarray:
    """Dense oracle for G: pi_1* (X - z)^(-1) pi_1 by direct solve."""
    X = op.to_dense()
    L = op.L
    pi1 = np.zeros((op.dim, L), dtype=complex)
    pi1[:L] = mc.eye(L)
    return mc.adj(pi1) @ np.linalg.solve(X - z * np.eye(op.dim), pi1)


# -- Weyl discs ----------------------------------------------------------------

@dataclass
class WeylDisc:
    """Center and radius operators of the disc swept by F as V varies.

    radius_left is the positive R at z, radius_right the positive -R at the
    reflected point 1/conj(z); the surface is
    center + radius_left^(1/2) W radius_right^(1/2) over unitary W.
    """

    z: complex
    n: int
    center: np.ndarray
    radius_left: np.ndarray
    radius_right: np.ndarray
    identity_defect: float

    def radius_norms(self):
        return (float(np.linalg.norm(self.radius_left, 2)),
                float(np.linalg.norm(self.radius_right, 2)))

    def radius_bound(self) -> float:
        """The universal bound 8 / (N (1 - |z|^2)^2) on both radius norms."""
        return 8.0 / (self.n * (1.0 - abs(self.z) ** 2) ** 2)


def _q_tilde(factory: TransferFactory, z: complex, n: int) -> np.ndarray:
    T = factory.product(n, z)
    L = factory.L
    C = mc.cayley(L)
    return mc.hermitize(mc.adj(C) @ mc.adj(T) @ mc.lform(L) @ T @ C)


def radial_central(zipper, z: complex, upto: Optional[int] = None) -> WeylDisc:
    """Radial and central operators from the Cayley transform of the form.

    R = [upper-left of Q~]^(-1) must come out positive definite and the
    reflected-point R negative definite; failures are numerical breakdowns.
    """
    z = _check_disc_z(z)
    N = _resolve_n(zipper, upto)
    if N > PRODUCT_STABILITY_CAP:
        raise ValidationError(
            f"N = {N} exceeds the direct-product stability cap {PRODUCT_STABILITY_CAP}")
    fac = TransferFactory(zipper)
    L = fac.L
    Qt = _q_tilde(fac, z, N)
    Qt_refl = _q_tilde(fac, 1.0 / np.conj(z), N)

    block = Qt[:L, :L]
    w = np.linalg.eigvalsh(block)
    if w.min() <= 0:
        raise SingularBlockError("upper-left block of Q~ is not positive definite")
    R = mc.hermitize(np.linalg.inv(block))

    block_refl = Qt_refl[:L, :L]
    w_refl = np.linalg.eigvalsh(block_refl)
    if w_refl.max() >= 0:
        raise SingularBlockError("reflected-point radius failed to be negative definite")
    R_refl = mc.hermitize(np.linalg.inv(block_refl))

    S = -R @ Qt[:L, L:]
    # lower-right identity of the radius/center relations
    lower_right = Qt[L:, L:]
    predicted = mc.adj(S) @ np.linalg.inv(R) @ S + R_refl
    defect = float(np.linalg.norm(lower_right - predicted, 2))
    return WeylDisc(z, N, S, R, mc.hermitize(-R_refl), defect)


def disc_chart(f_value, disc: WeylDisc):
    """Chart coordinates W = R^(-1/2) (F - S) (-R')^(-1/2) and their unitarity defect.

    W is unitary exactly when F lies on the Weyl surface; strictly
    contractive W means F is inside the open disc.
    """
    F = mc.as_cmatrix(f_value)
    left = mc.hermitian_inv_sqrt(disc.radius_left, tol=1e-300)
    right = mc.hermitian_inv_sqrt(disc.radius_right, tol=1e-300)
    W = left @ (F - disc.center) @ right
    return W, mc.unitary_defect(W)


def disc_membership(f_value, disc: WeylDisc, defect_threshold: float = 1e-6) -> np.ndarray:
    """The unitary W parametrizing a surface point; NotOnSurfaceError off-surface."""
    W, defect = disc_chart(f_value, disc)
    if defect > defect_threshold:
        raise NotOnSurfaceError(f"chart unitarity defect {defect:.3e} > {defect_threshold:.1e}")
    return W


# -- semi-infinite limit ---------------------------------------------------------

def log_radius_norm(zipper, z: complex, upto: int,
                    factory: Optional[TransferFactory] = None) -> Optional[float]:
    """log ||R|| at z (|z| != 1) via norm-scaled frame propagation.

    Works far beyond the direct-product overflow threshold.  R^(-1) is half
    the (L, L)-form value of the frame grown from (1; 1); its smallest
    absolute eigenvalue is tracked in log scale.  Returns None if the scaled
    form degenerates below floating resolution.
    """
    z = complex(z)
    if z == 0 or abs(abs(z) - 1.0) < 1e-14:
        raise ValidationError("radius norms need 0 < |z| != 1")
    fac = factory or TransferFactory(zipper)
    L = fac.L
    frame = initial_frame(L).astype(complex)
    log_scale = 0.0
    for n in range(1, upto + 1):
        frame = fac.transfer(n, z) @ frame
        nu = float(np.linalg.norm(frame))
        if not np.isfinite(nu) or nu <= 0.0:
            return None
        frame /= nu
        log_scale += np.log(nu)
    form = mc.adj(frame) @ mc.lform(L) @ frame
    eigs = np.abs(np.linalg.eigvalsh(mc.hermitize(form)))
    if eigs.min() <= 1e-280:
        return None
    return float(np.log(2.0) - 2.0 * log_scale - np.log(eigs.min()))


@dataclass
class LimitF:
    """Semi-infinite resolvent boundary value with a certified error radius."""

    f_value: np.ndarray
    certified_error: float
    n_used: int
    slack: float
    posterior_error: Optional[float]


def limit_f(zipper: SemiInfiniteZipper, z: complex, tol: float, slack: float = 2.0) -> LimitF:
    """Evaluate the limit-point boundary value F to within a certified radius.

    The truncation length is chosen from the universal radius bound,
    N >= 8 / (tol (1 - |z|^2)^2), and F is evaluated there with V = 1.  The
    certified error is the slacked diameter bound slack * 8/(N (1-|z|^2)^2),
    which dominates ||F_N(V) - F_N(V')|| for every pair of boundary
    conditions; the sharper a-posteriori radius sqrt(||R|| ||R'||) is
    reported alongside when it is finitely computable (it underflows once
    the transfer cocycle is strongly hyperbolic).
    """
    z = _check_disc_z(z, allow_zero=True)
    if tol <= 0:
        raise ValidationError("tol must be positive")
    gap = (1.0 - abs(z) ** 2) ** 2
    n_used = int(np.ceil(8.0 / (tol * gap)))
    n_used += n_used % 2
    fac = TransferFactory(zipper)
    F = f_matrix(zipper, z, v_boundary=mc.eye(zipper.L), upto=n_used, factory=fac)
    certified = slack * 8.0 / (n_used * gap)
    posterior = None
    if z != 0:
        lr = log_radius_norm(zipper, z, n_used, factory=fac)
        lr_refl = log_radius_norm(zipper, 1.0 / np.conj(z), n_used, factory=fac)
        if lr is not None and lr_refl is not None:
            posterior = float(np.exp(0.5 * (lr + lr_refl)))
    return LimitF(F, certified, n_used, slack, posterior)

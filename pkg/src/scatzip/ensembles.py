"""Seeded random zipper instances.

Every generator is a pure function of a 64-bit seed (and, for semi-infinite
zippers, the site index), so instances are replayable across runs and safe to
evaluate concurrently.  Ensembles:

    free        alpha = 0, trivial gauges (the shift-like reference case)
    cmv         random contraction alpha, trivial gauges and boundaries
    haar-gauge  random contraction alpha, Haar-distributed gauges/boundaries

Contractions are drawn with singular values uniform in [0, alpha_max); the
default cap keeps the events comfortably effective.
"""

from __future__ import annotations

import numpy as np

from . import matrix_core as mc
from .errors import OddNError, ValidationError
from .scattering import ScatteringBlock
from .zipper import SemiInfiniteZipper, Zipper

ENSEMBLES = ("free", "cmv", "haar-gauge")
DEFAULT_ALPHA_MAX = 0.85


def random_unitary(rng: np.random.Generator, L: int) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR of a complex Gaussian."""
    g = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
    q, r = np.linalg.qr(g)
    d = r.diagonal()
    return q * (d / np.abs(d))


def random_contraction(rng: np.random.Generator, L: int, alpha_max: float) -> np.ndarray:
    """Strict contraction with singular values uniform in [0, alpha_max)."""
    if L == 1:
        # uniform in the disc of radius alpha_max
        r = alpha_max * np.sqrt(rng.uniform())
        return np.array([[r * np.exp(2j * np.pi * rng.uniform())]])
    s = alpha_max * rng.uniform(size=L)
    return random_unitary(rng, L) @ np.diag(s).astype(complex) @ random_unitary(rng, L)


def random_block(rng: np.random.Generator, L: int, ensemble: str,
                 alpha_max: float = DEFAULT_ALPHA_MAX) -> ScatteringBlock:
    if ensemble == "free":
        return ScatteringBlock(np.zeros((L, L)), mc.eye(L), mc.eye(L))
    if ensemble == "cmv":
        return ScatteringBlock(random_contraction(rng, L, alpha_max), mc.eye(L), mc.eye(L))
    if ensemble == "haar-gauge":
        return ScatteringBlock(random_contraction(rng, L, alpha_max),
                               random_unitary(rng, L), random_unitary(rng, L))
    raise ValidationError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")


def _boundary(rng: np.random.Generator, L: int, ensemble: str) -> np.ndarray:
    return random_unitary(rng, L) if ensemble == "haar-gauge" else mc.eye(L)


def finite_zipper(seed: int, L: int, N: int, ensemble: str = "haar-gauge",
                  alpha_max: float = DEFAULT_ALPHA_MAX) -> Zipper:
    """Seeded finite zipper: boundaries U, V and blocks S_2, ..., S_N."""
    if N % 2:
        raise OddNError(f"N must be even, got {N}")
    rng = np.random.default_rng(seed)
    u = _boundary(rng, L, ensemble)
    v = _boundary(rng, L, ensemble)
    blocks = {n: random_block(rng, L, ensemble, alpha_max) for n in range(2, N + 1)}
    return Zipper(L, N, "finite", blocks, u, v)


def periodic_zipper(seed: int, L: int, N: int, ensemble: str = "haar-gauge",
                    alpha_max: float = DEFAULT_ALPHA_MAX) -> Zipper:
    """Seeded periodic zipper: blocks S_1, ..., S_N with S_1 around the corner."""
    if N % 2:
        raise OddNError(f"N must be even, got {N}")
    rng = np.random.default_rng(seed)
    blocks = {n: random_block(rng, L, ensemble, alpha_max) for n in range(1, N + 1)}
    return Zipper(L, N, "periodic", blocks)


def semi_infinite_zipper(seed: int, L: int, ensemble: str = "cmv",
                         alpha_max: float = DEFAULT_ALPHA_MAX) -> SemiInfiniteZipper:
    """Seeded half-infinite zipper; block n is a pure function of (seed, n)."""
    boundary_rng = np.random.default_rng([int(seed), 1])
    u = _boundary(boundary_rng, L, ensemble)

    def block_fn(n: int) -> ScatteringBlock:
        return random_block(np.random.default_rng([int(seed), int(n)]), L, ensemble, alpha_max)

    return SemiInfiniteZipper(L, u, block_fn)

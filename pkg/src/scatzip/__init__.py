"""Scattering zippers: unitary analogs of block Jacobi matrices.

Construction of the five-diagonal block unitaries built from chained
scattering events, their transfer-matrix calculus, resolvent boundary values
and Weyl discs, the bijection with matrix-valued probability measures on the
unit circle, and spectra of finite and periodic operators by matrix
Pruefer-phase oscillation theory with Bloch-Floquet fibering.
"""

from . import (
    ensembles,
    errors,
    matrix_core,
    measures,
    oscillation,
    scattering,
    transfer,
    weyl,
    zipper,
)
from .scattering import ScatteringBlock, boundary_block, build_block, decompose_block, phi, phi_inverse
from .zipper import (
    BlockBandedUnitary,
    SemiInfiniteZipper,
    SpectrumResult,
    Zipper,
    apply,
    assemble_finite,
    assemble_periodic,
    dense_spectrum,
    direct_sum,
    fiber,
)

__version__ = "0.1.0"

__all__ = [
    "ScatteringBlock",
    "BlockBandedUnitary",
    "SemiInfiniteZipper",
    "SpectrumResult",
    "Zipper",
    "apply",
    "assemble_finite",
    "assemble_periodic",
    "boundary_block",
    "build_block",
    "decompose_block",
    "dense_spectrum",
    "direct_sum",
    "ensembles",
    "errors",
    "fiber",
    "matrix_core",
    "measures",
    "oscillation",
    "phi",
    "phi_inverse",
    "scattering",
    "transfer",
    "weyl",
    "zipper",
]

"""Conformally flat hypersurfaces from Guichard nets: Python bindings of the C++ library."""

from ._core import (
    Grid2,
    InputError,
    NumericalError,
    frame_coefficients,
    hat_curvature,
    read_mesh,
    run,
    schouten_dual,
    sha256,
    solve_phi_pbar,
    verify,
)

__all__ = [
    "Grid2",
    "InputError",
    "NumericalError",
    "frame_coefficients",
    "hat_curvature",
    "read_mesh",
    "run",
    "schouten_dual",
    "sha256",
    "solve_phi_pbar",
    "verify",
]

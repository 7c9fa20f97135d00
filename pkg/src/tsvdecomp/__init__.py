"""Cartoon/texture image decomposition with a TSV-weighted G-norm."""

from .grid import diff, divergence, gradient, laplacian
from .imageio import load_image, load_raw, save_image, save_raw
from .phantoms import make_phantom
from .solver import (
    DecompositionResult,
    EnergyTrace,
    SolverDivergenceError,
    SolverParams,
    SolverState,
    decompose,
    energy,
    g_step,
    run_stage,
    shrink_p,
    uv_step,
)
from .spectral import SpectralSymbols, solve_g_constant_part, solve_uv_system
from .tsv import (
    TsvParams,
    WeightField,
    build_eta,
    build_kernel,
    compute_tsv,
    kernel_stack,
    nlm_denoise,
)

__version__ = "0.1.0"

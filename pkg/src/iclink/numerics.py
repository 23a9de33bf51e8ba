"""Complex linear algebra and reproducible random-number streams."""

import numpy as np

# Saturation applied to every LLR that crosses a module boundary.  Keeps
# exp() finite in exact-mode detectors and bounds feedback magnitudes.
LLR_CLAMP = 30.0

_HERMITIAN_TOL = 1e-10
_MIN_EIGENVALUE = 1e-12


def clamp_llr(x):
    """Saturate LLRs to +-LLR_CLAMP (returns a new array)."""
    return np.clip(x, -LLR_CLAMP, LLR_CLAMP)


def hermitian_inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse square root of a Hermitian positive definite matrix.

    Computed via eigendecomposition so the result B is itself Hermitian
    and satisfies B @ a @ B.conj().T == I.

    Raises
    ------
    ValueError
        If `a` is not square, not Hermitian within 1e-10, or has an
        eigenvalue <= 1e-12 (ill-conditioned covariance).
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    herm_err = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if herm_err > _HERMITIAN_TOL:
        raise ValueError(f"matrix is not Hermitian (max asymmetry {herm_err:.3e})")
    w, v = np.linalg.eigh(a)
    if np.min(w) <= _MIN_EIGENVALUE:
        raise ValueError(f"matrix is not positive definite (min eigenvalue {np.min(w):.3e})")
    return (v * (1.0 / np.sqrt(w))) @ v.conj().T


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for one coordinate of the simulation.

    Identical (seed, path) always yields a bit-identical draw sequence,
    regardless of how many other streams exist or in which order they are
    consumed; this is what makes parallel trials reproducible.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=path))


def gaussian_complex(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    """n draws of a circularly symmetric complex Gaussian.

    Per-component variance is `variance` (real and imaginary parts carry
    variance/2 each).
    """
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))

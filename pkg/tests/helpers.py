"""Shared independent oracles for the test suite.

Everything here is deliberately written from scratch (direct factorial
formulas, explicit sums, normalised Hermite recurrences) so tests never
validate the package against its own primitives.
"""

import math

import numpy as np


def coherent_coeffs(alpha: complex, n: int) -> np.ndarray:
    """Truncated coherent amplitudes from the direct factorial formula."""
    return np.array(
        [
            np.exp(-abs(alpha) ** 2 / 2.0) * alpha ** m / math.sqrt(math.factorial(m))
            for m in range(n)
        ]
    )


def kerr_amplitude(alpha: complex, omega: float, chi: float, n: int, t: float) -> complex:
    """<a(t)> for a closed Kerr mode, by direct truncated Fock sum.

    Uses the renormalised truncated coherent state as the initial condition,
    matching a unit-trace projector on the same truncated space.
    """
    c = coherent_coeffs(alpha, n)
    norm2 = float(np.sum(np.abs(c) ** 2))
    m = np.arange(n - 1)
    phases = np.exp(-1j * (omega + chi * (2 * m + 1)) * t)
    return complex(np.sum(np.conj(c[:-1]) * c[1:] * np.sqrt(m + 1.0) * phases) / norm2)


def kerr_amplitude_closed_form(alpha: complex, omega: float, chi: float, t: float) -> complex:
    """Untruncated closed form for the same quantity."""
    return alpha * np.exp(-1j * (omega + chi) * t) * np.exp(
        abs(alpha) ** 2 * (np.exp(-2j * chi * t) - 1.0)
    )


def random_density(rng: np.random.Generator, d: int) -> np.ndarray:
    """Random positive unit-trace density matrix."""
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def hermite_functions(nmax: int, x: np.ndarray) -> np.ndarray:
    """Normalised harmonic-oscillator eigenfunctions psi_n(x), n < nmax.

    Stable normalised recurrence:
    psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.
    """
    x = np.asarray(x, dtype=float)
    psis = np.zeros((nmax, x.size))
    psis[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2.0)
    if nmax > 1:
        psis[1] = np.sqrt(2.0) * x * psis[0]
    for n in range(1, nmax - 1):
        psis[n + 1] = np.sqrt(2.0 / (n + 1)) * x * psis[n] - np.sqrt(n / (n + 1.0)) * psis[n - 1]
    return psis


def position_density(rho: np.ndarray, x: np.ndarray) -> np.ndarray:
    """<x|rho|x> via the Hermite-function expansion."""
    psis = hermite_functions(rho.shape[0], x)
    return np.real(np.einsum("mn,mx,nx->x", rho, psis, psis))

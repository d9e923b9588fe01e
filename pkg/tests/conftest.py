import numpy as np
import pytest

from hologate import PulseParams, invariant
from hologate.linalg import pauli_on

TWO_PI = 2.0 * np.pi


def assemble_hamiltonian(p: PulseParams, t: float) -> np.ndarray:
    """Independent reassembly of the drive+Zeeman+Ising Hamiltonian."""
    out = np.zeros((p.dim, p.dim), dtype=complex)
    for i in range(p.n):
        arg = p.omega_rot[i] * t + p.phase[i]
        out += 0.5 * p.omega_drive[i] * np.cos(arg) * pauli_on(p.n, i, "X")
        out += 0.5 * p.omega_drive[i] * np.sin(arg) * pauli_on(p.n, i, "Y")
        out += 0.5 * p.detuning[i] * pauli_on(p.n, i, "Z")
    for (i, j), coupling in p.couplings.items():
        out += 0.25 * coupling * pauli_on(p.n, i, "Z") @ pauli_on(p.n, j, "Z")
    return out


def assemble_invariant(p: PulseParams, t: float) -> np.ndarray:
    """Independent reassembly of the closed-form invariant."""
    out = np.zeros((p.dim, p.dim), dtype=complex)
    for i in range(p.n):
        arg = p.omega_rot[i] * t + p.phase[i]
        out += p.omega_drive[i] * np.cos(arg) * pauli_on(p.n, i, "X")
        out += p.omega_drive[i] * np.sin(arg) * pauli_on(p.n, i, "Y")
        out += (p.detuning[i] - p.omega_rot[i]) * pauli_on(p.n, i, "Z")
    for (i, j), coupling in p.couplings.items():
        out += 0.5 * coupling * pauli_on(p.n, i, "Z") @ pauli_on(p.n, j, "Z")
    return out


def random_cyclic_params(
    rng: np.random.Generator,
    n: int,
    min_gap: float = 0.15,
    max_omega: float = 8.0,
) -> PulseParams:
    """A random cyclic segment with a safely non-degenerate invariant.

    Mixes in reversed precession (negative drive frequency), two-period
    segments, and commensurate distinct frequencies for two qubits.
    """
    while True:
        base = rng.uniform(1.0, max_omega / 2)
        flavor = rng.integers(0, 5)
        if n == 2 and flavor == 0:
            omegas = (base, 2 * base)  # distinct but commensurate
            duration = TWO_PI / base
        elif flavor == 1:
            omegas = (base,) * n
            duration = 2 * TWO_PI / base  # two periods
        elif flavor == 2 and n == 1:
            omegas = (-base,) * n  # reversed precession
            duration = TWO_PI / base
        else:
            omegas = (base,) * n
            duration = TWO_PI / base
        p = PulseParams(
            n=n,
            omega_drive=tuple(rng.uniform(0.2, 4.0) for _ in range(n)),
            omega_rot=omegas,
            phase=tuple(rng.uniform(0.0, TWO_PI) for _ in range(n)),
            detuning=tuple(rng.uniform(-2.0, 4.0) for _ in range(n)),
            couplings={(0, 1): rng.uniform(0.3, 2.0)} if n == 2 else {},
            duration=duration,
        )
        gaps = np.diff(np.linalg.eigvalsh(invariant(p, 0.0)))
        if gaps.min() > min_gap:
            return p


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

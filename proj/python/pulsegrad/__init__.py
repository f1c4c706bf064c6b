"""Pulse-level gradients for parametrized quantum programs.

Thin wrapper over the C++ core; see ``pulsegrad._core`` for the bindings.
"""

from ._core import (
    Circuit,
    Error,
    PauliSum,
    build_program,
    constant_pulse_circuit,
    dla_closure,
    echoed_cr_ansatz,
    exact_gradient,
    finite_difference_gradient,
    gaussian_init,
    ground_energy,
    legendre_pulse_circuit,
    odegen_gradient,
    parse_hamiltonian,
    pauli_decompose,
    read_hamiltonian_file,
    resources_sps,
    serialize_hamiltonian,
    sps_gradient,
    toy_hamiltonian,
    vqe,
)

__all__ = [
    "Circuit",
    "Error",
    "PauliSum",
    "build_program",
    "constant_pulse_circuit",
    "dla_closure",
    "echoed_cr_ansatz",
    "exact_gradient",
    "finite_difference_gradient",
    "gaussian_init",
    "ground_energy",
    "legendre_pulse_circuit",
    "odegen_gradient",
    "parse_hamiltonian",
    "pauli_decompose",
    "read_hamiltonian_file",
    "resources_sps",
    "serialize_hamiltonian",
    "sps_gradient",
    "toy_hamiltonian",
    "vqe",
]

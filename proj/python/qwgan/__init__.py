"""Classical simulator for quantum Wasserstein GANs.

Couplings and duals of the quantum Wasserstein semimetric, the entropically
regularized adversarial loss, gradient-based training of parameterized
mixture generators, product-formula planning, and circuit compression via
channel states.
"""

from ._core import (
    ConvergenceError,
    ShapeError,
    avg_output_fidelity,
    compress,
    exact_evolution,
    fidelity,
    gan_loss,
    heisenberg,
    maximize_dual,
    qw_primal,
    qw_pure,
    random_density,
    suzuki_unitary,
    trace_distance,
    train,
    trotter_plan,
)

__all__ = [
    "ConvergenceError",
    "ShapeError",
    "avg_output_fidelity",
    "compress",
    "exact_evolution",
    "fidelity",
    "gan_loss",
    "heisenberg",
    "maximize_dual",
    "qw_primal",
    "qw_pure",
    "random_density",
    "suzuki_unitary",
    "trace_distance",
    "train",
    "trotter_plan",
]

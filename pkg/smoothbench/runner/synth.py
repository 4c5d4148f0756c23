# File: smoothbench/runner/synth.py

from typing import Optional

import numpy as np
from scipy import linalg as sla

from smoothbench.core.errors import ConfigError
from smoothbench.models.lti_types import LtiSystem


def synth_system(
    d: int, d_out: int, spread: float, seed: int, d_in: Optional[int] = None
) -> LtiSystem:
    """Random stable system A = Q·blkdiag(Λ)·Qᵀ with Q orthogonal.

    Λ holds 2×2 blocks [[α, ω], [−ω, α]] (plus a 1×1 block [α] when d is odd). The decay
    rates α are log-spaced in [−spread, −0.1] and the frequencies ω are uniform on (0.5, 2).
    C and B have standard normal entries; B gets d_out columns unless d_in says otherwise.
    """
    if d < 2:
        raise ConfigError(f"synthetic systems need d ≥ 2, got {d}")
    if spread <= 0.1:
        raise ConfigError(f"spectrum spread must exceed 0.1, got {spread}")
    rng = np.random.default_rng(seed)
    n_blocks = d // 2 + d % 2
    alphas = -np.logspace(np.log10(0.1), np.log10(spread), n_blocks)
    blocks = []
    for k in range(d // 2):
        omega = rng.uniform(0.5, 2.0)
        blocks.append(np.array([[alphas[k], omega], [-omega, alphas[k]]]))
    if d % 2:
        blocks.append(np.array([[alphas[-1]]]))
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    a = q @ sla.block_diag(*blocks) @ q.T
    c = rng.standard_normal((d_out, d))
    b = rng.standard_normal((d, d_out if d_in is None else d_in))
    return LtiSystem(a=a, c=c, b=b)

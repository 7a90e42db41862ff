"""Tolerances and run parameters.

Every numeric routine takes its tolerances from a :class:`Tolerances`
instance; module-level ``DEFAULT`` holds the documented defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    tol: float = 1e-10          # integrator local error
    fit_tol: float = 1e-9       # collocation refit residual
    vanish_tol: float = 1e-9    # |f| below this on the grid counts as zero
    curve_tol: float = 1e-10    # |R(nu, mu)| for a point to be "on the curve"
    pole_guard: float = 1e-3    # exclusion radius around rho = 1
    eig_tol: float = 1e-9
    fourier_degree: int = 8     # starting degree for collocation refits
    max_fit_degree: int = 512   # refits give up (FitDivergence) beyond this

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value <= 0:
                raise ValueError(f"{f.name} must be positive, got {value!r}")

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT = Tolerances()


@dataclass
class RunConfig:
    """Configuration of one CLI run (tolerances plus experiment knobs)."""

    tolerances: Tolerances = field(default_factory=Tolerances)
    grid_points: int = 64
    chain_length: int = 4
    rho_grid: list = field(default_factory=lambda: [0.5, 2.0, -1.0, 1j, -1j])
    seed: int = 0
    threads: int = 1


def thread_cap(requested=None) -> int:
    """Worker count: ``requested`` capped by ``LAPLACE_TODA_THREADS``."""
    import os

    raw = os.environ.get("LAPLACE_TODA_THREADS", "").strip()
    cap = None
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            cap = None
    n = 1 if requested is None else max(1, int(requested))
    if requested is None and cap is not None:
        n = cap
    return min(n, cap) if cap is not None else n

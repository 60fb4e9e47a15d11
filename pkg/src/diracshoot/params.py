"""Physical parameters and numerical policy shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Params:
    """Mass m, frequency omega and angular index S of the radial system.

    The standing assumption is 0 < omega < m; S = 0 is the only index
    exercised by the shooting pipeline (S != 0 changes the 1/r weights of
    the right-hand side and is accepted but untested).
    """

    m: float = 1.0
    omega: float = 0.5
    S: int = 0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not 0.0 < self.omega < self.m:
            raise ValueError(f"need 0 < omega < m, got omega={self.omega}, m={self.m}")
        if self.S != int(self.S):
            raise ValueError(f"S must be an integer, got {self.S}")

    @property
    def gap(self) -> float:
        """Spectral gap m - omega that sets the decay scale."""
        return self.m - self.omega


@dataclass(frozen=True)
class Tolerances:
    """Integrator and detection thresholds.

    delta and rmax default to None and are derived from the parameters:
    delta = 1e-8 * (m - omega)^2 keeps the negative-energy test away from
    the separatrix {H = 0}; rmax = 40 / (m - omega) puts the horizon deep
    into the exponential tail.
    """

    rel: float = 1e-10
    abs: float = 1e-10
    r0: float = 1e-6
    eta: float = 1e-8
    delta: float | None = None
    rmax: float | None = None

    def __post_init__(self):
        for name in ("rel", "abs", "r0", "eta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.delta is not None and not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.rmax is not None and not self.rmax > 0:
            raise ValueError("rmax must be positive")

    def resolved(self, p: Params) -> "Tolerances":
        """Fill in parameter-dependent defaults for delta and rmax."""
        delta = self.delta if self.delta is not None else 1e-8 * p.gap ** 2
        rmax = self.rmax if self.rmax is not None else 40.0 / p.gap
        return replace(self, delta=delta, rmax=rmax)

"""Geometry, nondimensionalization, and the laminar Couette base flow.

All lengths are scaled by the gap width d = r2 - r1, velocities by the inner
cylinder speed r1*Omega1, time by the viscous scale d^2/nu, and pressure by
rho*(r1*Omega1)^2.  In these units the annulus is [r_i, r_o] with
r_i = eta/(1-eta) and r_o = r_i + 1, and the base azimuthal flow is
V(r) = A0*r + B0/r with constants fixed by the no-slip conditions
V(r_i) = 1 and V(r_o) = mu*(1 + d/r1) = mu*r_o/r_i.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class FlowConfig:
    """Flow parameters and derived base-flow constants.

    Parameters
    ----------
    eta : float
        Radius ratio r1/r2, 0 < eta < 1.
    mu : float
        Angular speed ratio Omega2/Omega1.
    reynolds : float
        R = Omega1*r1*d/nu.
    """

    eta: float
    mu: float = 0.0
    reynolds: float = 0.0
    r_i: float = field(init=False)
    r_o: float = field(init=False)
    a0: float = field(init=False)
    b0: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"radius ratio eta must lie in (0, 1), got {self.eta}")
        eta, mu = self.eta, self.mu
        object.__setattr__(self, "r_i", eta / (1.0 - eta))
        object.__setattr__(self, "r_o", eta / (1.0 - eta) + 1.0)
        # Constants solve the 2x2 system V(r_i)=1, V(r_o)=mu*r_o/r_i.
        object.__setattr__(self, "a0", (mu - eta**2) / (eta * (1.0 + eta)))
        object.__setattr__(self, "b0", eta * (1.0 - mu) / ((1.0 + eta) * (1.0 - eta) ** 2))

    def base_velocity(self, r):
        """V(r) = A0*r + B0/r without domain checks (see base_flow_profile)."""
        r = np.asarray(r, dtype=float)
        return self.a0 * r + self.b0 / r

    def base_velocity_gradient(self, r):
        """dV/dr = A0 - B0/r^2."""
        r = np.asarray(r, dtype=float)
        return self.a0 - self.b0 / r**2


def base_flow_profile(cfg: FlowConfig, r):
    """Azimuthal base-flow velocity V(r) on the annulus.

    Raises ConfigError if any r lies outside [r_i, r_o] (tiny roundoff slack).
    """
    r = np.asarray(r, dtype=float)
    tol = 1e-12 * (1.0 + cfg.r_o)
    if np.any(r < cfg.r_i - tol) or np.any(r > cfg.r_o + tol):
        raise ConfigError(
            f"radial coordinate outside annulus [{cfg.r_i}, {cfg.r_o}]"
        )
    out = cfg.base_velocity(r)
    return float(out) if out.ndim == 0 else out


def taylor_number(cfg: FlowConfig) -> float:
    """Taylor number T = (64/9) R^2, defined for the eta = 1/2 geometry only."""
    if abs(cfg.eta - 0.5) > 1e-12:
        raise ConfigError(
            f"Taylor number relation T = (64/9) R^2 holds for eta = 0.5 only, got eta={cfg.eta}"
        )
    return (64.0 / 9.0) * cfg.reynolds**2


def couette_base_kinetic_energy(cfg: FlowConfig) -> float:
    """Kinetic energy of the base flow, (1/2) * int r V(r)^2 dr.

    Per unit axial length and unit azimuthal radian; closed form from the
    antiderivative of r*(A0*r + B0/r)^2.
    """
    a0, b0 = cfg.a0, cfg.b0
    ri, ro = cfg.r_i, cfg.r_o

    def antider(r):
        return a0**2 * r**4 / 4.0 + a0 * b0 * r**2 + b0**2 * np.log(r)

    return 0.5 * (antider(ro) - antider(ri))

"""Parameter types for the photon-to-spin transfer model.

All types are immutable value objects validated at construction. Field
amplitudes are plain Python complex numbers; power quantities (transmissivity,
reflectivity, efficiencies) are dimensionless probabilities in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class ValidationError(ValueError):
    """A parameter violates one of its declared invariants."""


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


def _finite(z: complex) -> bool:
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass(frozen=True)
class CavityParams:
    """Atom-cavity rates defining the spin-dependent reflection.

    Rates are angular frequencies in consistent (arbitrary) units; only
    ratios enter the reflection coefficient at zero detuning.
    """

    kappa: float          # total cavity decay
    kappa_wg: float       # decay into the waveguide
    gamma: float          # atom relaxation
    g: float              # atom-cavity coupling
    delta_c: float = 0.0  # cavity detuning (omega_c - omega)
    delta_a: float = 0.0  # atom detuning (omega_a - omega)

    def __post_init__(self) -> None:
        _check(self.kappa > 0, f"kappa must be > 0, got {self.kappa}")
        _check(self.gamma > 0, f"gamma must be > 0, got {self.gamma}")
        _check(self.g >= 0, f"g must be >= 0, got {self.g}")
        _check(0 <= self.kappa_wg <= self.kappa,
               f"kappa_wg must lie in [0, kappa], got {self.kappa_wg}")

    @property
    def cooperativity(self) -> float:
        return 4 * self.g**2 / (self.kappa * self.gamma)

    @classmethod
    def from_ratios(cls, coupling_ratio: float, cooperativity: float,
                    delta_c: float = 0.0, delta_a: float = 0.0) -> "CavityParams":
        """Build from kappa_wg/kappa and C with kappa = gamma = 1."""
        _check(cooperativity >= 0, "cooperativity must be >= 0")
        return cls(kappa=1.0, kappa_wg=coupling_ratio, gamma=1.0,
                   g=math.sqrt(cooperativity / 4), delta_c=delta_c, delta_a=delta_a)


@dataclass(frozen=True)
class PdrParams:
    """Complex field coefficients of the polarization-dependent reflector.

    Per polarization i, power transmissivity T_i = |t_i|^2 and reflectivity
    R_i = |r_i|^2 must satisfy T_i + R_i <= 1; the deficit is scattering loss.
    """

    t_H: complex
    r_H: complex
    t_V: complex
    r_V: complex

    def __post_init__(self) -> None:
        for name in ("t_H", "r_H", "t_V", "r_V"):
            z = getattr(self, name)
            _check(_finite(z), f"{name} must be finite")
        _check(self.T_H + self.R_H <= 1 + 1e-12,
               f"T_H + R_H = {self.T_H + self.R_H} exceeds 1")
        _check(self.T_V + self.R_V <= 1 + 1e-12,
               f"T_V + R_V = {self.T_V + self.R_V} exceeds 1")

    @property
    def T_H(self) -> float:
        return abs(self.t_H) ** 2

    @property
    def R_H(self) -> float:
        return abs(self.r_H) ** 2

    @property
    def T_V(self) -> float:
        return abs(self.t_V) ** 2

    @property
    def R_V(self) -> float:
        return abs(self.r_V) ** 2

    @property
    def zeta_H(self) -> float:
        return max(0.0, 1.0 - self.T_H - self.R_H)

    @property
    def zeta_V(self) -> float:
        return max(0.0, 1.0 - self.T_V - self.R_V)

    @classmethod
    def from_power(cls, T_V: float, R_H: float, zeta_V: float = 0.0,
                   zeta_H: float = 0.0, reflection_sign: float = -1.0) -> "PdrParams":
        """Construct real field coefficients from power values.

        R_V and T_H are the complements after scattering loss. Reflections
        carry a mirror-like pi phase by default (reflection_sign = -1); the
        sign is exposed because only power values are physically pinned.
        """
        R_V = 1.0 - T_V - zeta_V
        T_H = 1.0 - R_H - zeta_H
        _check(0 <= T_V <= 1 and 0 <= R_H <= 1, "T_V and R_H must lie in [0, 1]")
        _check(R_V >= -1e-12, f"R_V = 1 - T_V - zeta_V is negative ({R_V})")
        _check(T_H >= -1e-12, f"T_H = 1 - R_H - zeta_H is negative ({T_H})")
        return cls(
            t_H=complex(math.sqrt(max(T_H, 0.0))),
            r_H=complex(reflection_sign * math.sqrt(R_H)),
            t_V=complex(math.sqrt(T_V)),
            r_V=complex(reflection_sign * math.sqrt(max(R_V, 0.0))),
        )


@dataclass(frozen=True)
class PolarizerParams:
    """Pass efficiencies of the V-pass polarizer, per polarization."""

    eta_pol_V: float
    eta_pol_H: float

    def __post_init__(self) -> None:
        _check(0 <= self.eta_pol_V <= 1, f"eta_pol_V out of [0,1]: {self.eta_pol_V}")
        _check(0 <= self.eta_pol_H <= 1, f"eta_pol_H out of [0,1]: {self.eta_pol_H}")
        _check(self.eta_pol_V >= self.eta_pol_H,
               "a V-pass polarizer requires eta_pol_V >= eta_pol_H")


@dataclass(frozen=True)
class LinkParams:
    """Link and detection-path efficiencies for the rate model."""

    eta_link: float       # link transmissivity
    eta_det: float        # detection-path efficiency
    r_cav_V_avg: float    # average V cavity power reflectivity (on/off)
    r_cav_H: float        # H cavity power reflectivity
    xi: float | None = None  # probability of the H photon reaching the spin

    def __post_init__(self) -> None:
        for name in ("eta_link", "eta_det", "r_cav_V_avg", "r_cav_H"):
            v = getattr(self, name)
            _check(0 <= v <= 1, f"{name} out of [0,1]: {v}")
        if self.xi is None:
            # worst case: all non-reflected H light reaches the spin
            object.__setattr__(self, "xi", 1.0 - self.r_cav_H)
        _check(0 <= self.xi <= 1, f"xi out of [0,1]: {self.xi}")
        _check(self.xi <= 1 - self.r_cav_H + 1e-12,
               f"xi = {self.xi} exceeds 1 - r_cav_H = {1 - self.r_cav_H}")


@dataclass(frozen=True)
class ProtocolTiming:
    """Per-attempt slot and spin re-initialization times, in seconds."""

    tau_reset: float
    tau_pulse: float
    pulse_multiplier: float = 1.0

    def __post_init__(self) -> None:
        _check(self.tau_reset > 0, f"tau_reset must be > 0, got {self.tau_reset}")
        _check(self.tau_pulse > 0, f"tau_pulse must be > 0, got {self.tau_pulse}")
        _check(self.pulse_multiplier > 0,
               f"pulse_multiplier must be > 0, got {self.pulse_multiplier}")

    @property
    def tau_slot(self) -> float:
        return self.pulse_multiplier * self.tau_pulse


# Reference design point. The H mode sees an effectively fixed cavity
# reflection behind the reflector stopband; its field value is pinned to the
# design power reflectivity of 92.1% with mirror-like phase.
DESIGN_R_CAV_H_POWER = 0.921
DESIGN_R_CAV_H = complex(-math.sqrt(DESIGN_R_CAV_H_POWER))
DESIGN_R_CAV_V_AVG = 0.356

DESIGN_CLOCK_RATE = 5.81e6  # Hz
DESIGN_TAU_RESET = 30e-6    # s


def design_cavity() -> CavityParams:
    """C = 4, kappa_wg/kappa = 0.73, zero detuning."""
    return CavityParams.from_ratios(coupling_ratio=0.73, cooperativity=4.0)


def design_pdr(zeta_V: float = 0.0, zeta_H: float = 0.0) -> PdrParams:
    """T_V = 0.99, R_H = 0.15 with configurable scattering loss."""
    return PdrParams.from_power(T_V=0.99, R_H=0.15, zeta_V=zeta_V, zeta_H=zeta_H)


def design_polarizer() -> PolarizerParams:
    return PolarizerParams(eta_pol_V=0.989, eta_pol_H=0.128)


def design_link(eta_link: float = 1e-3) -> LinkParams:
    return LinkParams(eta_link=eta_link, eta_det=0.936,
                      r_cav_V_avg=DESIGN_R_CAV_V_AVG, r_cav_H=DESIGN_R_CAV_H_POWER)


def design_timing() -> ProtocolTiming:
    return ProtocolTiming(tau_reset=DESIGN_TAU_RESET, tau_pulse=1.0 / DESIGN_CLOCK_RATE)

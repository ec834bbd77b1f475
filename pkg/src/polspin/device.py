"""Device physics: spin-dependent cavity reflection, etalon algebra between
the polarization-dependent reflector and the cavity, joint photon-spin
evolution, heralded spin projection, and the four-state average transfer
fidelity.

All operations are pure functions of value inputs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .params import (
    DESIGN_R_CAV_H,
    CavityParams,
    PdrParams,
    PolarizerParams,
    ValidationError,
)

_SQRT2 = math.sqrt(2.0)
_DEGENERATE_ETALON_TOL = 1e-12


class UnheraldableOutcomeError(ValueError):
    """The requested detector outcome carries zero amplitude."""


class OpaqueDeviceError(ValueError):
    """No detector outcome heralds for some input state."""


class HeraldOutcome(enum.Enum):
    H_AFTER_HWP = "H"
    V_AFTER_HWP = "V"


@dataclass(frozen=True)
class EffectiveReflections:
    """Round-trip field coefficients seen by each polarization for each
    spin state (on = spin couples to the cavity, off = it does not)."""

    r_H_on: complex
    r_H_off: complex
    r_V_on: complex
    r_V_off: complex

    def __post_init__(self) -> None:
        for name in ("r_H_on", "r_H_off", "r_V_on", "r_V_off"):
            mag = abs(getattr(self, name))
            if mag > 1 + 1e-9:
                raise ValidationError(f"|{name}| = {mag} exceeds 1")


IDEAL_REFLECTIONS = EffectiveReflections(
    r_H_on=-1.0, r_H_off=-1.0, r_V_on=1.0, r_V_off=-1.0
)


@dataclass(frozen=True)
class PhotonQubit:
    """Polarization qubit alpha|H> + beta|V>, normalized."""

    alpha: complex
    beta: complex

    def __post_init__(self) -> None:
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"photon qubit norm {norm} != 1")


@dataclass(frozen=True)
class SpinState:
    """Spin amplitudes on (|down>, |up>); possibly unnormalized."""

    amp_down: complex
    amp_up: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.amp_down) ** 2 + abs(self.amp_up) ** 2

    def fidelity(self, other: "SpinState") -> float:
        """|<other|self>|^2 with both states normalized."""
        n1, n2 = self.norm_sq, other.norm_sq
        if n1 == 0 or n2 == 0:
            raise ValidationError("fidelity of a zero-norm spin state")
        ovl = other.amp_down.conjugate() * self.amp_down \
            + other.amp_up.conjugate() * self.amp_up
        return abs(ovl) ** 2 / (n1 * n2)


@dataclass(frozen=True)
class JointState:
    """Unnormalized photon (H/V after the half-wave plate) x spin amplitudes.
    Loss only removes amplitude, so the total squared norm is <= 1."""

    h_down: complex
    h_up: complex
    v_down: complex
    v_up: complex

    @property
    def norm_sq(self) -> float:
        return (abs(self.h_down) ** 2 + abs(self.h_up) ** 2
                + abs(self.v_down) ** 2 + abs(self.v_up) ** 2)


@dataclass(frozen=True)
class FidelityReport:
    """Average transfer fidelity with per-input and per-outcome breakdown.

    per_input maps a target-state label to its herald-weighted fidelity;
    per_outcome maps (label, outcome) to (herald probability, conditional
    fidelity of the corrected spin state).
    """

    f_avg: float
    per_input: list[tuple[str, float]]
    per_outcome: dict[tuple[str, HeraldOutcome], tuple[float, float]]


def cavity_reflection(cavity: CavityParams, coupled: bool = True) -> complex:
    """Single-sided cavity field reflection from input-output theory.

    The uncoupled case (coupled=False) sets g = 0: a bare resonant,
    critically out-coupled cavity reflects with a -1 phase.
    """
    dc = complex(0.0, cavity.delta_c) + cavity.kappa / 2.0
    if not coupled or cavity.g == 0:
        return 1.0 - cavity.kappa_wg / dc
    da = complex(0.0, cavity.delta_a) + cavity.gamma / 2.0
    return 1.0 - cavity.kappa_wg / (dc * (1.0 + cavity.g**2 / (dc * da)))


def effective_reflections(
    pdr: PdrParams,
    polarizer: PolarizerParams,
    cavity: CavityParams,
    r_cav_h: complex = DESIGN_R_CAV_H,
) -> EffectiveReflections:
    """Round-trip coefficients of the reflector-cavity etalon.

    The transmitted path crosses the polarizer, so each |t_i|^2 in the
    etalon numerator is scaled by eta_pol_i. Only the V mode couples to the
    spin; the H mode sees a fixed cavity reflection r_cav_h in both spin
    states (its transition is never resonant).
    """
    r_on = cavity_reflection(cavity, coupled=True)
    r_off = cavity_reflection(cavity, coupled=False)

    def etalon(r_pdr: complex, t_sq: complex, r_cav: complex) -> complex:
        denom = 1.0 - r_cav * r_pdr
        if abs(denom) < _DEGENERATE_ETALON_TOL:
            raise ValidationError(
                f"degenerate resonant etalon: |1 - r_cav*r_pdr| = {abs(denom)}")
        return r_pdr + r_cav * t_sq / denom

    t_sq_H = pdr.t_H**2 * polarizer.eta_pol_H
    t_sq_V = pdr.t_V**2 * polarizer.eta_pol_V
    return EffectiveReflections(
        r_H_on=etalon(pdr.r_H, t_sq_H, r_cav_h),
        r_H_off=etalon(pdr.r_H, t_sq_H, r_cav_h),
        r_V_on=etalon(pdr.r_V, t_sq_V, r_on),
        r_V_off=etalon(pdr.r_V, t_sq_V, r_off),
    )


def evolve_joint_state(photon: PhotonQubit, eff: EffectiveReflections) -> JointState:
    """Joint photon-spin amplitudes after reflection and the half-wave plate.

    The spin starts in (|down> + |up>)/sqrt(2) and the half-wave plate mixes
    H -> (H + V)/sqrt(2), V -> (V - H)/sqrt(2), so every amplitude carries an
    overall factor 1/2. The state is left unnormalized: amplitude damping
    encodes photon loss.
    """
    a, b = photon.alpha, photon.beta
    return JointState(
        h_down=(a * eff.r_H_on - b * eff.r_V_on) / 2.0,
        h_up=(a * eff.r_H_off - b * eff.r_V_off) / 2.0,
        v_down=(a * eff.r_H_on + b * eff.r_V_on) / 2.0,
        v_up=(a * eff.r_H_off + b * eff.r_V_off) / 2.0,
    )


def herald_spin_state(
    joint: JointState, outcome: HeraldOutcome
) -> tuple[float, SpinState]:
    """Project onto the detected photon branch and correct the spin.

    Returns the branch squared norm (herald probability) and the normalized
    spin state after the corrective rotation: a Hadamard for the H outcome,
    Hadamard followed by a pi phase flip for the V outcome. With ideal
    reflection coefficients either outcome then maps (alpha, beta) to
    alpha|down> + beta|up> up to a global phase.
    """
    if outcome is HeraldOutcome.H_AFTER_HWP:
        d, u = joint.h_down, joint.h_up
        flip = False
    else:
        d, u = joint.v_down, joint.v_up
        flip = True
    prob = abs(d) ** 2 + abs(u) ** 2
    if prob == 0.0:
        raise UnheraldableOutcomeError(f"zero-amplitude branch for outcome {outcome}")
    nd = (d + u) / _SQRT2
    nu = (d - u) / _SQRT2
    if flip:
        nu = -nu
    scale = 1.0 / math.sqrt(prob)
    return prob, SpinState(amp_down=nd * scale, amp_up=nu * scale)


# The four target spin states and the photon qubits that should produce them.
_S = 1.0 / _SQRT2
TARGET_STATES: list[tuple[str, complex, complex]] = [
    ("x+", _S, _S),
    ("x-", _S, -_S),
    ("y+", _S, 1j * _S),
    ("y-", _S, -1j * _S),
]


def transfer_fidelity(
    pdr: PdrParams,
    polarizer: PolarizerParams,
    cavity: CavityParams,
    r_cav_h: complex = DESIGN_R_CAV_H,
) -> FidelityReport:
    """Average heralded transfer fidelity over the four cardinal inputs.

    Each input's fidelity is the herald-probability-weighted average over
    the two detector outcomes of the corrected spin state's overlap with the
    matching target, renormalized by the input's total herald probability.
    Detection efficiency and spin gate errors are excluded.
    """
    eff = effective_reflections(pdr, polarizer, cavity, r_cav_h=r_cav_h)
    per_input: list[tuple[str, float]] = []
    per_outcome: dict[tuple[str, HeraldOutcome], tuple[float, float]] = {}
    for label, alpha, beta in TARGET_STATES:
        joint = evolve_joint_state(PhotonQubit(alpha, beta), eff)
        target = SpinState(amp_down=alpha, amp_up=beta)
        total_p = 0.0
        weighted = 0.0
        for outcome in HeraldOutcome:
            try:
                prob, spin = herald_spin_state(joint, outcome)
            except UnheraldableOutcomeError:
                per_outcome[(label, outcome)] = (0.0, float("nan"))
                continue
            fid = spin.fidelity(target)
            per_outcome[(label, outcome)] = (prob, fid)
            total_p += prob
            weighted += prob * fid
        if total_p == 0.0:
            raise OpaqueDeviceError(f"device opaque for input {label}")
        per_input.append((label, weighted / total_p))
    f_avg = sum(f for _, f in per_input) / len(per_input)
    return FidelityReport(f_avg=f_avg, per_input=per_input, per_outcome=per_outcome)


def loss_balance_residual(eff: EffectiveReflections) -> float:
    """How far the device is from balanced losses for the alpha = beta input:
    | |r_H_on - r_V_on| - |r_H_off + r_V_off| |, zero when balanced."""
    return abs(abs(eff.r_H_on - eff.r_V_on) - abs(eff.r_H_off + eff.r_V_off))

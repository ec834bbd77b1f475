"""Grid evaluation over device and link parameters.

Produces structured result tables for the fidelity maps (reflector power
coefficients, cooperativity, waveguide coupling) and the rate-versus-loss
curve family with the repeaterless bound and optional Monte Carlo estimates.
Cells are pure-function evaluations written by index, so results are
independent of evaluation order.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .device import transfer_fidelity
from .montecarlo import McConfig, simulate_rate
from .params import (
    DESIGN_R_CAV_H,
    CavityParams,
    LinkParams,
    PdrParams,
    PolarizerParams,
    ProtocolTiming,
    ValidationError,
)
from .rate import (
    InfeasibleConstraintError,
    attempt_probabilities,
    max_attempts,
    repeaterless_bound,
    transfer_rate,
)

DEFAULT_CONSTRAINTS = (0.95, 0.97, 0.98, 0.99)


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension: a parameter path and its grid."""

    path: str
    start: float
    stop: float
    num: int
    spacing: str = "linear"  # linear | log | db

    def __post_init__(self) -> None:
        if self.num < 2:
            raise ValidationError(f"axis {self.path}: need >= 2 points")
        if self.start >= self.stop:
            raise ValidationError(f"axis {self.path}: start must be < stop")
        if self.spacing not in ("linear", "log", "db"):
            raise ValidationError(f"axis {self.path}: unknown spacing {self.spacing}")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.num)
        # db axes are linear in dB; conversion to transmissivity is the
        # consumer's job (loss_db -> eta_link = 10**(-loss_db/10))
        return np.linspace(self.start, self.stop, self.num)


@dataclass
class SweepResult:
    """Axis grids, a value matrix, and full provenance metadata.

    values has shape (len(axes[0]), ...) matching the axis order; NaN marks
    infeasible cells. Extra per-cell quantities live in columns, keyed by
    name with the same shape as values.
    """

    axes: list[tuple[str, np.ndarray]]
    values: np.ndarray
    quantity: str
    metadata: dict[str, Any] = field(default_factory=dict)
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shape = tuple(len(v) for _, v in self.axes)
        if self.values.shape != shape:
            raise ValidationError(
                f"values shape {self.values.shape} does not match axes {shape}")
        for name, col in self.columns.items():
            if col.shape != shape:
                raise ValidationError(f"column {name} shape mismatch")


def _meta(**kwargs: Any) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, val in kwargs.items():
        if dataclasses.is_dataclass(val) and not isinstance(val, type):
            out[key] = {f.name: getattr(val, f.name) for f in dataclasses.fields(val)}
        else:
            out[key] = val
    return out


def sweep_fidelity_pdr(
    tv_axis: SweepAxis,
    rh_axis: SweepAxis,
    cavity: CavityParams,
    polarizer: PolarizerParams,
    zeta_V: float = 0.0,
    zeta_H: float = 0.0,
    r_cav_h: complex = DESIGN_R_CAV_H,
) -> SweepResult:
    """Average fidelity over a (T_V, R_H) grid at fixed cavity parameters.

    Per cell, R_V = 1 - T_V - zeta_V and T_H = 1 - R_H - zeta_H; cells with
    negative complements are tagged NaN rather than fatal.
    """
    tv = tv_axis.values()
    rh = rh_axis.values()
    values = np.full((tv.size, rh.size), np.nan)
    for i, t in enumerate(tv):
        for j, r in enumerate(rh):
            try:
                pdr = PdrParams.from_power(T_V=t, R_H=r, zeta_V=zeta_V, zeta_H=zeta_H)
                values[i, j] = transfer_fidelity(
                    pdr, polarizer, cavity, r_cav_h=r_cav_h).f_avg
            except ValidationError:
                continue
    return SweepResult(
        axes=[(tv_axis.path, tv), (rh_axis.path, rh)],
        values=values,
        quantity="fidelity",
        metadata=_meta(cavity=cavity, polarizer=polarizer, zeta_V=zeta_V,
                       zeta_H=zeta_H, r_cav_h=r_cav_h),
    )


def sweep_fidelity_cavity(
    axis: SweepAxis,
    pdr: PdrParams,
    polarizer: PolarizerParams,
    base_cavity: CavityParams,
    which: str = "cooperativity",
    r_cav_h: complex = DESIGN_R_CAV_H,
) -> SweepResult:
    """Average fidelity along a cooperativity or waveguide-coupling axis,
    holding the other cavity parameter and the reflector design fixed."""
    if which not in ("cooperativity", "coupling"):
        raise ValidationError(f"unknown cavity sweep target: {which}")
    xs = axis.values()
    values = np.full(xs.size, np.nan)
    base_ratio = base_cavity.kappa_wg / base_cavity.kappa
    base_c = base_cavity.cooperativity
    for i, x in enumerate(xs):
        try:
            if which == "cooperativity":
                cav = CavityParams.from_ratios(base_ratio, x)
            else:
                cav = CavityParams.from_ratios(x, base_c)
            values[i] = transfer_fidelity(pdr, polarizer, cav, r_cav_h=r_cav_h).f_avg
        except ValidationError:
            continue
    return SweepResult(
        axes=[(axis.path, xs)],
        values=values,
        quantity="fidelity",
        metadata=_meta(pdr=pdr, polarizer=polarizer, base_cavity=base_cavity,
                       which=which, r_cav_h=r_cav_h),
    )


def sweep_rate_vs_loss(
    loss_axis: SweepAxis,
    pdr: PdrParams,
    polarizer: PolarizerParams,
    cavity: CavityParams,
    link_template: LinkParams,
    timing: ProtocolTiming,
    constraints: tuple[float, ...] = DEFAULT_CONSTRAINTS,
    mc: McConfig | None = None,
    r_cav_h: complex = DESIGN_R_CAV_H,
) -> dict[float, SweepResult]:
    """Analytic rate (and optional Monte Carlo estimate) versus link loss in
    dB, one result per fidelity constraint, each carrying the repeaterless
    bound, n_max, and regime columns. Infeasible cells are tagged NaN."""
    loss_db = loss_axis.values()
    f0 = transfer_fidelity(pdr, polarizer, cavity, r_cav_h=r_cav_h).f_avg
    results: dict[float, SweepResult] = {}
    for f_target in constraints:
        rate_col = np.full(loss_db.size, np.nan)
        bound_col = np.full(loss_db.size, np.nan)
        nmax_col = np.full(loss_db.size, np.nan)
        regime_col = np.full(loss_db.size, np.nan)
        mc_rate_col = np.full(loss_db.size, np.nan)
        mc_se_col = np.full(loss_db.size, np.nan)
        for i, db in enumerate(loss_db):
            eta = 10.0 ** (-db / 10.0)
            link = dataclasses.replace(link_template, eta_link=eta, xi=None)
            bound_col[i] = repeaterless_bound(eta, timing)
            try:
                res = transfer_rate(pdr, polarizer, cavity, link, timing,
                                    f_target, f0=f0, r_cav_h=r_cav_h)
            except InfeasibleConstraintError:
                continue
            rate_col[i] = res.rate
            nmax_col[i] = res.n_max
            regime_col[i] = res.regime
            if mc is not None:
                probs = attempt_probabilities(pdr, polarizer, link)
                est = simulate_rate(probs, res.n_max, timing,
                                    dataclasses.replace(mc, seed=mc.seed + i))
                mc_rate_col[i] = est.mean_rate
                mc_se_col[i] = est.std_error
        columns = {"bound": bound_col, "n_max": nmax_col, "regime": regime_col}
        if mc is not None:
            columns["mc_rate"] = mc_rate_col
            columns["mc_std_error"] = mc_se_col
        results[f_target] = SweepResult(
            axes=[(loss_axis.path, loss_db)],
            values=rate_col,
            quantity="rate",
            metadata=_meta(pdr=pdr, polarizer=polarizer, cavity=cavity,
                           link=link_template, timing=timing,
                           f_target=f_target, f0=f0,
                           mc=mc, r_cav_h=r_cav_h),
            columns=columns,
        )
    return results


def default_pdr_axes() -> tuple[SweepAxis, SweepAxis]:
    return (SweepAxis("pdr.T_V", 0.5, 1.0, 101),
            SweepAxis("pdr.R_H", 0.0, 0.6, 101))


def default_cooperativity_axis() -> SweepAxis:
    return SweepAxis("cavity.cooperativity", 0.5, 20.0, 101, spacing="log")


def default_coupling_axis() -> SweepAxis:
    return SweepAxis("cavity.coupling_ratio", 0.05, 1.0, 96)


def default_loss_axis() -> SweepAxis:
    return SweepAxis("loss_db", 0.0, 60.0, 121, spacing="db")

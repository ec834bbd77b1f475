"""Device-physics tests: reflection formulas, etalon algebra, joint-state
evolution, heralding, and the average transfer fidelity.

Non-trivial expected values were computed with an independent scalar
evaluation script (plain arithmetic, no shared code) and frozen here.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import polspin as ps
from polspin.device import IDEAL_REFLECTIONS, TARGET_STATES, HeraldOutcome

SQ2 = math.sqrt(2.0)

# frozen oracle values at the reference design point
# (T_V=0.99, R_H=0.15, C=4, kappa_wg/kappa=0.73, eta_pol=(0.989, 0.128),
#  real coefficients, zero scattering, r_cav_h = -sqrt(0.921))
ORACLE_R_H_ON = -0.5534793946954046
ORACLE_R_V_ON = 0.5473756817332835
ORACLE_R_V_OFF = -0.5721075471698113
ORACLE_RESIDUAL = 0.02473186543652761
ORACLE_F_DESIGN = 0.999845005849864


@pytest.fixture
def design():
    return ps.design_pdr(), ps.design_polarizer(), ps.design_cavity()


class TestCavityReflection:
    def test_bare_critically_outcoupled_mirror(self):
        cav = ps.CavityParams(kappa=1.0, kappa_wg=1.0, gamma=1.0, g=0.0)
        assert ps.cavity_reflection(cav, coupled=True) == pytest.approx(-1.0)

    def test_design_point_average_reflectivity(self):
        cav = ps.design_cavity()
        r_on = ps.cavity_reflection(cav, coupled=True)
        r_off = ps.cavity_reflection(cav, coupled=False)
        assert r_on == pytest.approx(0.708, abs=1e-12)
        assert r_off == pytest.approx(-0.46, abs=1e-12)
        assert (abs(r_on) ** 2 + abs(r_off) ** 2) / 2 == pytest.approx(0.356, abs=2e-3)

    def test_large_cooperativity_limit(self):
        cav = ps.CavityParams.from_ratios(1.0, 1000.0)
        assert abs(ps.cavity_reflection(cav) - 999 / 1001) < 2e-3

    def test_rejects_nonpositive_rates(self):
        with pytest.raises(ps.ValidationError):
            ps.CavityParams(kappa=0.0, kappa_wg=0.0, gamma=1.0, g=1.0)
        with pytest.raises(ps.ValidationError):
            ps.CavityParams(kappa=1.0, kappa_wg=0.5, gamma=0.0, g=1.0)

    @given(
        kappa=st.floats(0.1, 10),
        wg_frac=st.floats(0, 1),
        gamma=st.floats(0.01, 10),
        g=st.floats(0, 5),
        dc=st.floats(-20, 20),
        da=st.floats(-20, 20),
        coupled=st.booleans(),
    )
    @settings(max_examples=300)
    def test_passivity(self, kappa, wg_frac, gamma, g, dc, da, coupled):
        cav = ps.CavityParams(kappa, wg_frac * kappa, gamma, g, dc, da)
        assert abs(ps.cavity_reflection(cav, coupled)) <= 1 + 1e-9

    @given(dc=st.floats(-10, 10), da=st.floats(-10, 10))
    @settings(max_examples=100)
    def test_detuning_conjugation_symmetry(self, dc, da):
        r_pos = ps.cavity_reflection(ps.CavityParams(2.0, 1.3, 0.7, 1.1, dc, da))
        r_neg = ps.cavity_reflection(ps.CavityParams(2.0, 1.3, 0.7, 1.1, -dc, -da))
        assert r_pos == pytest.approx(r_neg.conjugate(), abs=1e-12)

    def test_large_c_convergence_is_monotone(self):
        gaps = []
        for c in (10.0, 100.0, 1000.0, 10000.0):
            cav = ps.CavityParams.from_ratios(1.0, c)
            gaps.append(abs(ps.cavity_reflection(cav) - (c - 1) / (c + 1)))
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))


class TestEffectiveReflections:
    def test_transparent_reflector_passes_cavity_through(self):
        pdr = ps.PdrParams(t_H=1.0, r_H=0.0, t_V=1.0, r_V=0.0)
        pol = ps.PolarizerParams(eta_pol_V=1.0, eta_pol_H=1.0)
        cav = ps.design_cavity()
        eff = ps.effective_reflections(pdr, pol, cav, r_cav_h=-1.0)
        assert eff.r_V_on == pytest.approx(ps.cavity_reflection(cav, True), abs=1e-12)
        assert eff.r_V_off == pytest.approx(ps.cavity_reflection(cav, False), abs=1e-12)

    def test_no_cavity_return_leaves_direct_reflection(self):
        pdr = ps.design_pdr()
        pol = ps.design_polarizer()
        cav = ps.CavityParams(kappa=1.0, kappa_wg=0.5, gamma=1.0, g=0.0)
        # kappa_wg/kappa = 0.5 at zero detuning gives zero cavity reflection
        eff = ps.effective_reflections(pdr, pol, cav, r_cav_h=0.0)
        assert eff.r_H_on == pytest.approx(pdr.r_H, abs=1e-12)
        assert eff.r_V_on == pytest.approx(pdr.r_V, abs=1e-9)
        assert eff.r_V_off == pytest.approx(pdr.r_V, abs=1e-9)

    def test_design_point_matches_oracle(self, design):
        pdr, pol, cav = design
        eff = ps.effective_reflections(pdr, pol, cav)
        assert eff.r_H_on == pytest.approx(ORACLE_R_H_ON, abs=1e-9)
        assert eff.r_H_off == pytest.approx(ORACLE_R_H_ON, abs=1e-9)
        assert eff.r_V_on == pytest.approx(ORACLE_R_V_ON, abs=1e-9)
        assert eff.r_V_off == pytest.approx(ORACLE_R_V_OFF, abs=1e-9)

    def test_degenerate_etalon_rejected(self):
        pdr = ps.PdrParams(t_H=0.0, r_H=1.0, t_V=0.0, r_V=1.0)
        pol = ps.PolarizerParams(eta_pol_V=1.0, eta_pol_H=1.0)
        cav = ps.CavityParams(kappa=1.0, kappa_wg=1.0, gamma=1.0, g=0.0)
        with pytest.raises(ps.ValidationError, match="degenerate"):
            ps.effective_reflections(pdr, pol, cav, r_cav_h=1.0)


class TestJointStateAndHerald:
    def test_ideal_duan_kimble_v_branch(self):
        photon = ps.PhotonQubit(1 / SQ2, 1 / SQ2)
        joint = ps.evolve_joint_state(photon, IDEAL_REFLECTIONS)
        # V amplitudes proportional to (-1+1, -1-1) = (0, -2), scaled by alpha/2
        assert joint.v_down == pytest.approx(0.0, abs=1e-12)
        assert joint.v_up == pytest.approx(-2 / (2 * SQ2), abs=1e-12)

    def test_total_loss_gives_zero_state(self):
        eff = ps.EffectiveReflections(0.0, 0.0, 0.0, 0.0)
        joint = ps.evolve_joint_state(ps.PhotonQubit(1.0, 0.0), eff)
        assert joint.norm_sq == 0.0

    def test_h_only_input_matches_substitution(self, design):
        pdr, pol, cav = design
        eff = ps.effective_reflections(pdr, pol, cav)
        joint = ps.evolve_joint_state(ps.PhotonQubit(1.0, 0.0), eff)
        assert joint.h_down == pytest.approx(eff.r_H_on / 2, abs=1e-12)
        assert joint.h_up == pytest.approx(eff.r_H_off / 2, abs=1e-12)
        assert joint.v_down == pytest.approx(eff.r_H_on / 2, abs=1e-12)
        assert joint.v_up == pytest.approx(eff.r_H_off / 2, abs=1e-12)

    @pytest.mark.parametrize("alpha,beta", [(1.0, 0.0), (1 / SQ2, 1 / SQ2),
                                            (0.6, 0.8j), (1 / SQ2, -1j / SQ2)])
    @pytest.mark.parametrize("outcome", list(HeraldOutcome))
    def test_ideal_device_transfers_exactly(self, alpha, beta, outcome):
        joint = ps.evolve_joint_state(ps.PhotonQubit(alpha, beta), IDEAL_REFLECTIONS)
        _, spin = ps.herald_spin_state(joint, outcome)
        target = ps.SpinState(alpha, beta)
        assert spin.fidelity(target) == pytest.approx(1.0, abs=1e-12)

    def test_v_outcome_needs_the_phase_flip(self):
        # without the conditional pi flip the V outcome yields alpha|down> - beta|up>
        alpha = beta = 1 / SQ2
        joint = ps.evolve_joint_state(ps.PhotonQubit(alpha, beta), IDEAL_REFLECTIONS)
        d, u = joint.v_down, joint.v_up
        nd, nu = (d + u) / SQ2, (d - u) / SQ2  # Hadamard only
        raw = ps.SpinState(nd, nu)
        assert raw.fidelity(ps.SpinState(alpha, -beta)) == pytest.approx(1.0, abs=1e-12)
        _, corrected = ps.herald_spin_state(joint, HeraldOutcome.V_AFTER_HWP)
        assert corrected.fidelity(ps.SpinState(alpha, beta)) == pytest.approx(1.0, abs=1e-12)

    def test_zero_branch_is_unheraldable(self):
        eff = ps.EffectiveReflections(0.0, 0.0, 0.0, 0.0)
        joint = ps.evolve_joint_state(ps.PhotonQubit(1.0, 0.0), eff)
        with pytest.raises(ps.UnheraldableOutcomeError):
            ps.herald_spin_state(joint, HeraldOutcome.H_AFTER_HWP)

    @given(st.floats(0, 2 * math.pi), st.floats(0.05, 0.95))
    @settings(max_examples=100)
    def test_herald_probabilities_conserve(self, phase, weight):
        pdr, pol, cav = ps.design_pdr(), ps.design_polarizer(), ps.design_cavity()
        eff = ps.effective_reflections(pdr, pol, cav)
        a = math.sqrt(weight)
        b = math.sqrt(1 - weight) * cmath.exp(1j * phase)
        joint = ps.evolve_joint_state(ps.PhotonQubit(a, b), eff)
        total = sum(ps.herald_spin_state(joint, o)[0] for o in HeraldOutcome)
        assert total <= 1 + 1e-12

    def test_lossless_device_conserves_exactly(self):
        joint = ps.evolve_joint_state(ps.PhotonQubit(0.6, 0.8), IDEAL_REFLECTIONS)
        total = sum(ps.herald_spin_state(joint, o)[0] for o in HeraldOutcome)
        assert total == pytest.approx(1.0, abs=1e-12)


class TestTransferFidelity:
    def test_design_point_matches_oracle(self, design):
        report = ps.transfer_fidelity(*design)
        assert report.f_avg == pytest.approx(ORACLE_F_DESIGN, abs=1e-9)
        assert report.f_avg >= 0.999

    def test_fidelities_bounded_and_averaged(self, design):
        report = ps.transfer_fidelity(*design)
        assert all(0 <= f <= 1 for _, f in report.per_input)
        mean = sum(f for _, f in report.per_input) / 4
        assert report.f_avg == pytest.approx(mean, abs=1e-15)

    def test_critical_coupling_degrades(self):
        cav = ps.CavityParams.from_ratios(0.5, 4.0)
        report = ps.transfer_fidelity(ps.design_pdr(), ps.design_polarizer(), cav)
        assert report.f_avg < ps.transfer_fidelity(
            ps.design_pdr(), ps.design_polarizer(), ps.design_cavity()).f_avg

    def test_global_phase_invariance(self, design):
        pdr, pol, cav = design
        eff = ps.effective_reflections(pdr, pol, cav)

        def weighted_fidelity(alpha, beta):
            joint = ps.evolve_joint_state(ps.PhotonQubit(alpha, beta), eff)
            target = ps.SpinState(alpha, beta)
            num = den = 0.0
            for outcome in HeraldOutcome:
                p, spin = ps.herald_spin_state(joint, outcome)
                num += p * spin.fidelity(target)
                den += p
            return num / den

        for label, a, b in TARGET_STATES:
            phased = cmath.exp(0.7j)
            assert weighted_fidelity(a * phased, b * phased) == pytest.approx(
                weighted_fidelity(a, b), abs=1e-12), label

    def test_scattering_only_degrades(self):
        # grow V scattering at fixed R_V: fidelity strictly decreases
        pol, cav = ps.design_polarizer(), ps.design_cavity()
        fs = [ps.transfer_fidelity(
            ps.PdrParams.from_power(T_V=0.99 - z, R_H=0.15, zeta_V=z), pol, cav).f_avg
            for z in np.linspace(0.0, 0.3, 7)]
        assert all(a > b for a, b in zip(fs, fs[1:]))


class TestLossBalance:
    def test_ideal_coefficients_balance(self):
        assert ps.loss_balance_residual(IDEAL_REFLECTIONS) == pytest.approx(0.0)

    def test_dead_v_arm_balances_trivially(self):
        eff = ps.EffectiveReflections(-0.7, -0.7, 0.0, 0.0)
        assert ps.loss_balance_residual(eff) == pytest.approx(0.0)

    def test_design_point_residual(self, design):
        eff = ps.effective_reflections(*design)
        assert ps.loss_balance_residual(eff) == pytest.approx(ORACLE_RESIDUAL, abs=1e-9)

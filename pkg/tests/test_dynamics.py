import numpy as np
import pytest

from spin1chain.dynamics import (
    QUTRIT_TEST_STATES,
    StateVector,
    amplitude_scan,
    block_transfer_amplitudes,
    evolution_cache,
    evolve,
    mirror_check,
    qutrit_transfer_fidelity,
    transfer_amplitude,
)
from spin1chain.hamiltonians import (
    ChainSpec,
    chain_hamiltonian,
    engineered_sigma_block,
    pst_preset,
    sigma_projector,
)
from spin1chain.parity import sigma_mirror_permutation
from spin1chain.spin_ops import basis_index


def three_site_formula(t):
    """End-to-end amplitude of the three-site combined-interaction chain."""
    return (np.exp(1j * t) - 3 * np.exp(3j * t) + 2 * np.exp(4j * t)) / 6.0


@pytest.fixture(scope="module")
def chain3():
    return chain_hamiltonian(ChainSpec(n=3, kind="heisenberg_squared_sum"))


@pytest.fixture(scope="module")
def chain3_mix():
    return chain_hamiltonian(ChainSpec(n=3, kind="heisenberg_squared_mix"))


class TestEvolve:
    def test_time_zero_identity(self, chain3):
        psi = StateVector.from_label("001")
        out = evolve(chain3, psi, 0.0)
        assert np.max(np.abs(out.amplitudes - psi.amplitudes)) <= 1e-13

    def test_unitarity(self, chain3):
        rng = np.random.default_rng(21)
        psi = rng.normal(size=27) + 1j * rng.normal(size=27)
        psi /= np.linalg.norm(psi)
        out = evolve(chain3, psi, 2.37)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-12

    def test_vacuum_stationary_under_engineered(self):
        spec = pst_preset(3, "standard")
        ham = chain_hamiltonian(spec)
        vac = StateVector.from_label("000")
        out = evolve(ham, vac, 1.9)
        # eigenvalue 0 exactly: not even a global phase
        assert np.max(np.abs(out.amplitudes - vac.amplitudes)) <= 1e-12

    def test_group_law(self, chain3):
        rng = np.random.default_rng(22)
        cache = evolution_cache(chain3)
        for _ in range(5):
            psi = rng.normal(size=27) + 1j * rng.normal(size=27)
            psi /= np.linalg.norm(psi)
            t1, t2 = rng.uniform(0, 5, 2)
            once = evolve(cache, evolve(cache, psi, t1), t2)
            both = evolve(cache, psi, t1 + t2)
            assert np.max(np.abs(once - both)) <= 1e-10

    def test_time_sign_conjugation(self, chain3):
        psi = StateVector.from_label("001")
        fwd = evolve(chain3, psi, 1.3, sign=1)
        bwd = evolve(chain3, psi, 1.3, sign=-1)
        # real Hamiltonian, real initial state: reversed evolution is the conjugate
        assert np.max(np.abs(np.conj(fwd.amplitudes) - bwd.amplitudes)) <= 1e-12

    def test_cache_reuse(self, chain3):
        c1 = evolution_cache(chain3)
        c2 = evolution_cache(chain3)
        assert c1 is c2
        assert c1.fingerprint == c2.fingerprint


class TestStateVector:
    def test_norm_enforced(self):
        with pytest.raises(ValueError, match="norm"):
            StateVector(np.array([1.0, 1.0, 0.0, 0, 0, 0, 0, 0, 0]), "full", 2)

    def test_label_constructor(self):
        psi = StateVector.from_label("0m1")
        assert psi.amplitudes[basis_index("0m1")] == 1.0
        assert psi.n == 3


class TestTransferAmplitude:
    def test_formula_regression(self, chain3):
        cache = evolution_cache(chain3)
        for t in np.linspace(0, 4 * np.pi, 257):
            amp = transfer_amplitude(cache, "001", "100", t)
            assert abs(amp - three_site_formula(t)) <= 1e-10

    def test_value_at_two_thirds_pi(self, chain3):
        amp = transfer_amplitude(chain3, "001", "100", 2 * np.pi / 3)
        assert abs(amp - (-0.75 + 0.25j * np.sqrt(3))) <= 1e-12
        assert abs(abs(amp) - np.sqrt(3) / 2) <= 1e-12
        assert abs(np.angle(amp) - 5 * np.pi / 6) <= 1e-12

    def test_half_normalized_chain_needs_doubled_time(self, chain3_mix):
        # the 1/2-normalized interaction halves every frequency: the same
        # amplitude appears at twice the time
        cache = evolution_cache(chain3_mix)
        for t in (0.7, 2 * np.pi / 3, 3.1):
            amp = transfer_amplitude(cache, "001", "100", 2 * t)
            assert abs(amp - three_site_formula(t)) <= 1e-10

    def test_t_zero_orthogonal(self, chain3):
        assert abs(transfer_amplitude(chain3, "001", "100", 0.0)) <= 1e-14

    def test_probability_conserved_in_sigma(self):
        spec = pst_preset(4, "standard")
        ham = chain_hamiltonian(spec)
        cache = evolution_cache(ham)
        proj = sigma_projector(4)
        psi = StateVector.from_label("1000")
        for t in (0.3, 1.7, np.pi):
            out = evolve(cache, psi, t)
            inside = np.linalg.norm(proj @ out.amplitudes) ** 2
            assert abs(inside - 1.0) <= 1e-12


class TestAmplitudeScan:
    def test_two_site_swap_peak(self):
        ham = chain_hamiltonian(ChainSpec(n=2, kind="heisenberg_squared_mix"))
        times = np.arange(0.0, 4 * np.pi, 1e-3)
        scan = amplitude_scan(ham, "01", "10", times)
        assert scan.max_abs >= 1 - 1e-6
        # first-peak localization is sqrt(2*tol/curvature) ~ a few grid steps
        assert abs(scan.first_peak_time - np.pi) <= 5e-3

    def test_three_site_peak_at_two_thirds_pi(self, chain3):
        times = np.arange(0.0, 4 * np.pi, 1e-3)
        scan = amplitude_scan(chain3, "001", "100", times)
        assert abs(scan.max_abs - np.sqrt(3) / 2) <= 1e-6
        assert abs(scan.first_peak_time - 2 * np.pi / 3) <= 2e-3

    def test_four_site_long_window_regression(self):
        # near-recurrences push the four-site maximum above 0.999 within
        # t <= 40*pi even though no time achieves perfect transfer
        ham = chain_hamiltonian(ChainSpec(n=4, kind="heisenberg_squared_sum"))
        times = np.arange(0.0, 40 * np.pi, 1e-3)
        scan = amplitude_scan(ham, "0001", "1000", times)
        assert 0.9990 < scan.max_abs < 1 - 5e-5
        assert abs(scan.max_abs - 0.9998165) <= 1e-4
        assert abs(scan.argmax_time - 91.093) <= 1e-2

    def test_grid_validation(self, chain3):
        with pytest.raises(ValueError, match="strictly increasing"):
            amplitude_scan(chain3, "001", "100", np.array([0.0, 0.0, 1.0]))
        with pytest.raises(ValueError, match="non-empty"):
            amplitude_scan(chain3, "001", "100", np.array([]))


class TestQutritFidelity:
    def test_vacuum_input_any_time(self):
        spec = pst_preset(3, "standard")
        for t in (0.0, 1.1, np.pi):
            assert qutrit_transfer_fidelity(spec, (1, 0, 0), t) >= 1 - 1e-12

    def test_standard_preset_needs_phase_correction(self):
        spec = pst_preset(2, "standard")
        state = (1 / np.sqrt(2), 1 / np.sqrt(2), 0.0)
        raw = qutrit_transfer_fidelity(spec, state, np.pi, phase_correct=False)
        corrected = qutrit_transfer_fidelity(spec, state, np.pi, phase_correct=True)
        assert abs(raw - 0.5) <= 1e-10  # vacuum and band pick up relative phase -i
        assert corrected >= 1 - 1e-10

    def test_band_phases_standard(self):
        # both bands mirror with the same phase +-i at t = pi
        for n in (2, 3, 5):
            f_up, f_down = block_transfer_amplitudes(pst_preset(n, "standard"), np.pi)
            assert abs(abs(f_up) - 1) <= 1e-10
            assert abs(f_up - f_down) <= 1e-10
            assert abs(f_up.real) <= 1e-10

    def test_phase_exact_preset_raw(self):
        for n in (2, 4, 7):
            spec = pst_preset(n, "phase_exact")
            for state in QUTRIT_TEST_STATES[:5]:
                assert qutrit_transfer_fidelity(spec, state, np.pi) >= 1 - 1e-8

    def test_normalization_enforced(self):
        with pytest.raises(ValueError, match="normalized"):
            qutrit_transfer_fidelity(pst_preset(2, "standard"), (1.0, 1.0, 0.0), np.pi)

    def test_requires_engineered(self):
        spec = ChainSpec(n=3, kind="heisenberg")
        with pytest.raises(ValueError, match="engineered"):
            qutrit_transfer_fidelity(spec, (1, 0, 0), 1.0)


class TestMirrorCheck:
    def test_two_site_swap_generator(self):
        ham = chain_hamiltonian(ChainSpec(n=2, kind="heisenberg_squared_mix"))
        result = mirror_check(ham, np.pi)
        assert result.is_mirror
        assert abs(abs(result.phase) - np.pi) <= 1e-9
        assert result.residual <= 1e-12
        # even states evolve with phase -1, odd states with +1
        assert len(result.even_phases) == 1 and abs(result.even_phases[0] + 1) <= 1e-9
        assert len(result.odd_phases) == 1 and abs(result.odd_phases[0] - 1) <= 1e-9

    def test_three_site_fails(self, chain3):
        result = mirror_check(chain3, 2 * np.pi / 3)
        assert not result.is_mirror
        assert result.residual > 0.1

    def test_sigma_block_phase_exact(self):
        spec = pst_preset(5, "phase_exact")
        block = engineered_sigma_block(spec)
        result = mirror_check(block, np.pi, space="sigma")
        assert result.is_mirror
        assert abs(result.phase) <= 1e-9
        assert result.residual <= 1e-10

    def test_sigma_block_commutes_with_mirror(self):
        for n in (2, 4, 6):
            block = engineered_sigma_block(pst_preset(n, "standard"))
            mirror = sigma_mirror_permutation(n)
            assert np.max(np.abs(block @ mirror - mirror @ block)) <= 1e-13

import json

import numpy as np
import pytest

from spin1chain.hamiltonians import (
    AUTO_DENSE_MAX,
    ChainSpec,
    SigmaBasis,
    SpecError,
    SubspaceLeakageError,
    SWAP2,
    candidate_two_site,
    chain_hamiltonian,
    down_block,
    engineered_sigma_block,
    h12,
    heisenberg_two_site,
    mirror_parities,
    mix_two_site,
    project_to_sigma,
    pst_preset,
    sigma_leakage,
    sigma_projector,
    squared_sum_two_site,
    swap_check,
    transfer_couplings,
    up_block,
)
from spin1chain.linalg import eig_hermitian
from spin1chain.spin_ops import basis_index, embed, site_operator


def random_engineered(rng, n, low=-2.0, high=2.0):
    return ChainSpec(
        n=n,
        kind="engineered",
        a=tuple(rng.uniform(low, high, n - 1)),
        b=tuple(rng.uniform(low, high, n - 1)),
        B=tuple(rng.uniform(low, high, n)),
        C=tuple(rng.uniform(low, high, n)),
    )


class TestTwoSiteBuilders:
    def test_heisenberg_spectrum(self):
        evals = np.linalg.eigvalsh(heisenberg_two_site())
        assert np.allclose(evals, [-2] + [-1] * 3 + [1] * 5, atol=1e-12)

    def test_h12_spectrum_and_trace(self):
        mat = h12().dense()
        evals = np.linalg.eigvalsh(mat)
        assert np.allclose(evals, [0] * 3 + [1] * 6, atol=1e-12)
        assert np.isclose(np.trace(mat).real, 6.0)
        assert np.max(np.abs(mat - mat.conj().T)) <= 1e-14

    def test_squared_sum_is_twice_mix(self):
        assert np.allclose(squared_sum_two_site(), 2 * mix_two_site())

    def test_candidate_o2_diagonal(self):
        expected = [1, 0, -1, 0, 0, 0, -1, 0, 1]
        assert np.allclose(np.diag(candidate_two_site("O2")), expected)

    def test_candidate_o4_spectrum(self):
        evals = np.linalg.eigvalsh(candidate_two_site("O4"))
        assert np.allclose(sorted(evals), [0] * 5 + [1] * 4, atol=1e-12)

    def test_candidate_o1_contains_sqrt2(self):
        evals = np.linalg.eigvalsh(candidate_two_site("O1"))
        assert np.min(np.abs(evals - np.sqrt(2))) <= 1e-10
        assert np.min(np.abs(evals + np.sqrt(2))) <= 1e-10

    def test_unknown_candidate(self):
        with pytest.raises(ValueError, match="O1..O5"):
            candidate_two_site("O6")

    def test_h12_requires_two_sites(self):
        with pytest.raises(ValueError):
            h12(3)


class TestSwapCheck:
    @staticmethod
    def _unitary(ham, t):
        es = eig_hermitian(ham)
        return (es.eigenvectors * np.exp(1j * es.eigenvalues * t)) @ es.eigenvectors.conj().T

    def test_mix_at_pi_is_swap_with_phase_minus_one(self):
        result = swap_check(self._unitary(mix_two_site(), np.pi))
        assert result.is_swap_up_to_phase
        assert abs(result.phase - (-1.0)) <= 1e-10
        assert result.residual <= 1e-12

    def test_identity_is_not_swap(self):
        result = swap_check(np.eye(9, dtype=complex))
        assert not result.is_swap_up_to_phase

    def test_phased_swap_recovered(self):
        alpha = 0.7
        result = swap_check(np.exp(1j * alpha) * SWAP2)
        assert result.is_swap_up_to_phase
        assert abs(result.phase - np.exp(1j * alpha)) <= 1e-10

    def test_heisenberg_at_pi_fails(self):
        result = swap_check(self._unitary(heisenberg_two_site(), np.pi))
        assert not result.is_swap_up_to_phase
        # even quintuplet and even singlet pick up opposite signs
        assert result.residual > 1.0

    def test_mix_at_half_pi_fails(self):
        result = swap_check(self._unitary(mix_two_site(), np.pi / 2))
        assert not result.is_swap_up_to_phase

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="not unitary"):
            swap_check(np.ones((9, 9)))


class TestChainSpec:
    def test_requires_min_length(self):
        with pytest.raises(SpecError, match="n"):
            ChainSpec(n=1, kind="heisenberg")

    def test_unknown_kind(self):
        with pytest.raises(SpecError, match="kind"):
            ChainSpec(n=3, kind="xy")

    def test_engineered_length_checks(self):
        with pytest.raises(SpecError, match="a"):
            ChainSpec(n=3, kind="engineered", a=(1.0,), b=(1.0, 1.0), B=(0,) * 3, C=(0,) * 3)

    def test_time_sign(self):
        with pytest.raises(SpecError, match="time_sign"):
            ChainSpec(n=2, kind="heisenberg", time_sign=2)

    def test_json_roundtrip(self):
        spec = pst_preset(4, "standard")
        again = ChainSpec.from_json(json.dumps(spec.to_json_dict()))
        assert again == spec

    def test_unknown_json_field_rejected(self):
        data = {"n": 2, "kind": "heisenberg", "coupling": 3}
        with pytest.raises(SpecError, match="unknown fields"):
            ChainSpec.from_json_dict(data)

    def test_non_numeric_coupling_rejected(self):
        data = {"n": 2, "kind": "engineered", "a": ["x"], "b": [1], "B": [0, 0], "C": [1, 1]}
        with pytest.raises(SpecError, match="array of numbers"):
            ChainSpec.from_json_dict(data)


class TestChainHamiltonian:
    def test_mix_chain_matches_embedded_sum(self):
        spec = ChainSpec(n=3, kind="heisenberg_squared_mix")
        ham = chain_hamiltonian(spec)
        assert ham.dim == 27
        term = mix_two_site()
        expected = np.kron(term, np.eye(3)) + np.kron(np.eye(3), term)
        assert np.max(np.abs(ham.dense() - expected)) <= 1e-14
        assert ham.hermiticity_deviation() <= 1e-14

    def test_engineered_two_site_example(self):
        spec = ChainSpec(n=2, kind="engineered", a=(0.5,), b=(0.5,), B=(0, 0), C=(1, 1))
        ham = chain_hamiltonian(spec).dense()
        vac = np.zeros(9)
        vac[basis_index("00")] = 1.0
        assert np.linalg.norm(ham @ vac) <= 1e-14
        assert np.isclose(ham[basis_index("10"), basis_index("01")], 0.5)

    def test_vacuum_always_stationary(self):
        rng = np.random.default_rng(13)
        for n in (2, 3, 5):
            spec = random_engineered(rng, n)
            ham = chain_hamiltonian(spec)
            vac = np.zeros(ham.dim)
            vac[basis_index("0" * n)] = 1.0
            assert np.linalg.norm(ham.dense() @ vac) <= 1e-13

    def test_sparse_matches_dense(self):
        rng = np.random.default_rng(14)
        spec = random_engineered(rng, 4)
        dense = chain_hamiltonian(spec, representation="dense").dense()
        sparse = chain_hamiltonian(spec, representation="sparse")
        assert sparse.is_sparse
        assert np.max(np.abs(sparse.dense() - dense)) <= 1e-14

    def test_auto_switches_to_sparse(self):
        rng = np.random.default_rng(15)
        spec = random_engineered(rng, AUTO_DENSE_MAX + 1)
        assert chain_hamiltonian(spec).is_sparse

    def test_dense_cap_enforced(self):
        rng = np.random.default_rng(16)
        spec = random_engineered(rng, 9)
        with pytest.raises(ValueError, match="dense cap"):
            chain_hamiltonian(spec, representation="dense")
        ham = chain_hamiltonian(spec, representation="sparse")
        assert ham.dim == 3 ** 9

    @pytest.mark.parametrize("kind", ["heisenberg", "heisenberg_squared_mix",
                                      "heisenberg_squared_sum", "O1", "O2", "O3",
                                      "O4", "O5"])
    @pytest.mark.parametrize("n", [2, 4])
    def test_every_kind_is_hermitian(self, kind, n):
        ham = chain_hamiltonian(ChainSpec(n=n, kind=kind))
        assert ham.dim == 3 ** n
        assert ham.hermiticity_deviation() <= 1e-14

    def test_candidate_chain_sum_structure(self):
        # O-couplings extend to uniform nearest-neighbor chain sums
        ham = chain_hamiltonian(ChainSpec(n=3, kind="O2")).dense()
        term = candidate_two_site("O2")
        expected = np.kron(term, np.eye(3)) + np.kron(np.eye(3), term)
        assert np.max(np.abs(ham - expected)) <= 1e-14


class TestSigmaSubspace:
    def test_basis_labels_n2(self):
        basis = SigmaBasis(2)
        assert basis.labels() == ["10", "01", "00", "m0", "0m"]
        assert basis.dim == 5
        assert basis.vacuum_position == 2

    def test_projector_is_isometry(self):
        for n in (2, 3, 4):
            proj = sigma_projector(n)
            assert proj.shape == (2 * n + 1, 3 ** n)
            assert np.allclose(proj @ proj.conj().T, np.eye(2 * n + 1))
            gram = proj.conj().T @ proj
            assert np.isclose(np.trace(gram).real, 2 * n + 1)
            assert np.allclose(gram @ gram, gram)

    def test_sparse_projector(self):
        dense = sigma_projector(3)
        sparse = sigma_projector(3, sparse=True)
        assert np.max(np.abs(sparse.toarray() - dense)) == 0.0

    def test_projection_reproduces_couplings(self):
        rng = np.random.default_rng(17)
        for n in (2, 3, 4):
            spec = random_engineered(rng, n)
            block = project_to_sigma(chain_hamiltonian(spec))
            assert np.max(np.abs(np.diag(block[:n, :n]) - (np.array(spec.C) + spec.B))) <= 1e-14
            assert np.max(np.abs(np.diag(block[:n, :n], 1) - np.array(spec.a))) <= 1e-14
            assert np.max(np.abs(np.diag(block[n + 1:, n + 1:]) - (np.array(spec.C) - np.array(spec.B)))) <= 1e-14
            assert np.max(np.abs(np.diag(block[n + 1:, n + 1:], 1) - np.array(spec.b))) <= 1e-14
            assert np.max(np.abs(block[n, :])) == 0.0
            assert np.max(np.abs(block[:, n])) == 0.0

    def test_down_block_uniform_fields(self):
        spec = ChainSpec(n=2, kind="engineered", a=(0.3,), b=(0.4,), B=(0.2, 0.2), C=(0.9, 0.9))
        block = down_block(spec)
        assert np.allclose(np.diag(block), [0.7, 0.7])
        assert np.isclose(block[0, 1], 0.4)

    def test_direct_block_matches_projection(self):
        rng = np.random.default_rng(18)
        for n in (2, 3, 5):
            spec = random_engineered(rng, n)
            via_projection = project_to_sigma(chain_hamiltonian(spec))
            direct = engineered_sigma_block(spec)
            assert np.max(np.abs(via_projection - direct)) <= 1e-14

    def test_leakage_for_non_engineered_chain(self):
        spec = ChainSpec(n=2, kind="heisenberg")
        ham = chain_hamiltonian(spec)
        assert sigma_leakage(ham) > 0.1
        with pytest.raises(SubspaceLeakageError):
            project_to_sigma(ham)

    def test_engineered_leakage_is_zero(self):
        rng = np.random.default_rng(19)
        spec = random_engineered(rng, 5)
        assert sigma_leakage(chain_hamiltonian(spec)) <= 1e-12

    def test_example_up_block(self):
        spec = ChainSpec(n=2, kind="engineered", a=(0.5,), b=(0.5,), B=(0, 0), C=(1, 1))
        block = up_block(spec)
        assert np.allclose(block, [[1.0, 0.5], [0.5, 1.0]])
        assert np.allclose(np.linalg.eigvalsh(block), [0.5, 1.5])


class TestPresets:
    def test_transfer_couplings_n4(self):
        assert np.allclose(transfer_couplings(4), [np.sqrt(3) / 2, 1.0, np.sqrt(3) / 2])

    def test_standard_preset_n4(self):
        spec = pst_preset(4, "standard")
        assert np.allclose(spec.a, [np.sqrt(3) / 2, 1.0, np.sqrt(3) / 2])
        assert spec.a == spec.b
        assert np.allclose(spec.C, [2.0] * 4)
        assert np.allclose(spec.B, [0.0] * 4)

    def test_standard_preset_n2_block(self):
        spec = pst_preset(2, "standard")
        assert np.allclose(np.linalg.eigvalsh(up_block(spec)), [0.5, 1.5])

    def test_phase_exact_n2(self):
        spec = pst_preset(2, "phase_exact")
        assert np.isclose(spec.C[0], 1.5)
        evals, parities = mirror_parities(up_block(spec))
        assert np.allclose(evals, [1.0, 2.0])
        assert np.allclose(parities, [-1.0, 1.0])  # odd eigenvalue odd vector, even even

    def test_phase_exact_fields_follow_length_pattern(self):
        # first parity-matched field repeats with period 4 in the chain length
        expected = {2: 1.5, 3: 1.0, 4: 0.5, 5: 0.0, 6: 1.5, 7: 1.0, 8: 0.5}
        for n, want in expected.items():
            assert np.isclose(pst_preset(n, "phase_exact").C[0], want)

    def test_unit_gap_spectrum(self):
        for n in range(2, 9):
            evals = np.linalg.eigvalsh(up_block(pst_preset(n, "standard")))
            assert np.max(np.abs(np.diff(evals) - 1.0)) <= 1e-10

    def test_bad_variant(self):
        with pytest.raises(ValueError, match="variant"):
            pst_preset(4, "exotic")

    def test_eigenvalue_parity_match_for_phase_exact(self):
        for n in (3, 6):
            evals, parities = mirror_parities(up_block(pst_preset(n, "phase_exact")))
            for ev, par in zip(evals, parities):
                assert abs(ev - round(ev)) <= 1e-9
                assert par == (1.0 if round(ev) % 2 == 0 else -1.0)

import numpy as np
import pytest
from hypothesis import given, settings

from spp_teleport.qcore import (
    MixedState,
    PAULI_MATRICES,
    bloch_of,
    state_from_bloch,
    trace_distance,
)
from spp_teleport.tomo import (
    AffineBlochMap,
    BASES,
    MeasurementRecord,
    ProcessMatrix,
    TomographyError,
    bloch_map_of,
    bloch_sphere_samples,
    chi_identity,
    monte_carlo_errors,
    process_fidelity,
    qpt_reconstruct,
    qst_reconstruct,
    sample_measurements,
)

from conftest import mixed_states, random_mixed, random_pure


def exact_records(rho, scale=1.0):
    """Noise-free measurement records: counts proportional to the exact
    outcome probabilities."""
    x, y, z = bloch_of(rho).as_array()
    by_axis = {"X": x, "Y": y, "Z": z}
    return [
        MeasurementRecord(b, scale * (1 + by_axis[b]) / 2, scale * (1 - by_axis[b]) / 2)
        for b in BASES
    ]


def depolarizing_chi(p):
    chi = np.zeros((4, 4), dtype=complex)
    chi[0, 0] = 1 - 3 * p / 4
    chi[1, 1] = chi[2, 2] = chi[3, 3] = p / 4
    return ProcessMatrix(chi)


def amplitude_damping_chi(gamma):
    # Kraus operators expanded in the Pauli basis: K0 = a I + b Z,
    # K1 = (sqrt(gamma)/2)(X + iY)
    a = (1 + np.sqrt(1 - gamma)) / 2
    b = (1 - np.sqrt(1 - gamma)) / 2
    c0 = np.array([a, 0, 0, b], dtype=complex)
    c1 = np.array([0, np.sqrt(gamma) / 2, 1j * np.sqrt(gamma) / 2, 0])
    return ProcessMatrix(np.outer(c0, c0.conj()) + np.outer(c1, c1.conj()))


QPT_INPUTS = [
    MixedState(np.array([[1, 0], [0, 0]], dtype=complex)),
    MixedState(np.array([[0, 0], [0, 1]], dtype=complex)),
    MixedState(np.ones((2, 2)) / 2),
    MixedState(np.array([[1, -1j], [1j, 1]]) / 2),
]


class TestMeasurementRecord:
    def test_bad_basis(self):
        with pytest.raises(TomographyError):
            MeasurementRecord("W", 1, 1)

    def test_negative_counts(self):
        with pytest.raises(TomographyError):
            MeasurementRecord("Z", -1, 1)


class TestSampling:
    def test_deterministic(self):
        rho = random_mixed(np.random.default_rng(0))
        a = sample_measurements(rho, 1000, seed=42)
        b = sample_measurements(rho, 1000, seed=42)
        assert a == b

    def test_pure_h_counts(self):
        rho = MixedState(np.diag([1.0, 0.0]))
        recs = {r.basis: r for r in sample_measurements(rho, 500, seed=0)}
        assert recs["Z"].plus_counts == 500
        assert recs["Z"].minus_counts == 0


class TestQst:
    def test_exact_pure(self):
        rho = MixedState(np.diag([1.0, 0.0]))
        assert trace_distance(qst_reconstruct(exact_records(rho)), rho) < 1e-12

    def test_exact_mixed(self):
        rho = MixedState.maximally_mixed(2)
        assert trace_distance(qst_reconstruct(exact_records(rho)), rho) < 1e-12

    def test_exact_random_states(self, rng):
        for _ in range(100):
            rho = random_mixed(rng)
            rec = qst_reconstruct(exact_records(rho))
            assert trace_distance(rec, rho) < 1e-10

    def test_radial_projection(self):
        # inconsistent over-complete counts land outside the Bloch ball and
        # must come back along the same direction
        recs = [
            MeasurementRecord("X", 99, 1),
            MeasurementRecord("Y", 99, 1),
            MeasurementRecord("Z", 99, 1),
        ]
        rho = qst_reconstruct(recs)
        r = bloch_of(rho).as_array()
        assert np.linalg.norm(r) <= 1 + 1e-12
        assert np.allclose(r / np.linalg.norm(r), np.ones(3) / np.sqrt(3), atol=1e-10)

    def test_missing_basis(self):
        with pytest.raises(TomographyError):
            qst_reconstruct([MeasurementRecord("Z", 10, 10)])

    def test_ml_close_to_linear_inversion(self, rng):
        rho = random_mixed(rng)
        recs = sample_measurements(rho, 200_000, seed=5)
        lin = qst_reconstruct(recs)
        ml = qst_reconstruct(recs, max_likelihood=True)
        assert trace_distance(lin, ml) < 5e-3
        assert trace_distance(ml, rho) < 1e-2

    def test_sampled_converges(self, rng):
        rho = random_mixed(rng)
        recs = sample_measurements(rho, 1_000_000, seed=9)
        assert trace_distance(qst_reconstruct(recs), rho) < 5e-3

    @settings(max_examples=40)
    @given(mixed_states())
    def test_exact_round_trip_property(self, rho):
        assert trace_distance(qst_reconstruct(exact_records(rho)), rho) < 1e-9


class TestProcessMatrix:
    def test_validation(self):
        with pytest.raises(TomographyError):
            ProcessMatrix(np.eye(3))
        with pytest.raises(TomographyError):
            ProcessMatrix(np.eye(4))  # trace 4

    def test_identity_apply(self, rng):
        rho = random_mixed(rng)
        out = chi_identity().apply(rho)
        assert trace_distance(out, rho) < 1e-12

    def test_depolarizing_apply(self, rng):
        p = 0.3
        rho = random_mixed(rng)
        out = depolarizing_chi(p).apply(rho)
        ref = MixedState((1 - p) * rho.matrix + p * np.eye(2) / 2)
        assert trace_distance(out, ref) < 1e-12


class TestQpt:
    def test_identity_channel(self):
        pairs = [(rho, rho) for rho in QPT_INPUTS]
        chi = qpt_reconstruct(pairs)
        assert np.allclose(chi.chi, chi_identity().chi, atol=1e-10)

    def test_pure_x_channel(self):
        sx = PAULI_MATRICES[1]
        pairs = [(rho, MixedState(sx @ rho.matrix @ sx)) for rho in QPT_INPUTS]
        chi = qpt_reconstruct(pairs)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        assert np.allclose(chi.chi, expected, atol=1e-10)

    @pytest.mark.parametrize("p", [0.05, 0.2, 0.6])
    def test_depolarizing_diagonals(self, p):
        ref = depolarizing_chi(p)
        pairs = [(rho, ref.apply(rho)) for rho in QPT_INPUTS]
        chi = qpt_reconstruct(pairs)
        diag = np.diag(chi.chi).real
        assert np.allclose(diag, [1 - 3 * p / 4, p / 4, p / 4, p / 4], atol=1e-9)

    def test_rank_deficient_inputs(self):
        pairs = [(QPT_INPUTS[0], QPT_INPUTS[0])] * 4
        with pytest.raises(TomographyError):
            qpt_reconstruct(pairs)

    def test_too_few_pairs(self):
        with pytest.raises(TomographyError):
            qpt_reconstruct([(QPT_INPUTS[0], QPT_INPUTS[0])])

    def test_cp_projection_clips(self):
        # slightly unphysical outputs produce small negative chi eigenvalues
        ref = depolarizing_chi(0.1)
        pairs = []
        for i, rho in enumerate(QPT_INPUTS):
            out = ref.apply(rho).matrix
            bump = 0.004 if i % 2 else -0.004
            out = (1 - abs(bump)) * out + abs(bump) * np.eye(2) / 2
            if i == 0:
                out = 0.996 * out + 0.004 * np.array([[0, 0], [0, 1.0]])
            pairs.append((rho, MixedState(out)))
        chi = qpt_reconstruct(pairs, cp_projection=True)
        assert np.linalg.eigvalsh(chi.chi).min() >= -1e-12


class TestProcessFidelity:
    def test_identity_perfect(self):
        assert process_fidelity(chi_identity(), chi_identity()) == 1.0

    @pytest.mark.parametrize("p", [0.0, 0.25, 1.0])
    def test_depolarizing(self, p):
        assert process_fidelity(depolarizing_chi(p), chi_identity()) == pytest.approx(
            1 - 3 * p / 4, abs=1e-12)

    def test_average_fidelity_relation(self):
        # for Pauli-diagonal channels F_avg = (2 F_proc + 1) / 3
        p = 0.4
        chi = depolarizing_chi(p)
        f_proc = process_fidelity(chi, chi_identity())
        fids = []
        for rho in QPT_INPUTS:
            evals, evecs = np.linalg.eigh(rho.matrix)
            phi = evecs[:, np.argmax(evals)]
            out = chi.apply(rho)
            fids.append(np.vdot(phi, out.matrix @ phi).real)
        assert np.mean(fids) == pytest.approx((2 * f_proc + 1) / 3, abs=1e-10)


class TestBlochMap:
    def test_identity(self):
        bmap = bloch_map_of(chi_identity())
        assert np.allclose(bmap.linear, np.eye(3), atol=1e-10)
        assert np.allclose(bmap.offset, 0, atol=1e-10)

    def test_depolarizing_shrink(self):
        p = 0.35
        bmap = bloch_map_of(depolarizing_chi(p))
        assert np.allclose(bmap.linear, (1 - p) * np.eye(3), atol=1e-10)
        assert np.allclose(bmap.offset, 0, atol=1e-10)

    def test_amplitude_damping_offset(self):
        gamma = 0.3
        bmap = bloch_map_of(amplitude_damping_chi(gamma))
        s = np.sqrt(1 - gamma)
        assert np.allclose(bmap.linear, np.diag([s, s, 1 - gamma]), atol=1e-10)
        assert np.allclose(bmap.offset, [0, 0, gamma], atol=1e-10)

    def test_map_matches_apply(self, rng):
        chi = amplitude_damping_chi(0.2)
        bmap = bloch_map_of(chi)
        for _ in range(10):
            rho = random_mixed(rng)
            r = bloch_of(rho).as_array()
            direct = bloch_of(chi.apply(rho)).as_array()
            assert np.allclose(bmap(r), direct, atol=1e-10)

    def test_compose(self):
        a = AffineBlochMap(0.5 * np.eye(3), np.array([0.0, 0.0, 0.1]))
        b = AffineBlochMap(np.diag([1.0, -1.0, 1.0]), np.zeros(3))
        r = np.array([0.2, -0.3, 0.4])
        assert np.allclose(a.compose(b)(r), a(b(r)), atol=1e-14)

    def test_sphere_samples_shapes(self):
        samples = bloch_sphere_samples(bloch_map_of(chi_identity()), n_theta=4, n_phi=6)
        assert len(samples) == 24
        for src, img in samples:
            assert np.allclose(src.as_array(), img, atol=1e-10)


class TestMonteCarlo:
    def test_constant_statistic_zero_std(self):
        mean, std = monte_carlo_errors([100, 200], lambda c: 1.0, trials=200, seed=0)
        assert mean == 1.0
        assert std == 0.0

    def test_deterministic_and_thread_invariant(self):
        counts = [2746, 120]
        stat = lambda c: c[0] / (c[0] + c[1])
        a = monte_carlo_errors(counts, stat, trials=1000, seed=3, threads=1)
        b = monte_carlo_errors(counts, stat, trials=1000, seed=3, threads=8)
        assert a == b

    def test_poisson_scaling(self):
        # quadrupling the counts should halve the relative error
        stat = lambda c: c[0] / (c[0] + c[1])
        _, s1 = monte_carlo_errors([900, 100], stat, trials=4000, seed=1)
        _, s2 = monte_carlo_errors([3600, 400], stat, trials=4000, seed=1)
        assert s1 / s2 == pytest.approx(2.0, rel=0.15)

    def test_matches_binomial_formula(self):
        n_phi, n_perp = 2746, 120
        stat = lambda c: c[0] / (c[0] + c[1])
        _, std = monte_carlo_errors([n_phi, n_perp], stat, trials=4000, seed=0)
        total = n_phi + n_perp
        f = n_phi / total
        analytic = np.sqrt(f * (1 - f) / total)  # delta method, independent Poissons
        assert std == pytest.approx(analytic, rel=0.1)

    def test_trials_floor(self):
        with pytest.raises(ValueError):
            monte_carlo_errors([10, 10], lambda c: 0.0, trials=10)

    def test_zero_counts(self):
        with pytest.raises(ValueError):
            monte_carlo_errors([0, 0], lambda c: 0.0, trials=200)

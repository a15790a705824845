import numpy as np
import pytest

from degrootnet import (
    Ar1Mixture,
    DirichletRows,
    FiniteMixture,
    Fixed,
    GeneratorSpec,
    Islands,
    bernoulli_2x2,
    encounter_2x2,
    islands_graphs,
    leader_follower,
    make_stochastic,
    mean_matrix,
    mixing_identity_mixture,
    perturbed_fixed,
    ring_uniform_self,
    sample_next,
    support,
    two_point_swap,
)
from degrootnet.errors import InvalidProbability, NotStrictlyPositive, Unsupported


def flat(n):
    return make_stochastic(np.full((n, n), 1.0 / n))


def all_models():
    """One representative spec per model family, used by the shared invariants."""
    undirected = _undirected_pair()
    return {
        "fixed": Fixed(make_stochastic([[0.6, 0.4], [0.3, 0.7]])),
        "encounter2x2": encounter_2x2(0.3, 0.5),
        "two_point_swap": two_point_swap(0.4),
        "bernoulli2x2": bernoulli_2x2(0.5, 0.3, 0.6),
        "markov_encounter": encounter_2x2(0.3, 0.5, transition=((0.5, 0.5), (0.5, 0.5))),
        "dirichlet_ring": ring_uniform_self(5),
        "dirichlet_dense": DirichletRows(np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]])),
        "perturbed": perturbed_fixed(flat(2), 8.0),
        "leader_follower": leader_follower(4),
        "islands": islands_graphs(2, 0.8, 0.3),
        "undirected_degree": undirected,
        "mix_identity": mixing_identity_mixture(3, 0.5),
        "ar1": Ar1Mixture(0.5, make_stochastic([[0.9, 0.1], [0.1, 0.9]]), ring_uniform_self(2)),
    }


def _undirected_pair():
    c4 = np.zeros((4, 4), dtype=bool)
    for u, v in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        c4[u, v] = c4[v, u] = True
    crossed = np.zeros((4, 4), dtype=bool)
    for u, v in [(0, 2), (2, 1), (1, 3), (3, 0)]:
        crossed[u, v] = crossed[v, u] = True
    from degrootnet import UndirectedDegree

    return UndirectedDegree(graphs=(c4, crossed), probs=(0.5, 0.5))


class TestSampleNext:
    def test_fixed_returns_t_every_period(self):
        t = make_stochastic([[0.6, 0.4], [0.3, 0.7]])
        state = Fixed(t).start_state(0)
        for _ in range(5):
            assert np.array_equal(sample_next(state).entries, t.entries)

    def test_ar1_xi_zero_freezes_t0(self):
        t0 = make_stochastic([[0.9, 0.1], [0.2, 0.8]])
        spec = Ar1Mixture(0.0, t0, ring_uniform_self(2))
        state = spec.start_state(1)
        for _ in range(5):
            assert np.array_equal(sample_next(state).entries, t0.entries)

    def test_ar1_xi_one_is_iid_source(self):
        t0 = make_stochastic([[0.9, 0.1], [0.2, 0.8]])
        src = ring_uniform_self(2)
        spec = Ar1Mixture(1.0, t0, src)
        a = spec.start_state(7)
        b = src.start_state(7)
        for _ in range(5):
            assert np.array_equal(a.next_array(), b.next_array())

    def test_ar1_draw_is_convex_mixture(self):
        t0 = make_stochastic([[0.9, 0.1], [0.2, 0.8]])
        spec = Ar1Mixture(0.5, t0, ring_uniform_self(2))
        state = spec.start_state(3)
        prev = t0.entries
        for _ in range(4):
            x = state.next_array()
            # every entry at least (1-xi) * the previous matrix's entry
            assert (x >= 0.5 * prev - 1e-15).all()
            prev = x


class TestMeanMatrix:
    def test_mix_identity_mean(self):
        n, zeta = 4, 0.3
        expected = (1 - zeta) * np.eye(n) + zeta * np.full((n, n), 1.0 / n)
        assert np.allclose(mean_matrix(mixing_identity_mixture(n, zeta)).entries, expected)

    def test_perturbed_mean_is_t(self):
        t = make_stochastic([[0.7, 0.3], [0.4, 0.6]])
        spec = perturbed_fixed(t, 4.0)
        assert np.allclose(mean_matrix(spec).entries, t.entries)

    def test_two_point_swap_mean(self):
        a = 0.4
        assert np.allclose(mean_matrix(two_point_swap(a)).entries, [[a, 1 - a], [1 - a, a]])

    def test_empirical_mean_within_5e3_all_models(self):
        for name, spec in all_models().items():
            draws = 100_000
            acc = np.zeros((spec.n, spec.n))
            if name == "ar1":
                # time average over one long path, burning in the start at T0
                state = spec.start_state(123)
                for _ in range(200):
                    state.next_array()
                for _ in range(draws):
                    acc += state.next_array()
            else:
                state = spec.start_state(123)
                for _ in range(draws):
                    acc += state.next_array()
            err = np.abs(acc / draws - mean_matrix(spec).entries).max()
            assert err < 5e-3, f"{name}: empirical mean off by {err}"


class TestSupport:
    def test_encounter_atoms(self):
        desc = support(encounter_2x2(0.3, 0.5))
        assert desc.kind == "finite"
        mats = sorted(a.entries.tolist() for a in desc.atoms)
        assert mats == sorted([np.eye(2).tolist(), [[0.7, 0.3], [0.3, 0.7]]])

    def test_two_point_swap_atoms(self):
        desc = support(two_point_swap(0.4))
        mats = sorted(a.entries.tolist() for a in desc.atoms)
        assert mats == sorted([np.eye(2).tolist(), [[0.0, 1.0], [1.0, 0.0]]])

    def test_dirichlet_full_support(self):
        desc = support(DirichletRows(np.ones((3, 3))))
        assert desc.kind == "continuous"
        assert desc.strictly_positive_prob == 1.0
        assert desc.skeletons[0].all_true()

    def test_dirichlet_structural_zeros(self):
        desc = support(ring_uniform_self(4))
        assert desc.strictly_positive_prob == 0.0
        assert not desc.skeletons[0].all_true()

    def test_ar1_support_unsupported(self):
        spec = Ar1Mixture(0.5, flat(2), ring_uniform_self(2))
        with pytest.raises(Unsupported):
            support(spec)


class TestRingUniformSelf:
    def test_phi_and_balance(self):
        ring = ring_uniform_self(5)
        assert ring.phi.tolist() == [2.0] * 5
        assert ring.balanced

    def test_balance_flag_is_iff(self):
        lopsided = np.ones((3, 3))
        lopsided[0, 1] = 2.0
        assert not DirichletRows(lopsided).balanced
        barely = np.ones((3, 3))
        barely[0, 1] += 5e-10  # inside the 1e-9 band
        assert DirichletRows(barely).balanced

    def test_n2_weights_uniform(self):
        ring = ring_uniform_self(2)
        state = ring.start_state(11)
        xs = [state.next_array()[0, 0] for _ in range(20_000)]
        assert np.mean(xs) == pytest.approx(0.5, abs=0.01)
        assert np.var(xs) == pytest.approx(1 / 12, rel=0.05)

    def test_sampled_skeleton_is_cyclic_bidiagonal(self):
        n = 6
        ring = ring_uniform_self(n)
        state = ring.start_state(2)
        expected = (np.eye(n, dtype=bool) | np.roll(np.eye(n, dtype=bool), 1, axis=1))
        for _ in range(10):
            assert np.array_equal(state.next_array() > 0, expected)


class TestLeaderFollower:
    def test_branches(self):
        spec = leader_follower(5)
        state = spec.start_state(9)
        eye = np.eye(5)
        shift = np.roll(np.eye(5), 1, axis=1)
        saw_hi = saw_lo = False
        for _ in range(200):
            x = state.next_array()
            lead = x[0, 0]
            assert x[0, 1] == pytest.approx(1 - lead)
            if lead >= 0.5:
                assert np.array_equal(x[1:], eye[1:])
                saw_hi = True
            else:
                assert np.array_equal(x[1:], shift[1:])
                saw_lo = True
        assert saw_hi and saw_lo

    def test_rows_correlated_through_single_draw(self):
        spec = leader_follower(4)
        state = spec.start_state(13)
        for _ in range(200):
            x = state.next_array()
            if x[1, 1] == 1.0:  # follower kept their own belief
                assert x[0, 0] >= 0.5


class TestPerturbedFixed:
    def test_requires_strictly_positive(self):
        with pytest.raises(NotStrictlyPositive):
            perturbed_fixed(make_stochastic(np.eye(2)), 2.0)

    def test_influence_vector_of_t(self):
        t = make_stochastic([[0.7, 0.3], [0.4, 0.6]])
        spec = perturbed_fixed(t, 2.0)
        s = spec.s
        assert np.allclose(s @ t.entries, s, atol=1e-12)
        assert s.sum() == pytest.approx(1.0)

    def test_alpha_balance(self):
        t = make_stochastic([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
        spec = perturbed_fixed(t, 8.0)
        alpha = spec.alpha
        assert np.abs(alpha.sum(axis=0) - alpha.sum(axis=1)).max() < 1e-9

    def test_large_epsilon_concentrates_on_s(self):
        t = make_stochastic([[0.7, 0.3], [0.4, 0.6]])
        tight = perturbed_fixed(t, 400.0)
        loose = perturbed_fixed(t, 4.0)
        dev_tight = max(
            np.abs(tight.start_state(s).next_array() - t.entries).max() for s in range(50)
        )
        devs_loose = [np.abs(loose.start_state(s).next_array() - t.entries).max() for s in range(50)]
        assert dev_tight < np.mean(devs_loose)
        assert dev_tight < 0.2


class TestIslands:
    def test_no_cross_when_pd_zero(self):
        spec = islands_graphs(3, 0.7, 0.0)
        state = spec.start_state(4)
        cross = slice(3, 6)
        for _ in range(200):
            x = state.next_array()
            assert x[:3, cross].sum() == 0.0
            assert x[cross, :3].sum() == 0.0

    def test_homophily_flag(self):
        assert islands_graphs(2, 0.8, 0.3).homophily
        assert not islands_graphs(2, 0.3, 0.8).homophily

    def test_invalid_probability(self):
        with pytest.raises(InvalidProbability):
            Islands(2, 1.2, 0.1)

    def test_rows_stochastic_with_isolated_agents(self):
        spec = islands_graphs(2, 0.1, 0.1)  # isolation is common
        state = spec.start_state(5)
        for _ in range(200):
            x = state.next_array()
            assert np.abs(x.sum(axis=1) - 1.0).max() < 1e-12


class TestUndirectedDegreeValidation:
    def test_rejects_mismatched_degrees(self):
        from degrootnet import UndirectedDegree

        path = np.zeros((3, 3), dtype=bool)
        path[0, 1] = path[1, 0] = path[1, 2] = path[2, 1] = True
        tri = np.ones((3, 3), dtype=bool) ^ np.eye(3, dtype=bool)
        with pytest.raises(InvalidProbability):
            UndirectedDegree(graphs=(path, tri), probs=(0.5, 0.5))

    def test_rejects_disconnected(self):
        from degrootnet import UndirectedDegree

        two = np.zeros((4, 4), dtype=bool)
        two[0, 1] = two[1, 0] = two[2, 3] = two[3, 2] = True
        with pytest.raises(InvalidProbability):
            UndirectedDegree(graphs=(two,), probs=(1.0,))


class TestBernoulli2x2:
    def test_atom_probabilities(self):
        spec = bernoulli_2x2(0.5, 0.3, 0.6)
        probs = {tuple(np.round(a.entries[:, 0], 6)): p for a, p in zip(spec.atoms, spec.probs)}
        assert probs[(0.0, 0.0)] == pytest.approx(0.7 * 0.4)
        assert probs[(0.0, 0.5)] == pytest.approx(0.7 * 0.6)
        assert probs[(0.5, 0.0)] == pytest.approx(0.3 * 0.4)
        assert probs[(0.5, 0.5)] == pytest.approx(0.3 * 0.6)


class TestMarkovDependence:
    def test_rejects_nonstationary_probs(self):
        eye = make_stochastic(np.eye(2))
        swap = make_stochastic([[0, 1], [1, 0]])
        with pytest.raises(InvalidProbability):
            FiniteMixture(atoms=(eye, swap), probs=(0.9, 0.1),
                          transition=((0.5, 0.5), (0.5, 0.5)))

    def test_stationary_marginal_preserved(self):
        spec = encounter_2x2(0.3, 0.5, transition=((0.8, 0.2), (0.2, 0.8)))
        state = spec.start_state(21)
        meets = 0
        for _ in range(20_000):
            x = state.next_array()
            meets += x[0, 0] != 1.0
        assert meets / 20_000 == pytest.approx(0.5, abs=0.02)


class TestStationarityAndDeterminism:
    IID_NAMES = ["encounter2x2", "two_point_swap", "dirichlet_ring", "perturbed",
                 "leader_follower", "islands", "undirected_degree"]

    def test_iid_marginals_match_at_t1_and_t50(self):
        models = all_models()
        seeds = 5000
        for name in self.IID_NAMES:
            spec = models[name]
            diffs = []
            for s in range(seeds):
                state = spec.start_state(s)
                x1 = state.next_array().copy()
                for _ in range(48):
                    state.next_array()
                x50 = state.next_array()
                diffs.append(x1 - x50)
            diffs = np.asarray(diffs)
            mean_diff = np.abs(diffs.mean(axis=0))
            se = diffs.std(axis=0, ddof=1) / np.sqrt(seeds)
            assert (mean_diff <= 3.0 * se + 1e-12).all(), f"{name} drifted: {mean_diff.max()}"

    def test_bit_for_bit_determinism(self):
        for name, spec in all_models().items():
            a = spec.start_state(42)
            b = spec.start_state(42)
            for _ in range(30):
                assert np.array_equal(a.next_array(), b.next_array()), name

    def test_ar1_rows_stochastic_for_all_xi(self):
        t0 = make_stochastic([[0.9, 0.1], [0.2, 0.8]])
        for xi in [0.0, 0.25, 0.5, 0.75, 1.0]:
            spec = Ar1Mixture(xi, t0, ring_uniform_self(2))
            state = spec.start_state(17)
            for _ in range(50):
                x = state.next_array()
                assert (x >= 0).all()
                assert np.abs(x.sum(axis=1) - 1.0).max() < 1e-12


class TestSerialization:
    def test_round_trip_reproduces_streams(self):
        for name, spec in all_models().items():
            clone = GeneratorSpec.from_dict(spec.to_dict())
            a = spec.start_state(5)
            b = clone.start_state(5)
            for _ in range(10):
                assert np.array_equal(a.next_array(), b.next_array()), name

    def test_unknown_model_rejected(self):
        with pytest.raises(Unsupported):
            GeneratorSpec.from_dict({"model": "nope"})

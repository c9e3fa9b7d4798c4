import numpy as np
import pytest
from scipy import stats

from vacsmf.model import inv_logit
from vacsmf.records import MISSING
from vacsmf.simulate import (
    TrendConfig,
    TrueModel,
    VerificationMechanism,
    apply_verification,
    build_mechanism,
    generate_population,
    generate_true_csmf,
    resample_semisynthetic,
    verification_probability,
)


class TestTrueCsmf:
    def test_zero_coefficients_flat_half(self):
        trend = TrendConfig(intercept=0, time_linear=0, time_quad=0,
                            age_linear=0, age_quad=0)
        np.testing.assert_array_equal(generate_true_csmf(4, 3, trend), 0.5)

    def test_symmetric_time_quadratic(self):
        trend = TrendConfig(intercept=0.2, time_linear=2.0, time_quad=-2.0,
                            age_linear=0.5, age_quad=0.0)
        grid = generate_true_csmf(5, 3, trend)
        np.testing.assert_allclose(grid, grid[:, ::-1, :], atol=1e-12)

    def test_default_shape(self):
        grid = generate_true_csmf(10, 8)
        # interior maximum over time, monotone decreasing over age
        t_argmax = grid[0, :, 0].argmax()
        assert 0 < t_argmax < 9
        assert np.all(np.diff(grid[0, 0, :]) < 0)
        assert grid.min() > 0.15 and grid.max() < 0.85

    def test_requires_two_levels(self):
        with pytest.raises(ValueError):
            generate_true_csmf(1, 8)


class TestTrueModel:
    def test_generate_shapes_and_validity(self):
        model = TrueModel.generate(n_symptoms=6, n_time=4, n_age=3, n_classes=5, seed=1)
        assert model.prevalence.shape == (2, 4, 3)
        assert model.class_weights.shape == (2, 5, 24)
        assert model.symptom_probs.shape == (2, 5, 6)
        np.testing.assert_allclose(model.class_weights.sum(axis=1), 1.0, atol=1e-9)

    def test_deterministic_in_seed(self):
        a = TrueModel.generate(seed=5)
        b = TrueModel.generate(seed=5)
        np.testing.assert_array_equal(a.symptom_probs, b.symptom_probs)
        np.testing.assert_array_equal(a.class_weights, b.class_weights)

    def test_shipped_default_matches_generation(self):
        shipped = TrueModel.load_default()
        fresh = TrueModel.generate()
        np.testing.assert_array_equal(shipped.prevalence, fresh.prevalence)
        np.testing.assert_array_equal(shipped.class_weights, fresh.class_weights)
        np.testing.assert_array_equal(shipped.symptom_probs, fresh.symptom_probs)


class TestGeneratePopulation:
    def test_exact_stratum_counts(self):
        model = TrueModel.generate(n_symptoms=4, n_time=3, n_age=2,
                                   n_per_stratum=17, seed=2)
        data = generate_population(model, np.random.default_rng(0))
        assert len(data) == 2 * 3 * 2 * 17
        assert np.all(data.grid.counts == 17)

    def test_prevalence_matches_truth(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2,
                                   n_per_stratum=25_000, seed=3)
        data = generate_population(model, np.random.default_rng(1))
        arrays = data.arrays()
        for g in range(8):
            members = arrays.stratum == g
            pi = model.prevalence.reshape(-1)[g]
            phat = (arrays.cause[members] == 1).mean()
            se = np.sqrt(pi * (1 - pi) / members.sum())
            assert abs(phat - pi) < 4 * se

    def test_single_class_kills_within_cause_correlation(self):
        model = TrueModel.generate(n_symptoms=4, n_time=2, n_age=2, n_classes=1,
                                   n_per_stratum=10_000, seed=4)
        data = generate_population(model, np.random.default_rng(2))
        arrays = data.arrays()
        x = arrays.symptoms[arrays.cause == 1].astype(float)
        corr = np.corrcoef(x, rowvar=False)
        off = corr[~np.eye(4, dtype=bool)]
        assert np.abs(off).max() < 4 / np.sqrt(x.shape[0])

    def test_no_missing_symptoms(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2, seed=5)
        data = generate_population(model, np.random.default_rng(3))
        assert np.all(data.arrays().symptoms != MISSING)


class TestVerificationMechanism:
    def test_standard_coefficient_pattern(self):
        mech = build_mechanism(10, 8, 10, "i", np.random.default_rng(0))
        assert mech.a_time[0] == 1.2 and mech.a_time[-1] == 1.2
        assert np.all(mech.a_time[1:-1] == 0.1)
        np.testing.assert_array_equal(mech.a_age[[0, 1, -2, -1]], 0.4)
        assert np.all(mech.a_age[2:-2] == -1.6)
        assert mech.active_sets.shape == (10, 3)
        for t in range(10):
            active = mech.active_sets[t]
            assert len(set(active.tolist())) == 3
            np.testing.assert_array_equal(np.where(mech.b[t, 0] > 0)[0], np.sort(active))
            assert np.all(mech.b[t, :, active] == 0.1)

    def test_case_constraints(self):
        rng = np.random.default_rng(1)
        mech_i = build_mechanism(4, 5, 6, "i", rng)
        assert mech_i.c1 == 0.0 and mech_i.c2 == 0.0
        mech_ii = build_mechanism(4, 5, 6, "ii", rng)
        assert -0.4 < mech_ii.c1 < 0.0 and mech_ii.c2 == -mech_ii.c1
        with pytest.raises(ValueError):
            VerificationMechanism(np.zeros(4), np.zeros(5), np.zeros((4, 5, 6)),
                                  c1=-0.1, c2=0.1, case="i",
                                  active_sets=np.zeros((4, 3), dtype=int))
        with pytest.raises(ValueError):
            build_mechanism(4, 5, 2, "i", rng)

    def test_probability_paper_values(self):
        mech = build_mechanism(10, 8, 10, "i", np.random.default_rng(2))
        x0 = [0] * 10
        # edge time, edge age
        assert abs(verification_probability(x0, 1, 1, 0, mech) - inv_logit(1.6)) < 1e-12
        assert abs(verification_probability(x0, 1, 1, 0, mech) - 0.832) < 1e-3
        # middle time, edge age
        assert abs(verification_probability(x0, 1, 5, 0, mech) - inv_logit(0.5)) < 1e-12
        assert abs(verification_probability(x0, 1, 5, 0, mech) - 0.622) < 1e-3
        # middle time, middle age
        assert abs(verification_probability(x0, 4, 5, 0, mech) - inv_logit(-1.5)) < 1e-12
        assert abs(verification_probability(x0, 4, 5, 0, mech) - 0.182) < 1e-3

    def test_case_i_probability_free_of_cause(self):
        mech = build_mechanism(6, 6, 5, "i", np.random.default_rng(3))
        rng = np.random.default_rng(4)
        for _ in range(50):
            x = rng.integers(0, 2, size=5)
            t = int(rng.integers(1, 7))
            a = int(rng.integers(1, 7))
            assert verification_probability(x, a, t, 1, mech) == \
                verification_probability(x, a, t, 0, mech)

    def test_missing_symptoms_contribute_nothing(self):
        mech = build_mechanism(4, 4, 3, "i", np.random.default_rng(5))
        assert verification_probability([None, None, None], 1, 1, 0, mech) == \
            verification_probability([0, 0, 0], 1, 1, 0, mech)


class TestApplyVerification:
    def test_saturating_mechanism_verifies_all(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2, n_per_stratum=20, seed=6)
        data = generate_population(model, np.random.default_rng(4))
        mech = VerificationMechanism(
            a_time=np.full(2, 20.0), a_age=np.zeros(2), b=np.zeros((2, 2, 3)),
            c1=0.0, c2=0.0, case="i", active_sets=np.zeros((2, 3), dtype=int))
        masked = apply_verification(data, mech, np.random.default_rng(5))
        assert all(r.verified and r.cause is not None for r in masked)

    def test_masked_records_hide_cause(self):
        model = TrueModel.generate(n_symptoms=3, n_time=3, n_age=2, n_per_stratum=50, seed=7)
        data = generate_population(model, np.random.default_rng(6))
        mech = build_mechanism(3, 2, 3, "i", np.random.default_rng(7))
        masked = apply_verification(data, mech, np.random.default_rng(8))
        assert len(masked) == len(data)
        for r in masked:
            assert (r.cause is None) == (not r.verified)

    def test_case_i_conditional_independence(self):
        # chi-square of L vs Y within fixed (time, age, symptom-pattern) cells
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2,
                                   n_per_stratum=12_000, seed=8)
        data = generate_population(model, np.random.default_rng(9))
        mech = build_mechanism(2, 2, 3, "i", np.random.default_rng(10))
        masked = apply_verification(data, mech, np.random.default_rng(11))
        truth = data.arrays()
        got = masked.arrays()
        pvals = []
        for t in (1, 2):
            for a in (1, 2):
                for pat in range(8):
                    bits = (pat // 4, (pat // 2) % 2, pat % 2)
                    cell = ((truth.time == t) & (truth.age == a)
                            & (truth.symptoms[:, 0] == bits[0])
                            & (truth.symptoms[:, 1] == bits[1])
                            & (truth.symptoms[:, 2] == bits[2]))
                    table = np.array([
                        [(got.verified[cell] & (truth.cause[cell] == y)).sum()
                         for y in (0, 1)],
                        [(~got.verified[cell] & (truth.cause[cell] == y)).sum()
                         for y in (0, 1)],
                    ])
                    if table.min() >= 5:
                        pvals.append(stats.chi2_contingency(table)[1])
        assert len(pvals) >= 8
        assert min(pvals) > 0.001 / len(pvals)

    def test_case_ii_underrepresents_cause_one(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2,
                                   n_per_stratum=20_000, seed=9)
        data = generate_population(model, np.random.default_rng(12))
        mech_i = build_mechanism(2, 2, 3, "i", np.random.default_rng(13))
        mech_ii = VerificationMechanism(
            a_time=mech_i.a_time, a_age=mech_i.a_age, b=mech_i.b,
            c1=-0.39, c2=0.39, case="ii", active_sets=mech_i.active_sets)
        truth = data.arrays()
        rate = {}
        for label, mech in (("i", mech_i), ("ii", mech_ii)):
            got = apply_verification(data, mech, np.random.default_rng(14)).arrays()
            rate[label] = ((got.verified & (truth.cause == 1)).sum()
                           / (truth.cause == 1).sum(),
                           (got.verified & (truth.cause == 0)).sum()
                           / (truth.cause == 0).sum())
        # case i: equal verification rates by cause; case ii: cause 1 verified less
        assert abs(rate["i"][0] - rate["i"][1]) < 0.02
        assert rate["ii"][0] < rate["ii"][1] - 0.05

    def test_requires_labels(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2, n_per_stratum=10, seed=10)
        data = generate_population(model, np.random.default_rng(15))
        mech = build_mechanism(2, 2, 3, "i", np.random.default_rng(16))
        masked = apply_verification(data, mech, np.random.default_rng(17))
        with pytest.raises(ValueError, match="labeled"):
            apply_verification(masked, mech, np.random.default_rng(18))


class TestResample:
    def test_full_fraction_keeps_everything(self):
        model = TrueModel.generate(n_symptoms=3, n_time=2, n_age=2, n_per_stratum=30, seed=11)
        data = generate_population(model, np.random.default_rng(19))
        out = resample_semisynthetic(data, 1.0, np.random.default_rng(20))
        assert sorted(r.id for r in out) == sorted(r.id for r in data)

    def test_exact_proportional_allocation(self):
        model = TrueModel.generate(n_symptoms=2, n_time=2, n_age=2, n_per_stratum=40, seed=12)
        data = generate_population(model, np.random.default_rng(21))
        # force a stratum to exactly 10 cause-1 of 40
        records = list(data.records)
        target = [i for i, r in enumerate(records)
                  if r.sex == 1 and r.time == 1 and r.age == 1]
        from dataclasses import replace
        for j, i in enumerate(target):
            records[i] = replace(records[i], cause=1 if j < 10 else 0)
        from vacsmf.records import Dataset
        data = Dataset(records, n_time=2, n_age=2)
        out = resample_semisynthetic(data, 0.5, np.random.default_rng(22))
        sub = [r for r in out if r.sex == 1 and r.time == 1 and r.age == 1]
        assert len(sub) == 20
        assert sum(r.cause for r in sub) == 5

    def test_prevalence_preserved_within_one_record(self):
        model = TrueModel.generate(n_symptoms=3, n_time=3, n_age=2, n_per_stratum=60, seed=13)
        data = generate_population(model, np.random.default_rng(23))
        out = resample_semisynthetic(data, 0.4, np.random.default_rng(24))
        full = data.arrays()
        part = out.arrays()
        for g in range(12):
            n_full = (full.stratum == g).sum()
            n_part = (part.stratum == g).sum()
            assert n_part == int(np.floor(0.4 * n_full))
            p_full = (full.cause[full.stratum == g] == 1).mean()
            p_part = (part.cause[part.stratum == g] == 1).mean()
            assert abs(p_part - p_full) <= 1.0 / n_part + 1e-12

    def test_fraction_domain(self):
        model = TrueModel.generate(n_symptoms=2, n_time=2, n_age=2, n_per_stratum=10, seed=14)
        data = generate_population(model, np.random.default_rng(25))
        with pytest.raises(ValueError):
            resample_semisynthetic(data, 0.0, np.random.default_rng(26))

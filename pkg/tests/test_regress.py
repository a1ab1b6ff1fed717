import math
import warnings

import numpy as np
import pytest

from biaslab.data import Column, Dataset, pearson
from biaslab.errors import (
    DataError,
    SeparationWarning,
    SingularDesignError,
    ValidationError,
)
from biaslab.regress import (
    Formula,
    collinearity_diagnostics,
    fit_logistic,
    fit_ols,
    fit_ordered_logit,
    main,
    predict,
    residuals,
    wald_chisq,
)
from biaslab.rng import RngState, normal_draws
from biaslab.scm import CorrTarget, mvn_exact

from _oracles import brute_force_logistic, brute_force_ordered, normal_equations_ols


def dataset(**arrays):
    return Dataset([Column(k, np.asarray(v, dtype=float)) for k, v in arrays.items()])


class TestFormula:
    def test_parse_full_grammar(self):
        f = Formula.parse("Y ~ X + Z + X:Z + X^2")
        assert f.response == "Y"
        assert [t.label for t in f.terms] == ["X", "Z", "X:Z", "X^2"]
        assert f.intercept

    def test_intercept_only(self):
        f = Formula.parse("Y ~ 1")
        assert f.terms == ()

    def test_duplicates_rejected(self):
        with pytest.raises(ValidationError):
            Formula.parse("Y ~ X + X")

    def test_bad_grammar(self):
        with pytest.raises(ValidationError):
            Formula.parse("Y + X")
        with pytest.raises(ValidationError):
            Formula.parse("Y ~ X*Z")

    def test_text_round_trip(self):
        for text in ("Y ~ X", "Y ~ X + Z + X:Z", "Y ~ X + X^2"):
            assert Formula.parse(Formula.parse(text).text()) == Formula.parse(text)


class TestOls:
    def test_exact_line(self):
        d = dataset(x=[0, 1, 2], y=[1, 3, 5])
        f = fit_ols(d, Formula.parse("y ~ x"))
        assert f.coef("(Intercept)") == pytest.approx(1.0)
        assert f.coef("x") == pytest.approx(2.0)
        assert f.r_squared == pytest.approx(1.0)
        assert f.residual_se == pytest.approx(0.0, abs=1e-10)

    def test_matches_normal_equations_on_100_random_instances(self):
        s = RngState(314)
        g = s.generator
        for _ in range(100):
            n = int(g.integers(20, 60))
            p = int(g.integers(1, 4))
            x = g.normal(0, 1, (n, p))
            beta = g.normal(0, 2, p + 1)
            y = beta[0] + x @ beta[1:] + g.normal(0, 0.5, n)
            d = Dataset(
                [Column(f"x{j}", x[:, j]) for j in range(p)] + [Column("y", y)]
            )
            f = fit_ols(d, Formula("y", tuple(main(f"x{j}") for j in range(p))))
            xd = np.column_stack([np.ones(n), x])
            b_or, se_or = normal_equations_ols(xd, y)
            assert np.allclose(f.b, b_or, atol=1e-8)
            assert np.allclose(f.se, se_or, atol=1e-8)

    def test_bivariate_beta_equals_pearson(self):
        s = RngState(7)
        x = normal_draws(s, 500, 3, 2)
        y = 1.5 * x + normal_draws(s, 500, 0, 4)
        d = dataset(x=x, y=y)
        f = fit_ols(d, Formula.parse("y ~ x"))
        r = pearson(d["x"], d["y"])
        assert abs(f.beta[f.term_index("x")] - r) < 1e-10
        assert abs(f.r_squared - r * r) < 1e-10

    def test_stat_is_b_over_se(self):
        s = RngState(8)
        d = dataset(x=normal_draws(s, 60, 0, 1), y=normal_draws(s, 60, 0, 1))
        f = fit_ols(d, Formula.parse("y ~ x"))
        assert np.allclose(f.stat, f.b / f.se)

    def test_scale_equivariance(self):
        s = RngState(9)
        x = normal_draws(s, 200, 0, 1)
        y = 2 * x + normal_draws(s, 200, 0, 1)
        d1 = dataset(x=x, y=y)
        d2 = dataset(x=x, y=3.5 * y + 11.0)
        f1 = fit_ols(d1, Formula.parse("y ~ x"))
        f2 = fit_ols(d2, Formula.parse("y ~ x"))
        assert f2.coef("x") == pytest.approx(3.5 * f1.coef("x"), abs=1e-10)
        assert f2.se_of("x") == pytest.approx(3.5 * f1.se_of("x"), abs=1e-10)
        assert f2.stat_of("x") == pytest.approx(f1.stat_of("x"), abs=1e-10)
        assert f2.p[1] == pytest.approx(f1.p[1], abs=1e-12)
        assert f2.r_squared == pytest.approx(f1.r_squared, abs=1e-10)
        assert f2.beta[1] == pytest.approx(f1.beta[1], abs=1e-10)

    def test_singular_design_names_term(self):
        s = RngState(10)
        x = normal_draws(s, 50, 0, 1)
        d = dataset(x=x, z=2 * x, y=normal_draws(s, 50, 0, 1))
        with pytest.raises(SingularDesignError) as exc:
            fit_ols(d, Formula.parse("y ~ x + z"))
        assert exc.value.term in ("x", "z")

    def test_listwise_deletion_counted(self):
        d = Dataset(
            [
                Column("x", np.array([1.0, 2, 3, np.nan, 5])),
                Column("y", np.array([1.0, np.nan, 3, 4, 5])),
            ]
        )
        f = fit_ols(d, Formula.parse("y ~ x"))
        assert f.n_used == 3 and f.n_dropped == 2

    def test_insufficient_rows(self):
        with pytest.raises(DataError):
            fit_ols(dataset(x=[1, 2], y=[1, 2]), Formula.parse("y ~ x"))


class TestResidualsPredict:
    def test_perfect_fit_residuals_zero(self):
        d = dataset(x=[0, 1, 2, 3], y=[1, 3, 5, 7])
        f = fit_ols(d, Formula.parse("y ~ x"))
        r = residuals(f, d)
        assert np.abs(r.values).max() < 1e-12

    def test_residuals_orthogonal_to_design(self):
        s = RngState(11)
        x = normal_draws(s, 300, 0, 2)
        y = x + normal_draws(s, 300, 0, 1)
        d = dataset(x=x, y=y)
        f = fit_ols(d, Formula.parse("y ~ x"))
        e = residuals(f, d).values
        assert abs(e.sum()) < 1e-8
        assert abs(e @ x) < 1e-8

    def test_predict_missing_rows_stay_missing(self):
        d = Dataset(
            [
                Column("x", np.array([1.0, np.nan, 3.0, 4.0])),
                Column("y", np.array([2.0, 4.0, 6.0, 8.5])),
            ]
        )
        f = fit_ols(d, Formula.parse("y ~ x"))
        p = predict(f, d)
        assert p.missing.tolist() == [False, True, False, False]


class TestLogistic:
    def test_intercept_only_closed_form(self):
        d = dataset(y=[1] * 5 + [0] * 5)
        f = fit_logistic(d, Formula.parse("y ~ 1"))
        assert f.coef("(Intercept)") == pytest.approx(0.0, abs=1e-9)
        d = dataset(y=[1] * 2500 + [0] * 7500)
        f = fit_logistic(d, Formula.parse("y ~ 1"))
        assert f.coef("(Intercept)") == pytest.approx(math.log(0.25 / 0.75), abs=1e-8)

    def test_matches_brute_force_newton_on_small_data(self):
        s = RngState(13)
        g = s.generator
        for _ in range(10):
            n = 8
            x = g.normal(0, 1, n)
            y = (g.uniform(0, 1, n) < 0.5).astype(float)
            if y.min() == y.max():
                y[0] = 1 - y[0]
            d = dataset(x=x, y=y)
            f = fit_logistic(d, Formula.parse("y ~ x"))
            if not f.converged:
                continue  # separated draw; oracle diverges too
            xd = np.column_stack([np.ones(n), x])
            b_or = brute_force_logistic(xd, y)
            assert np.allclose(f.b, b_or, atol=1e-6)

    def test_non_binary_response_rejected(self):
        with pytest.raises(DataError):
            fit_logistic(dataset(x=[1, 2, 3], y=[0, 1, 2]), Formula.parse("y ~ x"))

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            fit_logistic(dataset(x=[1, 2, 3, 4], y=[1, 1, 1, 1]), Formula.parse("y ~ x"))

    def test_separation_flagged(self):
        x = np.array([-3.0, -2, -1, 1, 2, 3] * 4)
        y = (x > 0).astype(float)
        with warnings.catch_warnings():
            warnings.simplefilter("error", SeparationWarning)
            with pytest.raises(SeparationWarning):
                fit_logistic(dataset(x=x, y=y), Formula.parse("y ~ x"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = fit_logistic(dataset(x=x, y=y), Formula.parse("y ~ x"))
        assert not f.converged

    def test_deviance_and_aic(self):
        s = RngState(14)
        x = normal_draws(s, 400, 0, 1)
        p = 1 / (1 + np.exp(-x))
        y = (s.generator.uniform(0, 1, 400) < p).astype(float)
        f = fit_logistic(dataset(x=x, y=y), Formula.parse("y ~ x"))
        assert f.aic == pytest.approx(f.deviance + 4)
        assert f.null_deviance > f.deviance


class TestOrderedLogit:
    def _quartile_data(self, n=2000, seed=21):
        s = RngState(seed)
        x = normal_draws(s, n, 0, 10)
        latent = x + normal_draws(s, n, 0, 30)
        cuts = np.quantile(latent, [0.25, 0.5, 0.75])
        y = 1.0 + (latent >= cuts[0]) + (latent >= cuts[1]) + (latent >= cuts[2])
        return dataset(x=x, y=y)

    def test_k2_equals_binary_logistic(self):
        s = RngState(20)
        x = normal_draws(s, 500, 0, 2)
        z = (x + normal_draws(s, 500, 0, 2) > 0).astype(float)
        d = dataset(x=x, yb=z, yo=z + 1)
        fb = fit_logistic(d, Formula.parse("yb ~ x"))
        fo = fit_ordered_logit(d, Formula.parse("yo ~ x"))
        assert fo.coef("x") == pytest.approx(fb.coef("x"), abs=1e-6)
        assert fo.se_of("x") == pytest.approx(fb.se_of("x"), abs=1e-6)
        assert fo.cutpoints[0] == pytest.approx(-fb.coef("(Intercept)"), abs=1e-6)

    def test_intercept_only_quartiles_closed_form(self):
        y = np.repeat([1.0, 2.0, 3.0, 4.0], 2500)
        f = fit_ordered_logit(dataset(y=y), Formula.parse("y ~ 1"))
        expect = [math.log(0.25 / 0.75), 0.0, math.log(0.75 / 0.25)]
        assert np.allclose(f.cutpoints, expect, atol=1e-8)

    def test_matches_brute_force_minimizer(self):
        d = self._quartile_data(n=300, seed=22)
        f = fit_ordered_logit(d, Formula.parse("y ~ x"))
        b_or, z_or = brute_force_ordered(d["x"].values.reshape(-1, 1), d["y"].values)
        assert f.coef("x") == pytest.approx(b_or[0], abs=1e-5)
        assert np.allclose(f.cutpoints, z_or, atol=1e-4)

    def test_gradient_matches_finite_differences(self):
        from biaslab.regress import _OrderedNll

        d = self._quartile_data(n=120, seed=23)
        x = d["x"].values.reshape(-1, 1)
        levels = np.unique(d["y"].values)
        kcat = np.searchsorted(levels, d["y"].values)
        nll = _OrderedNll(x, kcat, len(levels))
        beta = np.array([0.03])
        zeta = np.array([-1.0, 0.1, 1.2])
        grad, hess = nll.derivs(beta, zeta)
        eps = 1e-6
        packed = np.concatenate([beta, zeta])

        def value(v):
            return nll.value(v[:1], v[1:])

        for j in range(4):
            up = packed.copy()
            up[j] += eps
            dn = packed.copy()
            dn[j] -= eps
            fd = (value(up) - value(dn)) / (2 * eps)
            assert grad[j] == pytest.approx(fd, rel=1e-4, abs=1e-6)
            for k in range(4):
                upk = packed.copy()
                upk[k] += eps
                dnk = packed.copy()
                dnk[k] -= eps
                gu, _ = nll.derivs(upk[:1], upk[1:])
                gd, _ = nll.derivs(dnk[:1], dnk[1:])
                fd2 = (gu[j] - gd[j]) / (2 * eps)
                assert hess[j, k] == pytest.approx(fd2, rel=1e-3, abs=1e-4)

    def test_cutpoints_strictly_increasing(self):
        f = fit_ordered_logit(self._quartile_data(), Formula.parse("y ~ x"))
        assert np.all(np.diff(f.cutpoints) > 0)
        assert f.converged

    def test_non_integer_response_rejected(self):
        with pytest.raises(DataError):
            fit_ordered_logit(dataset(y=[1.5, 2, 3]), Formula.parse("y ~ 1"))

    def test_empty_level_rejected(self):
        with pytest.raises(DataError):
            fit_ordered_logit(
                dataset(y=[1.0, 1, 3, 3], x=[1, 2, 3, 4]), Formula.parse("y ~ x")
            )


class TestWald:
    def test_square_of_stat(self):
        d = dataset(x=[0, 1, 2, 4], y=[1.0, 2.9, 5.2, 8.8])
        f = fit_ols(d, Formula.parse("y ~ x"))
        chisq, p = wald_chisq(f, "x")
        assert chisq == f.stat_of("x") ** 2
        assert 0 <= p <= 1

    def test_quoted_magnitudes(self):
        assert 35.143**2 == pytest.approx(1235.03, abs=0.02)
        assert 25.730**2 == pytest.approx(662.03, abs=0.02)

    def test_zero_coefficient(self):
        d = dataset(x=[-1, -1, 1, 1], y=[0.0, 2.0, 0.0, 2.0])
        f = fit_ols(d, Formula.parse("y ~ x"))
        chisq, p = wald_chisq(f, "x")
        assert chisq == pytest.approx(0.0)
        assert p == pytest.approx(1.0)

    def test_unknown_term(self):
        d = dataset(x=[0, 1, 2, 4], y=[1.0, 2.9, 5.2, 8.8])
        f = fit_ols(d, Formula.parse("y ~ x"))
        with pytest.raises(ValidationError):
            wald_chisq(f, "nope")


class TestCollinearity:
    def _exact(self, rho, seed=56):
        names = tuple(["Y"] + [f"P{j}" for j in range(5)])
        corr = np.full((6, 6), 0.0)
        np.fill_diagonal(corr, 1.0)
        corr[0, 1:] = corr[1:, 0] = 0.3
        corr[1:, 1:] = np.where(np.eye(5) == 1, 1.0, rho)
        t = CorrTarget(names=names, corr=corr)
        return mvn_exact(t, 1000, RngState(seed))

    def test_orthogonal_predictors(self):
        ds = self._exact(0.0)
        rep = collinearity_diagnostics(ds, Formula.parse("Y ~ P0 + P1 + P2 + P3 + P4"))
        assert np.allclose(rep.tolerance, 1.0, atol=1e-9)
        assert np.allclose(rep.vif, 1.0, atol=1e-9)

    def test_pairwise_half(self):
        ds = self._exact(0.5)
        rep = collinearity_diagnostics(ds, Formula.parse("Y ~ P0 + P1 + P2 + P3 + P4"))
        assert np.allclose(rep.tolerance, 0.6, atol=1e-9)
        assert np.allclose(rep.vif, 1 / 0.6, atol=1e-9)

    def test_pairwise_three_quarters(self):
        ds = self._exact(0.75)
        rep = collinearity_diagnostics(ds, Formula.parse("Y ~ P0 + P1 + P2 + P3 + P4"))
        assert np.allclose(rep.tolerance, 0.3077, atol=1e-4)
        assert np.allclose(rep.vif, 3.25, atol=1e-9)
        assert np.allclose(np.sort(rep.eigenvalues)[::-1], [4, 1, 0.25, 0.25, 0.25, 0.25], atol=1e-9)
        assert np.allclose(rep.condition_indices, [1, 2, 4, 4, 4, 4], atol=1e-9)

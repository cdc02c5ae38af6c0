"""Convolution quadrature, the covariance criterion, and smoothing sequences."""
import math

import numpy as np
import pytest

from blc_lab import (
    CertifyOptions,
    RequiresCertificateError,
    Status,
    Verdict,
    certify_blc,
    check_convolution_blc_consistency,
    check_log_concave,
    convolve,
    covariance_criterion,
    integration_by_parts_check,
    smooth_sequence,
    upper_tail_at,
    weighted_measure,
)

from conftest import (
    GAUSSIAN,
    LAPLACE,
    LOGISTIC,
    MIX_134,
    MIX_20,
    PROP_PAIRS,
    grid_of,
    mixture_spec,
)

SQ2PI = math.sqrt(2 * math.pi)


def norm_pdf(x, mu=0.0, sd=1.0):
    z = (np.asarray(x, float) - mu) / sd
    return np.exp(-0.5 * z * z) / (sd * SQ2PI)


class TestConvolve:
    def test_gaussian_closure(self, gauss):
        gZ = convolve(gauss, gauss)
        target = norm_pdf(gZ.xs, 0.0, math.sqrt(2.0))
        assert np.abs(gZ.fs - target).max() <= 1e-5

    def test_mixture_gaussian_closed_form(self, mix134, gauss):
        gZ = convolve(mix134, gauss)
        sd = math.sqrt(2.0)
        target = 0.5 * norm_pdf(gZ.xs, -1.34, sd) + 0.5 * norm_pdf(gZ.xs, 1.34, sd)
        assert np.abs(gZ.fs - target).max() <= 1e-5

    def test_uniform_triangle(self, uniform01):
        gZ = convolve(uniform01, uniform01)
        tri = np.clip(np.where(gZ.xs <= 1.0, gZ.xs, 2.0 - gZ.xs), 0.0, None)
        assert np.abs(gZ.fs - tri).max() <= 1e-9
        assert gZ.pdf(1.0) == pytest.approx(1.0, abs=1e-9)

    def test_mass_and_monotonicity(self, mix134, laplace):
        gZ = convolve(mix134, laplace)
        assert abs(gZ.total_mass - 1.0) <= gZ.mass_tol
        assert np.all(np.diff(gZ.Fs) >= 0)

    def test_cdf_consistency_both_identities(self, mix134, laplace):
        # F_Z from the lower-tail identity must match quadrature of the
        # upper-tail identity at probe points, and re-integrating the
        # convolved density must reproduce the same CDF
        from blc_lab import cumulative_parabolic
        gZ = convolve(mix134, laplace)
        probes = gZ.quantile(np.linspace(0.02, 0.98, 50))
        upper = upper_tail_at(mix134, laplace, probes)
        assert np.abs((1.0 - gZ.cdf(probes)) - upper).max() <= 1e-5
        rebuilt = cumulative_parabolic(gZ.xs, gZ.fs)
        assert np.abs(rebuilt - gZ.Fs).max() <= 1e-5

    def test_commutativity(self, mix134, logistic):
        a = convolve(mix134, logistic)
        b = convolve(logistic, mix134)
        xs = np.linspace(-6, 6, 501)
        assert np.abs(a.pdf(xs) - b.pdf(xs)).max() <= 1e-6


class TestWeightedMeasure:
    def test_gaussian_center_normalizer(self, gauss):
        wm = weighted_measure(gauss, gauss, 0.0, "lower")
        assert wm.normalizer == pytest.approx(0.5, abs=1e-5)
        assert wm.expectation(np.ones_like(wm.ys)) == pytest.approx(1.0, abs=1e-5)

    def test_far_right_anchor_recovers_f_Y(self, gauss):
        wm = weighted_measure(gauss, gauss, 8.0, "lower")
        assert np.abs(wm.weights - gauss.fs).max() <= 1e-6

    def test_mirror_symmetry_of_kinds(self):
        g = grid_of(MIX_134, n=2049)  # odd count gives an exactly symmetric grid
        lower = weighted_measure(g, g, 0.0, "lower")
        upper = weighted_measure(g, g, 0.0, "upper")
        assert np.abs(lower.weights - upper.weights[::-1]).max() <= 1e-12

    def test_normalizer_matches_convolution_cdf(self, mix134, gauss):
        gZ = convolve(mix134, gauss)
        for x in (-1.0, 0.3, 2.0):
            wm = weighted_measure(mix134, gauss, x, "lower")
            assert wm.normalizer == pytest.approx(gZ.cdf(x), abs=1e-5)


class TestCovarianceCriterion:
    def test_flagship_self_convolution_stable(self, mix134):
        report = covariance_criterion(mix134, mix134)
        assert report.verdict is Verdict.STABLE
        assert min(report.min_lower, report.min_upper) >= -1e-6

    def test_gaussian_pair_nonnegative_everywhere(self, gauss):
        report = covariance_criterion(gauss, gauss)
        assert report.cov_lower.min() >= -1e-6
        assert report.cov_upper.min() >= -1e-6

    def test_log_concave_factor_nonnegative_everywhere(self, mix134, gauss, laplace):
        # with a log-concave second factor both integrands are aligned
        # monotone, so every anchor covariance is nonnegative
        for Y in (gauss, laplace):
            assert check_log_concave(Y).status is Status.CERTIFIED
            report = covariance_criterion(mix134, Y)
            assert report.cov_lower.min() >= -1e-6
            assert report.cov_upper.min() >= -1e-6

    def test_supercritical_pair_unstable(self):
        g = grid_of(MIX_20)
        report = covariance_criterion(g, g)
        assert report.verdict is Verdict.UNSTABLE
        assert min(report.min_lower, report.min_upper) < -1e-2

    def test_report_summary_and_csv(self, tmp_path, gauss):
        report = covariance_criterion(gauss, gauss)
        assert set(report.summary()) == {"min_lower", "min_upper", "verdict"}
        path = tmp_path / "criterion.csv"
        report.to_csv(path)
        assert path.read_text().splitlines()[0] == "x,cov_lower,cov_upper"

    def test_anchor_refinement_stable(self, mix134):
        # the stability conditions quantify over all anchors; doubling the
        # anchor budget must not move the verdict or the minima materially
        coarse = covariance_criterion(mix134, mix134, n_anchors=41)
        fine = covariance_criterion(mix134, mix134, n_anchors=81)
        assert coarse.verdict is fine.verdict
        assert abs(min(fine.min_lower, fine.min_upper)
                   - min(coarse.min_lower, coarse.min_upper)) <= 5e-3

    def test_out_of_range_anchors_skipped(self, gauss):
        report = covariance_criterion(gauss, gauss, xs=[-80.0, 80.0])
        assert report.verdict is Verdict.INCONCLUSIVE
        assert len(report.skipped) == 2


class TestBiconditional:
    PAIRS = [
        (GAUSSIAN, GAUSSIAN),
        (MIX_134, GAUSSIAN),
        (MIX_134, MIX_134),
        (MIX_134, LAPLACE),
        (LAPLACE, LOGISTIC),
        (MIX_20, MIX_20),
        (mixture_spec(1.9), mixture_spec(1.9)),
    ]

    @pytest.mark.parametrize("sx,sy", PAIRS,
                             ids=lambda s: s.label() if hasattr(s, "label") else s)
    def test_criterion_agrees_with_direct_certification(self, sx, sy):
        gX, gY = grid_of(sx), grid_of(sy)
        report = covariance_criterion(gX, gY)
        direct = certify_blc(convolve(gX, gY), CertifyOptions(tolerance=1e-6))
        assert (report.verdict is Verdict.STABLE) == (direct.status is Status.CERTIFIED)

    def test_consistency_certificate_flagship(self, mix134):
        cert = check_convolution_blc_consistency(mix134, mix134)
        assert cert.status is Status.CERTIFIED
        assert cert.condition_id == "convolution_biconditional"

    def test_consistency_certificate_mixed_pair(self, mix134, laplace):
        cert = check_convolution_blc_consistency(mix134, laplace)
        assert cert.status is Status.CERTIFIED

    def test_consistency_rejects_uncertified_input(self, mix30, gauss):
        with pytest.raises(RequiresCertificateError):
            check_convolution_blc_consistency(mix30, gauss)

    def test_engineered_refuting_pair(self):
        # scripted search over separations: two-component factors at +-a are
        # bi-log-concave up to a ~= 1.3473 and self-convolutions stay
        # certified up to a ~= 1.784, so both sides of the refuting direction
        # need a supercritical pair; at a = 2 both report failure decisively
        g = grid_of(MIX_20)
        report = covariance_criterion(g, g)
        direct = certify_blc(convolve(g, g))
        assert report.verdict is Verdict.UNSTABLE
        assert direct.status is Status.VIOLATED
        assert direct.slack == pytest.approx(-0.4479, abs=5e-3)


class TestStabilityUnderLogConcave:
    @pytest.mark.parametrize("sx,sy", PROP_PAIRS,
                             ids=lambda s: s.label() if hasattr(s, "label") else s)
    def test_convolution_with_log_concave_is_certified(self, sx, sy):
        gX, gY = grid_of(sx), grid_of(sy)
        assert certify_blc(gX).status is Status.CERTIFIED
        assert check_log_concave(gY).status is Status.CERTIFIED
        gZ = convolve(gX, gY)
        assert certify_blc(gZ, CertifyOptions(tolerance=1e-6)).status is Status.CERTIFIED


class TestIntegrationByParts:
    def test_gaussian_stein_linear(self, gauss):
        lhs, rhs = integration_by_parts_check(gauss, lambda x: x)
        assert lhs == pytest.approx(1.0, abs=1e-6)
        assert abs(lhs - rhs) <= 1e-4 * (1 + abs(lhs))

    def test_gaussian_stein_quadratic(self, gauss):
        lhs, rhs = integration_by_parts_check(gauss, lambda x: x**2)
        assert lhs == pytest.approx(0.0, abs=1e-6)
        assert rhs == pytest.approx(0.0, abs=1e-6)

    def test_logistic_tanh(self, logistic):
        lhs, rhs = integration_by_parts_check(logistic, np.tanh)
        assert abs(lhs - rhs) <= 1e-4 * (1 + abs(lhs))

    def test_sampled_array_input(self, gauss):
        lhs, rhs = integration_by_parts_check(gauss, np.asarray(gauss.xs))
        assert abs(lhs - rhs) <= 1e-4 * (1 + abs(lhs))

    def test_boundary_decay_rejection(self, uniform01):
        with pytest.raises(ValueError, match="boundary decay"):
            integration_by_parts_check(uniform01, lambda x: x)

    def test_interior_zero_rejection(self, two_bump):
        with pytest.raises(ValueError, match="degenerate"):
            integration_by_parts_check(two_bump, lambda x: x)


class TestSmoothSequence:
    def test_flagship_sequence(self, mix134):
        steps = smooth_sequence(mix134, [1.0, 0.5, 0.25, 0.1])
        l1 = [st.distances["1"] for st in steps]
        # frozen from the closed-form mixture smoothed densities (adaptive
        # quadrature of |f_sigma - f|): 0.197019, 0.073073, 0.020893, 0.003483
        assert np.allclose(l1, [0.197019, 0.073073, 0.020893, 0.003483], atol=5e-4)
        assert all(st.certificate.status is Status.CERTIFIED for st in steps)
        assert all(a > b for a, b in zip(l1, l1[1:]))
        assert l1[-1] < 0.05

    def test_distances_shrink_in_all_norms(self, laplace):
        steps = smooth_sequence(laplace, [0.5, 0.1])
        for key in ("1", "2", "inf"):
            assert steps[0].distances[key] > steps[1].distances[key]

    def test_requires_decreasing_sigmas(self, mix134):
        with pytest.raises(ValueError, match="decreasing"):
            smooth_sequence(mix134, [0.1, 0.5])

    def test_requires_certified_input(self, mix30):
        with pytest.raises(RequiresCertificateError):
            smooth_sequence(mix30, [0.5])

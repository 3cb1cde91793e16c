#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "scs/cox.hpp"
#include "scs/estimators.hpp"
#include "scs/model.hpp"
#include "test_util.hpp"

using namespace scs;

namespace {

ScsParams make_params(const LatentSpec& latent, const Eigen::MatrixXd& theta,
                      const Eigen::VectorXd& beta, double omega,
                      StepFunction baseline = StepFunction::constant(0.0)) {
    ScsParams p;
    p.latent = latent;
    p.theta = theta;
    p.beta = beta;
    p.omega = omega;
    p.baseline_cumhaz = std::move(baseline);
    return p;
}

PosteriorMatrix uniform_gamma(std::size_t n, std::size_t K) {
    return PosteriorMatrix{Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(K),
                                                     1.0 / static_cast<double>(K))};
}

}  // namespace

TEST_CASE("relative_hazard closed forms") {
    auto latent = LatentSpec::three_group();
    Eigen::VectorXd x(2);
    x << 0.3, -0.7;
    ScsParams p = make_params(latent, Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2),
                              std::log(2.0));
    CHECK(relative_hazard(p, x, 0, 0) == 1.0);
    CHECK(relative_hazard(p, x, 0, +1) == 1.0);
    CHECK(relative_hazard(p, x, 1, +1) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(relative_hazard(p, x, 1, -1) == doctest::Approx(0.5).epsilon(1e-15));
    // group 0 ignores omega and treatment
    p.beta << 0.5, -0.25;
    const double base = relative_hazard(p, x, 0, 0);
    p.omega = 3.0;
    CHECK(relative_hazard(p, x, 1, 0) == base);
    CHECK_THROWS_AS(relative_hazard(p, x, 0, 7), ArgumentError);
}

TEST_CASE("gating_probs softmax identities") {
    Eigen::VectorXd x(1);
    x << 1.0;
    CHECK(gating_probs(Eigen::MatrixXd::Zero(4, 1), x)[2] == doctest::Approx(0.25));

    Eigen::MatrixXd theta(2, 1);
    theta << 0.0, std::log(3.0);
    Eigen::VectorXd probs = gating_probs(theta, x);
    CHECK(probs[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(probs[1] == doctest::Approx(0.75).epsilon(1e-14));

    // shift invariance before the identifiability constraint pins row 0
    Eigen::MatrixXd shifted = theta;
    shifted.col(0).array() += 4.2;
    Eigen::VectorXd probs2 = gating_probs(shifted, x);
    CHECK(probs2[0] == doctest::Approx(probs[0]).epsilon(1e-12));
    CHECK(probs2[1] == doctest::Approx(probs[1]).epsilon(1e-12));
}

TEST_CASE("e_step degenerate and uniform cases") {
    Rng rng(6);
    Dataset ds = testutil::random_dataset(rng, 12, 2);

    SUBCASE("single group is certain") {
        ScsParams p = make_params(LatentSpec{{0}}, Eigen::MatrixXd::Zero(1, 2),
                                  Eigen::VectorXd::Zero(2), 0.0);
        PosteriorMatrix g = e_step(p, ds);
        for (Eigen::Index i = 0; i < g.gamma.rows(); ++i) {
            CHECK(g.gamma(i, 0) == 1.0);
        }
    }
    SUBCASE("all-zero parameters are uninformative") {
        ScsParams p = make_params(LatentSpec::three_group(), Eigen::MatrixXd::Zero(3, 2),
                                  Eigen::VectorXd::Zero(2), 0.0);
        PosteriorMatrix g = e_step(p, ds);
        for (Eigen::Index i = 0; i < g.gamma.rows(); ++i) {
            for (Eigen::Index k = 0; k < 3; ++k) {
                CHECK(g.gamma(i, k) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
            }
        }
    }
    SUBCASE("vanished survival falls back to uniform and is counted") {
        // S0 = 0 everywhere: every group's posterior weight underflows
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2),
                                  Eigen::VectorXd::Zero(2), 0.5,
                                  StepFunction::constant(
                                      std::numeric_limits<double>::infinity()));
        int degenerate = 0;
        PosteriorMatrix g = e_step(p, ds, &degenerate);
        CHECK(degenerate == static_cast<int>(ds.n()));
        CHECK(g.gamma(0, 0) == 0.5);
    }
}

TEST_CASE("e_step matches a Bayes computation carrying the point hazard") {
    // four subjects, K = 2, parameters fixed by hand; the oracle keeps the
    // baseline jump factor that the implementation cancels.
    std::vector<double> times{1.0, 2.0, 3.0, 4.0};
    std::vector<int> events{1, 0, 1, 0};
    std::vector<int> treatments{1, 0, 1, 1};
    Eigen::MatrixXd X(4, 2);
    X << 0.5, -0.2, 1.0, 0.3, -0.4, 0.8, 0.1, -0.1;
    Dataset ds = testutil::make_dataset(times, events, treatments, X);

    Eigen::MatrixXd theta(2, 2);
    theta << 0.0, 0.0, 0.6, -0.9;
    Eigen::VectorXd beta(2);
    beta << 0.4, -0.3;
    const double omega = -0.5;
    // baseline jumps exactly at the event times 1 and 3
    StepFunction base({1.0, 3.0}, {0.2, 0.55}, 0.0);
    ScsParams p = make_params(LatentSpec::two_group(), theta, beta, omega, base);

    PosteriorMatrix g = e_step(p, ds);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& r = ds.record(i);
        const double jump = i == 0 ? 0.2 : (i == 2 ? 0.35 : 1.0);
        double weights[2];
        for (int kidx = 0; kidx < 2; ++kidx) {
            const int k = p.latent.groups[static_cast<std::size_t>(kidx)];
            const double h = std::exp(beta.dot(r.covariates) + k * r.treatment * omega);
            const double s0 = std::exp(-base(r.time));
            const double prior =
                gating_probs(theta, r.covariates)[static_cast<Eigen::Index>(kidx)];
            weights[kidx] =
                (r.event == 1 ? jump * h : 1.0) * std::pow(s0, h) * prior;
        }
        const double total = weights[0] + weights[1];
        CHECK(g.gamma(static_cast<Eigen::Index>(i), 0) ==
              doctest::Approx(weights[0] / total).epsilon(1e-12));
        CHECK(g.gamma(static_cast<Eigen::Index>(i), 1) ==
              doctest::Approx(weights[1] / total).epsilon(1e-12));
    }
}

TEST_CASE("e_step rows stay on the simplex and ignore gating normalization") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        Dataset ds = testutil::random_dataset(rng, 25, 3);
        Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(3, 3);
        theta.row(1) = Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
        theta.row(2) = Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
        Eigen::VectorXd beta(3);
        beta << rng.normal(0, 0.5), rng.normal(0, 0.5), rng.normal(0, 0.5);
        ScsParams p = make_params(LatentSpec::three_group(), theta, beta, rng.normal(),
                                  nelson_aalen(ds));
        PosteriorMatrix g = e_step(p, ds);
        for (Eigen::Index i = 0; i < g.gamma.rows(); ++i) {
            CHECK(g.gamma.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(g.gamma.row(i).minCoeff() >= 0.0);
        }
        // a per-subject constant in every group logit cancels
        ScsParams shifted = p;
        Eigen::MatrixXd theta_shift = p.theta;
        for (Eigen::Index k = 0; k < 3; ++k) theta_shift(k, 0) += 2.5;
        shifted.theta = theta_shift;
        PosteriorMatrix g2 = e_step(shifted, ds);
        for (Eigen::Index i = 0; i < g.gamma.rows(); ++i) {
            for (Eigen::Index k = 0; k < 3; ++k) {
                CHECK(g2.gamma(i, k) == doctest::Approx(g.gamma(i, k)).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("weighted partial log-likelihood closed forms") {
    SUBCASE("uniform weights with unit hazards count risk sets") {
        Rng rng(3);
        Dataset ds = testutil::random_dataset(rng, 20, 2, true);
        ScsParams p = make_params(LatentSpec::three_group(), Eigen::MatrixXd::Zero(3, 2),
                                  Eigen::VectorXd::Zero(2), 0.0);
        double expected = 0.0;
        for (const auto& r : ds.records()) {
            if (r.event != 1) continue;
            double risk = 0.0;
            for (const auto& q : ds.records()) {
                if (q.time >= r.time) risk += 1.0;
            }
            expected -= std::log(risk);
        }
        CHECK(weighted_partial_loglik(p, uniform_gamma(ds.n(), 3), ds) ==
              doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("three subjects, one event, scalar parameters by hand") {
        Eigen::MatrixXd X(3, 1);
        X << 0.5, -1.0, 0.25;
        Dataset ds = testutil::make_dataset({1.0, 2.0, 3.0}, {1, 0, 0}, {1, 0, 1}, X);
        Eigen::MatrixXd theta(2, 1);
        theta << 0.0, 0.7;
        Eigen::VectorXd beta(1);
        beta << 0.8;
        const double omega = -0.4;
        ScsParams p = make_params(LatentSpec::two_group(), theta, beta, omega);
        Eigen::MatrixXd gm(3, 2);
        gm << 0.3, 0.7, 0.5, 0.5, 0.9, 0.1;
        // event at t=1: risk set is everyone
        double den = 0.0;
        for (int j = 0; j < 3; ++j) {
            for (int kidx = 0; kidx < 2; ++kidx) {
                const int k = kidx == 0 ? 0 : 1;
                den += gm(j, kidx) * std::exp(beta[0] * X(j, 0) +
                                              k * ds.record(j).treatment * omega);
            }
        }
        double expected = 0.0;
        for (int kidx = 0; kidx < 2; ++kidx) {
            const int k = kidx == 0 ? 0 : 1;
            expected += gm(0, kidx) * ((beta[0] * X(0, 0) + k * 1 * omega) - std::log(den));
        }
        CHECK(weighted_partial_loglik(p, PosteriorMatrix{gm}, ds) ==
              doctest::Approx(expected).epsilon(1e-13));
    }

    SUBCASE("early censored subjects never enter a risk set") {
        Rng rng(9);
        Dataset ds = testutil::random_dataset(rng, 15, 2);
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2),
                                  Eigen::VectorXd::Ones(2) * 0.3, 0.2);
        const double base = weighted_partial_loglik(p, uniform_gamma(ds.n(), 2), ds);
        double min_event = 1e300;
        for (const auto& r : ds.records()) {
            if (r.event == 1) min_event = std::min(min_event, r.time);
        }
        std::vector<SubjectRecord> recs = ds.records();
        SubjectRecord extra;
        extra.time = min_event * 0.5;
        extra.event = 0;
        extra.treatment = 1;
        extra.covariates = Eigen::VectorXd::Ones(2);
        recs.push_back(extra);
        Dataset plus(std::move(recs), ds.feature_names());
        CHECK(weighted_partial_loglik(p, uniform_gamma(plus.n(), 2), plus) ==
              doctest::Approx(base).epsilon(1e-13));
    }

    SUBCASE("no events is an estimation error") {
        Dataset ds = testutil::make_dataset({1, 2}, {0, 0}, {0, 1});
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 1),
                                  Eigen::VectorXd::Zero(1), 0.0);
        CHECK_THROWS_AS(weighted_partial_loglik(p, uniform_gamma(2, 2), ds), EstimationError);
    }
}

TEST_CASE("pl_gradient matches central finite differences") {
    Rng rng(123);
    Dataset ds = testutil::random_dataset(rng, 50, 3, true);
    const LatentSpec latent = LatentSpec::three_group();
    for (int point = 0; point < 20; ++point) {
        Eigen::MatrixXd gm(ds.n(), 3);
        for (Eigen::Index i = 0; i < gm.rows(); ++i) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < 3; ++k) {
                gm(i, k) = 0.05 + rng.uniform01();
                s += gm(i, k);
            }
            gm.row(i) /= s;
        }
        PosteriorMatrix gamma{gm};
        Eigen::VectorXd w(4);
        for (int j = 0; j < 4; ++j) w[j] = rng.normal(0, 0.5);
        auto eval = [&](const Eigen::VectorXd& v) {
            ScsParams p = make_params(latent, Eigen::MatrixXd::Zero(3, 3), v.head(3), v[3]);
            return weighted_partial_loglik(p, gamma, ds);
        };
        ScsParams p = make_params(latent, Eigen::MatrixXd::Zero(3, 3), w.head(3), w[3]);
        auto [grad_beta, grad_omega] = pl_gradient(p, gamma, ds);
        Eigen::VectorXd analytic(4);
        analytic << grad_beta, grad_omega;
        const Eigen::VectorXd numeric = testutil::central_difference(eval, w);
        for (int j = 0; j < 4; ++j) {
            const double denom = std::max(1.0, std::abs(numeric[j]));
            CHECK(std::abs(analytic[j] - numeric[j]) / denom <= 1e-4);
        }
    }
}

TEST_CASE("pl_gradient vanishes at the classical Cox optimum") {
    Rng rng(500);
    Dataset ds = testutil::random_dataset(rng, 80, 2);
    CoxFitResult mle = cox_fit_covariates(ds);
    REQUIRE(mle.converged);
    // single group, no treatment channel: the weighted likelihood collapses
    // to the classical partial likelihood
    ScsParams p = make_params(LatentSpec{{0}}, Eigen::MatrixXd::Zero(1, 2), mle.coef, 0.0);
    auto [grad_beta, grad_omega] = pl_gradient(p, uniform_gamma(ds.n(), 1), ds);
    CHECK(grad_beta.lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(grad_omega == 0.0);

    // identical covariates carry no signal
    Dataset flat = testutil::make_dataset({1, 2, 3, 4}, {1, 1, 0, 1}, {0, 1, 0, 1},
                                          Eigen::MatrixXd::Ones(4, 2));
    ScsParams pf = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2),
                               Eigen::VectorXd::Zero(2), 0.3);
    auto [gb, gw] = pl_gradient(pf, uniform_gamma(4, 2), flat);
    CHECK(gb.lpNorm<Eigen::Infinity>() < 1e-14);
    (void)gw;
}

TEST_CASE("breslow_update against the classical estimator and scaling") {
    Rng rng(321);
    Dataset ds = testutil::random_dataset(rng, 20, 2, true);

    SUBCASE("posterior concentrated on the reference group") {
        Eigen::VectorXd beta(2);
        beta << 0.35, -0.6;
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2), beta,
                                  1.4);
        Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(ds.n(), 2);
        gm.col(0).setOnes();
        StepFunction lam = breslow_update(p, PosteriorMatrix{gm}, ds);
        for (double t : testutil::comparison_grid(ds)) {
            CHECK(lam(t) == doctest::Approx(testutil::breslow_oracle(ds, beta, t))
                                .epsilon(1e-12));
        }
    }

    SUBCASE("scaling every posterior row cancels") {
        Eigen::VectorXd beta(2);
        beta << 0.2, 0.1;
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2), beta,
                                  -0.7);
        Eigen::MatrixXd gm(ds.n(), 2);
        Rng local(9);
        for (Eigen::Index i = 0; i < gm.rows(); ++i) {
            gm(i, 0) = 0.2 + local.uniform01();
            gm(i, 1) = 1.0 - gm(i, 0);
        }
        StepFunction a = breslow_update(p, PosteriorMatrix{gm}, ds);
        StepFunction b = breslow_update(p, PosteriorMatrix{Eigen::MatrixXd(2.0 * gm)}, ds);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-13));
        }
    }

    SUBCASE("jumps are non-decreasing and sit on event times") {
        ScsParams p = make_params(LatentSpec::two_group(), Eigen::MatrixXd::Zero(2, 2),
                                  Eigen::VectorXd::Zero(2), 0.4);
        StepFunction lam = breslow_update(p, uniform_gamma(ds.n(), 2), ds);
        double prev = 0.0;
        for (double v : lam.values()) {
            CHECK(v > prev);
            prev = v;
        }
        for (double t : lam.breakpoints()) {
            bool is_event_time = false;
            for (const auto& r : ds.records()) {
                if (r.event == 1 && r.time == t) is_event_time = true;
            }
            CHECK(is_event_time);
        }
    }
}

TEST_CASE("gating objective closed forms and oracle fit") {
    Rng rng(30);
    Dataset ds = testutil::random_dataset(rng, 30, 2);
    const std::size_t n = ds.n();

    SUBCASE("zero gating with uniform posteriors is n log K") {
        Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(3, 2);
        CHECK(gating_objective(theta, uniform_gamma(n, 3), ds, 0.0) ==
              doctest::Approx(static_cast<double>(n) * std::log(3.0)).epsilon(1e-12));
        CHECK(gating_objective(theta, uniform_gamma(n, 3), ds, 5.0) ==
              doctest::Approx(static_cast<double>(n) * std::log(3.0)).epsilon(1e-12));
    }

    SUBCASE("penalty term is the sum of column norms") {
        Eigen::MatrixXd theta(2, 2);
        theta << 0.0, 0.0, 3.0, -4.0;
        const double base = gating_objective(theta, uniform_gamma(n, 2), ds, 0.0);
        const double penalized = gating_objective(theta, uniform_gamma(n, 2), ds, 2.0);
        CHECK(penalized - base == doctest::Approx(2.0 * (3.0 + 4.0)).epsilon(1e-12));
    }

    SUBCASE("epsilon zero reduces to a weighted softmax regression") {
        // soft labels from a random simplex draw
        Eigen::MatrixXd gm(n, 2);
        for (Eigen::Index i = 0; i < gm.rows(); ++i) {
            gm(i, 0) = rng.uniform01();
            gm(i, 1) = 1.0 - gm(i, 0);
        }
        PosteriorMatrix gamma{gm};
        // independent fit: steepest descent on the test's own objective
        auto nll = [&](const Eigen::VectorXd& row1) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double logit = row1.dot(ds.record(i).covariates);
                const double lse = std::log(1.0 + std::exp(logit));
                total += gm(static_cast<Eigen::Index>(i), 0) * lse +
                         gm(static_cast<Eigen::Index>(i), 1) * (lse - logit);
            }
            return total;
        };
        Eigen::VectorXd row1 = Eigen::VectorXd::Zero(2);
        for (int it = 0; it < 4000; ++it) {
            const Eigen::VectorXd g = testutil::central_difference(nll, row1, 1e-6);
            row1 -= 0.05 * g;
        }
        Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(2, 2);
        theta.row(1) = row1.transpose();
        CHECK(gating_objective(theta, gamma, ds, 0.0) ==
              doctest::Approx(nll(row1)).epsilon(1e-10));
        // and the library gradient agrees with finite differences there
        Eigen::MatrixXd grad = gating_gradient(theta, gamma, ds);
        const Eigen::VectorXd fd = testutil::central_difference(nll, row1, 1e-6);
        CHECK((grad.row(1).transpose() - fd).lpNorm<Eigen::Infinity>() < 1e-5);
        CHECK(grad.row(0).norm() == 0.0);
    }
}

TEST_CASE("prox_group_l1 closed forms and properties") {
    Eigen::MatrixXd theta(3, 2);
    theta << 0.0, 0.0, 3.0, 0.3, 4.0, 0.4;

    SUBCASE("zero threshold is the identity") {
        CHECK(prox_group_l1(theta, 0.0) == theta);
    }
    SUBCASE("column (3,4) shrinks to (2.4, 3.2) at threshold one") {
        Eigen::MatrixXd out = prox_group_l1(theta, 1.0);
        CHECK(out(1, 0) == doctest::Approx(2.4).epsilon(1e-14));
        CHECK(out(2, 0) == doctest::Approx(3.2).epsilon(1e-14));
        // second column has norm 0.5 <= 1: zeroed exactly
        CHECK(out(1, 1) == 0.0);
        CHECK(out(2, 1) == 0.0);
        // reference row untouched
        CHECK(out.row(0).norm() == 0.0);
    }
    SUBCASE("non-expansive per column and zero inside the threshold") {
        Rng rng(64);
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::MatrixXd t(3, 1);
            t << 0.0, rng.normal(0, 2), rng.normal(0, 2);
            const double thr = std::abs(rng.normal(0, 1));
            Eigen::MatrixXd out = prox_group_l1(t, thr);
            CHECK(out.col(0).tail(2).norm() <= t.col(0).tail(2).norm() + 1e-15);
            if (t.col(0).tail(2).norm() <= thr) {
                CHECK(out.col(0).tail(2).norm() == 0.0);
            }
        }
        CHECK_THROWS_AS(prox_group_l1(theta, -1.0), ArgumentError);
    }
}

TEST_CASE("objective is flat in omega without treated subjects") {
    Rng rng(88);
    Dataset base = testutil::random_dataset(rng, 40, 2);
    std::vector<SubjectRecord> recs = base.records();
    for (auto& r : recs) r.treatment = 0;
    Dataset ds(std::move(recs), base.feature_names());
    ScsParams p = make_params(LatentSpec::three_group(), Eigen::MatrixXd::Zero(3, 2),
                              Eigen::VectorXd::Ones(2) * 0.4, 0.8, nelson_aalen(ds));
    const double at = observed_objective(p, ds, 0.5);
    ScsParams p2 = p;
    p2.omega = -1.3;
    CHECK(observed_objective(p2, ds, 0.5) == doctest::Approx(at).epsilon(1e-10));
    ScsParams p3 = p;
    p3.omega = 17.0;
    CHECK(observed_objective(p3, ds, 0.5) == doctest::Approx(at).epsilon(1e-10));
}

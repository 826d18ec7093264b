#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mstlogit/errors.hpp"
#include "mstlogit/kernels.hpp"
#include "mstlogit/model.hpp"
#include "mstlogit/priors.hpp"
#include "mstlogit/special.hpp"
#include "support.hpp"

using namespace mstlogit;
using testsupport::fd_gradient;
using testsupport::max_rel_error;
using testsupport::tiny_table;
using testsupport::toy_config;

namespace {

PosteriorTarget make_target(ModelVariant variant, DynamicsMode dynamics = DynamicsMode::Linear,
                            bool comorbidity = true, int per_cell = 3, std::uint64_t seed = 21) {
    ModelConfig cfg = toy_config(2, 3, variant);
    cfg.dynamics = dynamics;
    cfg.comorbidity = comorbidity;
    LocationTable table = tiny_table(4);
    Dataset data = testsupport::toy_dataset(cfg, table, per_cell, seed);
    return PosteriorTarget(std::move(data), std::move(table), cfg);
}

Dataset single_record_dataset(const ModelConfig& cfg, const std::vector<std::uint8_t>& y) {
    RespondentRecord rec;
    rec.id = "x";
    rec.location = 0;
    rec.cohort = 0;
    rec.responses = y;
    rec.raw.age = cfg.age_min;
    rec.covariates = build_design(rec.raw, cfg);
    return {rec};
}

}  // namespace

TEST_CASE("likelihood anchors on eta = 0") {
    ModelConfig cfg = toy_config(2, 3, ModelVariant::FE);
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    const LocationTable table = tiny_table(4);
    const Dataset data = single_record_dataset(cfg, {1, 0});
    const PosteriorTarget target(data, table, cfg);
    const ParameterLayout& L = target.layout();
    const Vec u = Vec::Zero(L.dim);  // direct mean all zero -> eta = 0
    const Vec pw = target.pointwise_log_lik(u);
    REQUIRE(pw.size() == 1);
    CHECK(pw[0] == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("saturated positive response contributes nearly zero") {
    ModelConfig cfg = toy_config(1, 1, ModelVariant::FE);
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    const LocationTable table = tiny_table(2);
    const Dataset data = single_record_dataset(cfg, {1});
    const PosteriorTarget target(data, table, cfg);
    Vec u = Vec::Zero(target.layout().dim);
    u[target.layout().b0(0, 0)] = 40.0;  // intercept pushes eta to +40
    const Vec pw = target.pointwise_log_lik(u);
    CHECK(std::abs(pw[0]) < 1e-15);
}

TEST_CASE("pointwise log likelihood sums to the total and is equivariant") {
    const PosteriorTarget target = make_target(ModelVariant::FullST);
    Rng rng(3);
    Vec u(target.dim());
    for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1.0, 1.0);
    const Vec pw = target.pointwise_log_lik(u);
    const double prior = log_prior_unconstrained(u, target.layout(), target.config(), nullptr);
    const double total = target.log_density(u);
    CHECK(pairwise_sum({pw.data(), static_cast<std::size_t>(pw.size())}) + prior ==
          doctest::Approx(total).epsilon(1e-10));

    // duplicated record doubles its contribution
    ModelConfig cfg = toy_config(2, 3, ModelVariant::FE);
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    const LocationTable table = tiny_table(4);
    Dataset one = single_record_dataset(cfg, {1, 0});
    Dataset two = one;
    two.push_back(one[0]);
    two[1].id = "y";
    const PosteriorTarget t1(one, table, cfg);
    const PosteriorTarget t2(two, table, cfg);
    Vec v = Vec::Constant(t1.dim(), 0.3);
    const Vec pw1 = t1.pointwise_log_lik(v);
    const Vec pw2 = t2.pointwise_log_lik(v);
    CHECK(pw2.sum() == doctest::Approx(2.0 * pw1.sum()).epsilon(1e-12));
    // permuting records permutes the vector
    std::swap(two[0], two[1]);
    const PosteriorTarget t3(two, table, cfg);
    const Vec pw3 = t3.pointwise_log_lik(v);
    CHECK(pw3[0] == doctest::Approx(pw2[1]));
    CHECK(pw3[1] == doctest::Approx(pw2[0]));
}

TEST_CASE("gradient matches finite differences for every variant") {
    struct Case {
        ModelVariant variant;
        DynamicsMode dynamics;
        bool comorbidity;
        int points;
    };
    const Case cases[] = {
        {ModelVariant::FullST, DynamicsMode::Linear, true, 20},
        {ModelVariant::FullST, DynamicsMode::RandomWalk, true, 6},
        {ModelVariant::FullNS, DynamicsMode::Linear, true, 6},
        {ModelVariant::FullNST, DynamicsMode::Linear, true, 6},
        {ModelVariant::IL, DynamicsMode::Linear, true, 6},
        {ModelVariant::FE, DynamicsMode::Linear, true, 6},
        {ModelVariant::FE, DynamicsMode::Linear, false, 4},
    };
    Rng rng(99);
    for (const auto& c : cases) {
        CAPTURE(static_cast<int>(c.variant));
        const PosteriorTarget target =
            make_target(c.variant, c.dynamics, c.comorbidity, 3, 17);
        auto value = [&](const Vec& x) { return target.log_density(x); };
        Vec grad(target.dim());
        for (int pt = 0; pt < c.points; ++pt) {
            Vec u(target.dim());
            for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-2.0, 2.0);
            const double v = target.log_density_gradient(u, grad);
            REQUIRE(std::isfinite(v));
            const Vec fd = fd_gradient(value, u, 1e-4);
            const double err = max_rel_error(grad, fd);
            CAPTURE(pt);
            CHECK(err < 1e-5);
        }
    }
}

TEST_CASE("shared and per-scale omega both differentiate cleanly") {
    ModelConfig cfg = toy_config(2, 3, ModelVariant::FullST);
    cfg.shared_omega_scales = false;
    cfg.shared_alpha_lambda = true;
    LocationTable table = tiny_table(4);
    Dataset data = testsupport::toy_dataset(cfg, table, 2, 23);
    const PosteriorTarget target(std::move(data), std::move(table), cfg);
    Rng rng(55);
    Vec grad(target.dim());
    auto value = [&](const Vec& x) { return target.log_density(x); };
    for (int pt = 0; pt < 5; ++pt) {
        Vec u(target.dim());
        for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1.5, 1.5);
        const double v = target.log_density_gradient(u, grad);
        REQUIRE(std::isfinite(v));
        CHECK(max_rel_error(grad, fd_gradient(value, u, 1e-4)) < 1e-5);
    }
}

TEST_CASE("FE target equals an independently coded logistic regression") {
    ModelConfig cfg = toy_config(2, 3, ModelVariant::FE);
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    LocationTable table = tiny_table(4);
    Dataset data = testsupport::toy_dataset(cfg, table, 4, 77);
    const PosteriorTarget target(data, table, cfg);
    const ParameterLayout& L = target.layout();
    const double scale = cfg.prior.direct_scale;

    // oracle: plain multivariate logistic regression with N(0, scale^2) priors
    auto oracle = [&](const Vec& u, Vec* grad) {
        double lp = 0.0;
        if (grad) grad->setZero(u.size());
        for (const auto& rec : data) {
            for (int j = 0; j < L.n_d; ++j) {
                double eta = 0.0;
                for (int h = 0; h < L.n_p; ++h) eta += u[L.b0(j, h)] * rec.covariates[h];
                const double y = rec.responses[j];
                lp += y * eta - log1pexp(eta);
                if (grad) {
                    const double r = y - inverse_logit(eta);
                    for (int h = 0; h < L.n_p; ++h) {
                        (*grad)[L.b0(j, h)] += r * rec.covariates[h];
                    }
                }
            }
        }
        for (int i = 0; i < u.size(); ++i) {
            lp += -0.5 * std::log(2.0 * M_PI) - std::log(scale) -
                  0.5 * u[i] * u[i] / (scale * scale);
            if (grad) (*grad)[i] += -u[i] / (scale * scale);
        }
        return lp;
    };

    Rng rng(6);
    Vec grad(target.dim());
    Vec oracle_grad(target.dim());
    for (int pt = 0; pt < 10; ++pt) {
        Vec u(target.dim());
        for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-2.0, 2.0);
        const double mine = target.log_density_gradient(u, grad);
        const double ref = oracle(u, &oracle_grad);
        CHECK(mine == doctest::Approx(ref).epsilon(1e-12));
        CHECK((grad - oracle_grad).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pushing a positive response's coefficient down lowers the density") {
    ModelConfig cfg = toy_config(1, 1, ModelVariant::FE);
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    const LocationTable table = tiny_table(2);
    const Dataset data = single_record_dataset(cfg, {1});
    const PosteriorTarget target(data, table, cfg);
    Vec u = Vec::Zero(target.dim());
    const double at0 = target.log_density(u);
    u[target.layout().b0(0, 0)] = -3.0;
    CHECK(target.log_density(u) < at0);
}

TEST_CASE("evaluation is deterministic") {
    const PosteriorTarget target = make_target(ModelVariant::FullST);
    Rng rng(12);
    Vec u(target.dim());
    for (int i = 0; i < u.size(); ++i) u[i] = rng.uniform(-1.0, 1.0);
    Vec g1(target.dim()), g2(target.dim());
    const double v1 = target.log_density_gradient(u, g1);
    const double v2 = target.log_density_gradient(u, g2);
    CHECK(v1 == v2);
    CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite input is rejected softly") {
    const PosteriorTarget target = make_target(ModelVariant::FullST);
    Vec u = Vec::Zero(target.dim());
    u[0] = INFINITY;
    Vec grad(target.dim());
    CHECK(target.log_density_gradient(u, grad) == -INFINITY);
}

TEST_CASE("cholesky reverse rule matches finite differences directly") {
    // f(C) = sum(W .* chol(C)) for a fixed weight matrix W
    Rng rng(8);
    const int n = 5;
    Mat a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    Mat c = a * a.transpose() + 0.5 * static_cast<double>(n) * Mat::Identity(n, n);
    Mat w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = i >= j ? rng.normal() : 0.0;

    auto f = [&](const Mat& m) {
        Eigen::LLT<Mat> llt(m);
        REQUIRE(llt.info() == Eigen::Success);
        return (Mat(llt.matrixL()).cwiseProduct(w)).sum();
    };

    // analytic: Cbar = L^{-T} Phi(L^T W) L^{-1}, symmetrized
    Eigen::LLT<Mat> llt(c);
    const Mat lower = llt.matrixL();
    Mat p = lower.transpose() * w;
    for (int i = 0; i < n; ++i) {
        p(i, i) *= 0.5;
        for (int j = i + 1; j < n; ++j) p(i, j) = 0.0;
    }
    const Mat s1 = lower.transpose().triangularView<Eigen::Upper>().solve(p);
    const Mat cbar_t = lower.transpose().triangularView<Eigen::Upper>().solve(Mat(s1.transpose()));
    const Mat cbar = 0.5 * (cbar_t + cbar_t.transpose());

    const double h = 1e-6;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) {
            Mat cp = c, cm = c;
            cp(i, j) += h;
            cp(j, i) = cp(i, j);
            cm(i, j) -= h;
            cm(j, i) = cm(i, j);
            const double fd = (f(cp) - f(cm)) / (2.0 * h);
            const double expected = i == j ? cbar(i, i) : 2.0 * cbar(i, j);
            CHECK(fd == doctest::Approx(expected).epsilon(1e-5));
        }
}

TEST_CASE("jitter bookkeeping reports rescued factorizations") {
    const PosteriorTarget target = make_target(ModelVariant::FullST);
    Rng rng(4);
    Vec u(target.dim());
    Vec grad(target.dim());
    for (int i = 0; i < 50; ++i) {
        for (int k = 0; k < u.size(); ++k) u[k] = rng.uniform(-2.0, 2.0);
        target.log_density_gradient(u, grad);
    }
    CHECK(target.evaluations() >= 50);
    CHECK(target.max_jitter_seen() >= 0.0);
}

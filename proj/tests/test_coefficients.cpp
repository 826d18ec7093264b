#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mstlogit/coefficients.hpp"
#include "mstlogit/errors.hpp"
#include "mstlogit/model.hpp"
#include "mstlogit/special.hpp"
#include "support.hpp"

using namespace mstlogit;
using testsupport::tiny_table;
using testsupport::toy_config;

TEST_CASE("assemble_b0") {
    SUBCASE("zero delta annihilates") {
        const Mat phi = Mat::Random(3, 2);
        const Mat psi = Mat::Random(2, 4);
        const Vec delta = Vec::Zero(2);
        CHECK(assemble_b0(phi, delta, psi).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity factors reproduce the diagonal") {
        Vec d(2);
        d << 0.7, -0.2;
        const Mat b = assemble_b0(Mat::Identity(2, 2), d, Mat::Identity(2, 2));
        CHECK(b(0, 0) == doctest::Approx(0.7));
        CHECK(b(1, 1) == doctest::Approx(-0.2));
        CHECK(b(0, 1) == 0.0);
    }
    SUBCASE("single active factor gives rank one") {
        Mat phi = Mat::Random(3, 3);
        Mat psi = Mat::Random(3, 4);
        Vec d = Vec::Zero(3);
        d[1] = 2.0;
        const Mat b = assemble_b0(phi, d, psi);
        Eigen::JacobiSVD<Mat> svd(b);
        int rank = 0;
        for (int i = 0; i < svd.singularValues().size(); ++i) {
            if (svd.singularValues()[i] > 1e-10) ++rank;
        }
        CHECK(rank <= 1);
    }
}

TEST_CASE("correlate_deviations") {
    Mat l(2, 2);
    l << 1.0, 0.0, 0.5, std::sqrt(0.75);
    SUBCASE("zero seeds") {
        CHECK(correlate_deviations(Vec::Zero(2), l).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("identity factor passes seeds through") {
        Vec z(2);
        z << 1.3, -0.4;
        CHECK((correlate_deviations(z, Mat::Identity(2, 2)) - z).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("first basis seed picks the factor column") {
        Vec z(2);
        z << 1.0, 0.0;
        const Vec xi = correlate_deviations(z, l);
        CHECK(xi[0] == doctest::Approx(1.0));
        CHECK(xi[1] == doctest::Approx(0.5));
    }
}

namespace {

struct Setup {
    ModelConfig cfg;
    LocationTable table;
    ParameterLayout layout;
    ParameterState state;
};

Setup make(ModelVariant variant, DynamicsMode dynamics = DynamicsMode::Linear,
           std::uint64_t seed = 5) {
    Setup s;
    s.cfg = toy_config(2, 4, variant);
    s.cfg.dynamics = dynamics;
    s.table = tiny_table(4);
    s.layout = ParameterLayout::create(s.cfg, s.table, 3);
    Rng rng(seed);
    s.state = sample_prior(s.layout, s.cfg, rng);
    return s;
}

}  // namespace

TEST_CASE("coefficient_at reductions") {
    SUBCASE("FE state is constant over locations and cohorts") {
        Setup s = make(ModelVariant::FE);
        const CoefficientField f = build_coefficient_field(s.state, s.layout, s.table);
        const double ref = coefficient_at(f, s.state, s.layout, 1, 2, 0, 0);
        for (int l = 0; l < 4; ++l)
            for (int c = 0; c < 4; ++c) {
                CHECK(coefficient_at(f, s.state, s.layout, 1, 2, l, c) == doctest::Approx(ref));
            }
        CHECK(ref == doctest::Approx(f.b0(1, 2)));
    }
    SUBCASE("initial cohort drops the slope term") {
        Setup s = make(ModelVariant::FullST);
        const CoefficientField f = build_coefficient_field(s.state, s.layout, s.table);
        for (int l = 0; l < 4; ++l) {
            const double expected =
                f.b0(0, 1) + s.state.lambda0(0, 1) * f.xi0[0](l, 1);
            CHECK(coefficient_at(f, s.state, s.layout, 0, 1, l, 0) == doctest::Approx(expected));
        }
    }
    SUBCASE("random walk with constant shifts equals the linear mode") {
        Setup rw = make(ModelVariant::FullST, DynamicsMode::RandomWalk);
        // make every cohort slice of the seeds identical
        const int block = rw.layout.n_l;
        for (int j = 0; j < rw.layout.n_d; ++j)
            for (int h = 0; h < rw.layout.n_p; ++h)
                for (int t = 1; t < rw.layout.z1_slices; ++t)
                    for (int l = 0; l < block; ++l) {
                        rw.state.z1[((j * rw.layout.n_p + h) * rw.layout.z1_slices + t) * block +
                                    l] =
                            rw.state.z1[((j * rw.layout.n_p + h) * rw.layout.z1_slices + 0) *
                                            block +
                                        l];
                    }
        const CoefficientField frw = build_coefficient_field(rw.state, rw.layout, rw.table);

        Setup lin = make(ModelVariant::FullST, DynamicsMode::Linear);
        lin.state = rw.state;
        lin.state.z1.resize(lin.layout.n_d * lin.layout.n_p * lin.layout.n_l);
        for (int j = 0; j < lin.layout.n_d; ++j)
            for (int h = 0; h < lin.layout.n_p; ++h)
                for (int l = 0; l < block; ++l) {
                    lin.state.z1[(j * lin.layout.n_p + h) * block + l] =
                        rw.state.z1[((j * rw.layout.n_p + h) * rw.layout.z1_slices) * block + l];
                }
        const CoefficientField flin = build_coefficient_field(lin.state, lin.layout, lin.table);
        for (int j = 0; j < 2; ++j)
            for (int h = 0; h < 3; ++h)
                for (int l = 0; l < 4; ++l)
                    for (int c = 0; c < 4; ++c) {
                        CHECK(coefficient_at(frw, rw.state, rw.layout, j, h, l, c) ==
                              doctest::Approx(
                                  coefficient_at(flin, lin.state, lin.layout, j, h, l, c))
                                  .epsilon(1e-12));
                    }
    }
}

TEST_CASE("coefficient_at is linear in the scales holding seeds fixed") {
    Setup s = make(ModelVariant::FullST);
    const CoefficientField f = build_coefficient_field(s.state, s.layout, s.table);
    const double base = coefficient_at(f, s.state, s.layout, 0, 1, 2, 3);
    ParameterState doubled = s.state;
    doubled.lambda0 *= 2.0;
    doubled.lambda1 *= 2.0;
    const CoefficientField f2 = build_coefficient_field(doubled, s.layout, s.table);
    const double twice = coefficient_at(f2, doubled, s.layout, 0, 1, 2, 3);
    // beta - b0 is linear in (lambda0, lambda1) jointly
    CHECK(twice - f.b0(0, 1) == doctest::Approx(2.0 * (base - f.b0(0, 1))).epsilon(1e-10));
}

TEST_CASE("linear_predictor") {
    Setup s = make(ModelVariant::FullST);
    const CoefficientField f = build_coefficient_field(s.state, s.layout, s.table);
    RespondentRecord rec;
    rec.location = 1;
    rec.cohort = 2;
    rec.covariates = Vec::Zero(s.layout.n_p);
    rec.covariates[0] = 1.0;

    SUBCASE("intercept-only design picks the first coefficient column") {
        const Vec eta = linear_predictor(f, s.state, s.layout, rec, 0.0);
        for (int j = 0; j < s.layout.n_d; ++j) {
            CHECK(eta[j] ==
                  doctest::Approx(coefficient_at(f, s.state, s.layout, j, 0, 1, 2)));
        }
    }
    SUBCASE("comorbidity loads scale with epsilon") {
        ParameterState st = s.state;
        st.gamma.setZero();
        st.gamma[0] = 1.0;
        const CoefficientField f2 = build_coefficient_field(st, s.layout, s.table);
        const Vec base = linear_predictor(f2, st, s.layout, rec, 0.0);
        const Vec shifted = linear_predictor(f2, st, s.layout, rec, 2.0);
        CHECK(shifted[0] - base[0] == doctest::Approx(2.0));
        for (int j = 1; j < s.layout.n_d; ++j) {
            CHECK(shifted[j] - base[j] == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("fixed-effect table intercepts reproduce reference predictors") {
    // direct-mean FE model whose B0 holds published-style intercepts
    ModelConfig cfg;
    cfg.num_diseases = 5;
    cfg.num_cohorts = 5;
    cfg.variant = ModelVariant::FE;
    cfg.mean = MeanParametrization::Direct;
    cfg.comorbidity = false;
    const LocationTable table = tiny_table(2);
    const ParameterLayout layout = ParameterLayout::create(cfg, table, 1);
    ParameterState state;
    state.b0_direct = Mat::Zero(5, 7);
    const double intercepts[5] = {-3.46, -5.15, -2.62, -4.46, -3.08};
    for (int j = 0; j < 5; ++j) state.b0_direct(j, 0) = intercepts[j];
    const CoefficientField f = build_coefficient_field(state, layout, table);
    RespondentRecord rec;
    rec.location = 0;
    rec.cohort = 0;
    rec.raw.age = 51.0;
    rec.covariates = build_design(rec.raw, cfg);
    const Vec eta = linear_predictor(f, state, layout, rec, 0.0);
    for (int j = 0; j < 5; ++j) CHECK(eta[j] == doctest::Approx(intercepts[j]));
}

TEST_CASE("inverse_logit") {
    CHECK(inverse_logit(0.0) == doctest::Approx(0.5));
    // definitional oracle evaluated directly
    const double direct = 1.0 / (1.0 + std::exp(3.46));
    CHECK(inverse_logit(-3.46) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(inverse_logit(-3.46) == doctest::Approx(0.030472).epsilon(1e-4));
    CHECK(inverse_logit(40.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inverse_logit(-40.0) < 1e-15);
    CHECK(inverse_logit(-40.0) > 0.0);
}

TEST_CASE("likelihood is symmetric under a joint comorbidity sign flip") {
    Setup s = make(ModelVariant::FullST);
    const Dataset data = testsupport::toy_dataset(s.cfg, s.table, 2, 31);
    ParameterLayout layout = ParameterLayout::create(s.cfg, s.table, static_cast<int>(data.size()));
    Rng rng(8);
    ParameterState state = sample_prior(layout, s.cfg, rng);
    const CoefficientField f = build_coefficient_field(state, layout, s.table);
    const double base = log_likelihood(data, f, state, layout);

    ParameterState flipped = state;
    flipped.gamma = -state.gamma;
    flipped.eps = -state.eps;
    const CoefficientField f2 = build_coefficient_field(flipped, layout, s.table);
    CHECK(log_likelihood(data, f2, flipped, layout) == doctest::Approx(base).epsilon(1e-12));

    // the prior breaks the symmetry: gamma1 must stay positive
    CHECK_THROWS_AS(log_prior(flipped, layout, s.cfg), ConstraintViolation);
}

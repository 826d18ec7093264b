#include "mstlogit/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mstlogit/coefficients.hpp"
#include "mstlogit/errors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

namespace {

void add_edge(LocationTable& t, int a, int b) {
    t.adjacency[a].push_back(b);
    t.adjacency[b].push_back(a);
}

void finish_adjacency(LocationTable& t) {
    for (auto& lst : t.adjacency) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    t.degree.resize(t.num_locations);
    for (int l = 0; l < t.num_locations; ++l) {
        t.degree[l] = static_cast<int>(t.adjacency[l].size());
    }
}

Mat feature_distance_matrix(int n, int feature_dim, Rng& rng) {
    Mat features(n, feature_dim);
    for (int l = 0; l < n; ++l)
        for (int f = 0; f < feature_dim; ++f) features(l, f) = rng.normal();
    Mat d = Mat::Zero(n, n);
    double off_sum = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double v = (features.row(a) - features.row(b)).norm();
            d(a, b) = v;
            d(b, a) = v;
            off_sum += 2.0 * v;
        }
    const long off_count = static_cast<long>(n) * (n - 1);
    if (off_count > 0 && off_sum > 0.0) {
        d *= static_cast<double>(off_count) / off_sum;  // mean off-diagonal distance = 1
    }
    return d;
}

}  // namespace

LocationTable gen_locations(const SimConfig& sim, Rng& rng) {
    LocationTable t;
    const int n = sim.num_locations;
    t.num_locations = n;
    t.num_regions = sim.num_regions;
    t.region_of.resize(n);
    for (int l = 0; l < n; ++l) {
        // contiguous index bands; every region nonempty since regions <= n
        t.region_of[l] = static_cast<int>((static_cast<long>(l) * sim.num_regions) / n);
    }
    t.adjacency.assign(n, {});

    if (sim.topology == "grid") {
        const int cols = std::max(1, static_cast<int>(std::ceil(std::sqrt(double(n)))));
        for (int l = 0; l < n; ++l) {
            const int r = l / cols;
            const int c = l % cols;
            if (c + 1 < cols && l + 1 < n && (l + 1) / cols == r) add_edge(t, l, l + 1);
            if (l + cols < n) add_edge(t, l, l + cols);
        }
    } else {
        // random geometric graph on the unit square
        Mat pos(n, 2);
        for (int l = 0; l < n; ++l) {
            pos(l, 0) = rng.uniform();
            pos(l, 1) = rng.uniform();
        }
        const double radius = 1.2 / std::sqrt(static_cast<double>(std::max(2, n)));
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                if ((pos.row(a) - pos.row(b)).norm() < radius) add_edge(t, a, b);
            }
        // connect isolated locations to their nearest neighbor
        for (int a = 0; a < n; ++a) {
            if (!t.adjacency[a].empty() || n < 2) continue;
            int best = a == 0 ? 1 : 0;
            double best_d = (pos.row(a) - pos.row(best)).norm();
            for (int b = 0; b < n; ++b) {
                if (b == a) continue;
                const double d = (pos.row(a) - pos.row(b)).norm();
                if (d < best_d) {
                    best = b;
                    best_d = d;
                }
            }
            add_edge(t, a, best);
        }
    }
    finish_adjacency(t);

    for (int m = 0; m < sim.num_distance_kernels; ++m) {
        t.distance_matrices.push_back(feature_distance_matrix(n, sim.feature_dim, rng));
    }
    t.validate();
    return t;
}

SimulationOutput gen_dataset(const SimConfig& sim, const ModelConfig& model,
                             const LocationTable& table, const ParameterState* fixed_params,
                             Rng& rng) {
    const int n_s = table.num_locations * model.num_cohorts * sim.respondents_per_cell;
    const ParameterLayout layout = ParameterLayout::create(model, table, n_s);

    ParameterState truth;
    if (fixed_params) {
        truth = *fixed_params;
    } else {
        truth = sample_prior(layout, model, rng);
    }
    if (layout.comorbidity) truth.eps.resize(n_s);

    Mat drift;
    if (!sim.cohort_drift.empty()) {
        if (static_cast<int>(sim.cohort_drift.size()) != layout.n_d * layout.n_p) {
            throw ConfigError("cohort_drift must have diseases x predictors entries");
        }
        drift.resize(layout.n_d, layout.n_p);
        for (int j = 0; j < layout.n_d; ++j)
            for (int h = 0; h < layout.n_p; ++h) {
                drift(j, h) = sim.cohort_drift[j * layout.n_p + h];
            }
    }

    const CoefficientField field = build_coefficient_field(truth, layout, table);

    SimulationOutput out;
    out.dataset.reserve(n_s);
    int idx = 0;
    for (int l = 0; l < table.num_locations; ++l) {
        for (int c = 0; c < model.num_cohorts; ++c) {
            const Mat beta = coefficient_matrix(field, truth, layout, l, c);
            for (int k = 0; k < sim.respondents_per_cell; ++k) {
                RespondentRecord rec;
                rec.id = "r" + std::to_string(idx);
                rec.location = l;
                rec.cohort = c;
                rec.raw.sex = rng.bernoulli(sim.rate_sex) ? 1.0 : 0.0;
                rec.raw.edu = rng.bernoulli(sim.rate_edu) ? 1.0 : 0.0;
                rec.raw.eco = rng.bernoulli(sim.rate_eco) ? 1.0 : 0.0;
                rec.raw.smoke = rng.bernoulli(sim.rate_smoke) ? 1.0 : 0.0;
                rec.raw.age = model.age_min + model.age_span * rng.uniform();
                rec.covariates = build_design(rec.raw, model);

                Vec eta = beta * rec.covariates;
                if (drift.size() > 0) {
                    eta.noalias() += static_cast<double>(c) * (drift * rec.covariates);
                }
                if (layout.comorbidity) {
                    const double eps_i = rng.normal();
                    truth.eps[idx] = eps_i;
                    eta.noalias() += truth.gamma * eps_i;
                }
                rec.responses.resize(layout.n_d);
                for (int j = 0; j < layout.n_d; ++j) {
                    rec.responses[j] = rng.bernoulli(inverse_logit(eta[j])) ? 1 : 0;
                }
                out.dataset.push_back(std::move(rec));
                ++idx;
            }
        }
    }
    out.truth = std::move(truth);
    out.truth_unconstrained = to_unconstrained(out.truth, layout);
    return out;
}

std::pair<double, double> pooled_logistic_slope(const std::vector<double>& y,
                                                const std::vector<double>& x_slope,
                                                const std::vector<int>& group, int num_groups) {
    const int n = static_cast<int>(y.size());
    const int p = 1 + num_groups;  // slope column plus one dummy per group
    Mat x = Mat::Zero(n, p);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = x_slope[i];
        x(i, 1 + group[i]) = 1.0;
    }
    // identification requires age variation within the groups
    double within_var = 0.0;
    {
        std::vector<double> sum(num_groups, 0.0), sum2(num_groups, 0.0);
        std::vector<int> cnt(num_groups, 0);
        for (int i = 0; i < n; ++i) {
            sum[group[i]] += x_slope[i];
            sum2[group[i]] += x_slope[i] * x_slope[i];
            ++cnt[group[i]];
        }
        for (int g = 0; g < num_groups; ++g) {
            if (cnt[g] > 0) within_var += sum2[g] - sum[g] * sum[g] / cnt[g];
        }
    }
    if (!(within_var > 1e-9)) throw InsufficientCrossing();

    Vec beta = Vec::Zero(p);
    for (int iter = 0; iter < 100; ++iter) {
        Vec eta = x * beta;
        Vec mu(n), w(n);
        for (int i = 0; i < n; ++i) {
            mu[i] = inverse_logit(eta[i]);
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
        }
        Vec resid(n);
        for (int i = 0; i < n; ++i) resid[i] = y[i] - mu[i];
        const Vec grad = x.transpose() * resid;
        const Mat hess = x.transpose() * w.asDiagonal() * x;
        Eigen::LDLT<Mat> ldlt(hess);
        if (ldlt.info() != Eigen::Success) throw InsufficientCrossing();
        const Vec step = ldlt.solve(grad);
        if (!step.allFinite()) throw InsufficientCrossing();
        beta += step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
    }
    // observed-information standard error of the slope
    Vec eta = x * beta;
    Vec w(n);
    for (int i = 0; i < n; ++i) {
        const double mu = inverse_logit(eta[i]);
        w[i] = std::max(mu * (1.0 - mu), 1e-10);
    }
    const Mat hess = x.transpose() * w.asDiagonal() * x;
    Eigen::LDLT<Mat> ldlt(hess);
    const Mat cov = ldlt.solve(Mat::Identity(p, p));
    return {beta[0], std::sqrt(cov(0, 0))};
}

BiasDemoResult bias_demo(const SimConfig& sim, const ModelConfig& model, Rng& rng) {
    // generation coefficients for the first disease: a clear age effect on
    // the standardized scale plus mild covariate effects
    const int n_p = model.num_predictors();
    Vec b0 = Vec::Zero(n_p);
    Mat drift = Mat::Zero(1, n_p);
    if (!sim.cohort_drift.empty()) {
        for (int h = 0; h < n_p && h < static_cast<int>(sim.cohort_drift.size()); ++h) {
            drift(0, h) = sim.cohort_drift[h];
        }
    }
    for (int h = 0; h < n_p; ++h) {
        switch (model.covariates[h]) {
            case Covariate::Intercept: b0[h] = -1.2; break;
            case Covariate::Age: b0[h] = 0.9; break;
            case Covariate::Sex: b0[h] = 0.25; break;
            case Covariate::Smoke: b0[h] = 0.3; break;
            default: b0[h] = -0.2; break;
        }
    }

    std::vector<double> y, age_std;
    std::vector<int> by_year, by_cohort;
    // survey year t and cohort c give an interview age of (age_min + t - c);
    // only ages inside the configured span are observed
    for (int t = 0; t < sim.survey_years; ++t) {
        for (int c = 0; c < sim.num_cohorts; ++c) {
            const double base_age = model.age_min + static_cast<double>(t - c);
            if (base_age < model.age_min || base_age > model.age_min + model.age_span) continue;
            for (int k = 0; k < sim.respondents_per_cell; ++k) {
                RawFields raw;
                raw.sex = rng.bernoulli(sim.rate_sex) ? 1.0 : 0.0;
                raw.edu = rng.bernoulli(sim.rate_edu) ? 1.0 : 0.0;
                raw.eco = rng.bernoulli(sim.rate_eco) ? 1.0 : 0.0;
                raw.smoke = rng.bernoulli(sim.rate_smoke) ? 1.0 : 0.0;
                raw.age = std::min(base_age + rng.uniform(), model.age_min + model.age_span);
                const Vec x = build_design(raw, model);
                const double eta = x.dot(b0) + static_cast<double>(c) * x.dot(drift.row(0));
                y.push_back(rng.bernoulli(inverse_logit(eta)) ? 1.0 : 0.0);
                age_std.push_back(standardize_age(raw.age, model.age_min, model.age_span));
                by_year.push_back(t);
                by_cohort.push_back(c);
            }
        }
    }
    if (y.empty()) throw InsufficientCrossing();

    // compact group labels
    auto relabel = [](std::vector<int>& g) {
        std::vector<int> seen(*std::max_element(g.begin(), g.end()) + 1, -1);
        int next = 0;
        for (int& v : g) {
            if (seen[v] < 0) seen[v] = next++;
            v = seen[v];
        }
        return next;
    };
    const int n_years = relabel(by_year);
    const int n_cohorts = relabel(by_cohort);

    BiasDemoResult res;
    res.records = static_cast<long>(y.size());
    std::tie(res.slope_by_survey_year, res.se_by_survey_year) =
        pooled_logistic_slope(y, age_std, by_year, n_years);
    std::tie(res.slope_by_cohort, res.se_by_cohort) =
        pooled_logistic_slope(y, age_std, by_cohort, n_cohorts);
    return res;
}

}  // namespace mstlogit

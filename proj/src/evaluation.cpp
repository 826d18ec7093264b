#include "mstlogit/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mstlogit/coefficients.hpp"
#include "mstlogit/errors.hpp"
#include "mstlogit/priors.hpp"
#include "mstlogit/rng.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

int ElpdReport::tail_warnings(double threshold) const {
    int n = 0;
    for (int i = 0; i < pareto_k.size(); ++i) {
        if (pareto_k[i] > threshold) ++n;
    }
    return n;
}

namespace {

double column_lppd(const Mat& ll, int i) {
    const Vec col = ll.col(i);
    return log_sum_exp({col.data(), static_cast<std::size_t>(col.size())}) -
           std::log(static_cast<double>(ll.rows()));
}

double sample_variance(const Vec& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum() / (static_cast<double>(v.size()) - 1.0);
}

void finish_report(ElpdReport& rep) {
    const int n = static_cast<int>(rep.per_point.size());
    rep.elpd = pairwise_sum({rep.per_point.data(), static_cast<std::size_t>(n)});
    rep.se = std::sqrt(static_cast<double>(n) * sample_variance(rep.per_point));
}

}  // namespace

ElpdReport waic(const Mat& loglik) {
    const int s = static_cast<int>(loglik.rows());
    const int n = static_cast<int>(loglik.cols());
    if (s < 2) throw DegenerateDraws("waic needs at least two draws");
    if (n < 1) throw DegenerateDraws("waic needs at least one point");
    ElpdReport rep;
    rep.per_point.resize(n);
    double p_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lppd_i = column_lppd(loglik, i);
        const double p_i = sample_variance(loglik.col(i));
        rep.per_point[i] = lppd_i - p_i;
        p_total += p_i;
    }
    rep.effective_params = p_total;
    finish_report(rep);
    return rep;
}

GpdFit fit_gpd_tail(std::vector<double> x) {
    GpdFit fit;
    std::sort(x.begin(), x.end());
    const int n = static_cast<int>(x.size());
    if (n < 5 || !(x[n - 1] > 0.0)) {
        fit.degenerate = true;
        fit.k = -INFINITY;
        return fit;
    }
    // profile "posterior" over the transformed shape on a fixed grid
    const int m = 30 + static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
    double xstar = x[static_cast<int>(std::floor(n / 4.0 + 0.5)) - 1];
    if (!(xstar > 0.0)) {
        for (double v : x) {
            if (v > 0.0) {
                xstar = v;
                break;
            }
        }
    }
    std::vector<double> theta(m), logl(m);
    for (int j = 0; j < m; ++j) {
        theta[j] = 1.0 / x[n - 1] +
                   (1.0 - std::sqrt(static_cast<double>(m) / (j + 0.5))) / (3.0 * xstar);
        double k = 0.0;
        for (double v : x) k += std::log1p(-theta[j] * v);
        k /= n;
        logl[j] = n * (std::log(-theta[j] / k) - k - 1.0);
        if (!std::isfinite(logl[j])) logl[j] = -INFINITY;
    }
    double theta_hat = 0.0;
    double denom = 0.0;
    const double lmax = *std::max_element(logl.begin(), logl.end());
    for (int j = 0; j < m; ++j) {
        const double w = std::exp(logl[j] - lmax);
        theta_hat += w * theta[j];
        denom += w;
    }
    theta_hat /= denom;
    double k = 0.0;
    for (double v : x) k += std::log1p(-theta_hat * v);
    k /= n;
    fit.sigma = -k / theta_hat;
    // shrink the shape toward 0.5 with a weakly informative weight of 10
    fit.k = (n * k + 5.0) / (n + 10.0);
    if (!std::isfinite(fit.k) || !(fit.sigma > 0.0)) {
        fit.degenerate = true;
        fit.k = INFINITY;
    }
    return fit;
}

namespace {

double gpd_quantile(double p, double sigma, double k) {
    if (std::abs(k) < 1e-12) return -sigma * std::log1p(-p);
    return sigma * std::expm1(-k * std::log1p(-p)) / k;
}

}  // namespace

PsisResult psis_smooth(const Vec& log_ratios) {
    const int s = static_cast<int>(log_ratios.size());
    const int tail =
        std::min(static_cast<int>(std::ceil(0.2 * s)),
                 static_cast<int>(std::ceil(3.0 * std::sqrt(static_cast<double>(s)))));
    if (tail < 5) throw TailTooSmall(tail);

    PsisResult out;
    out.log_weights = log_ratios.array() - log_ratios.maxCoeff();

    std::vector<int> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return out.log_weights[a] < out.log_weights[b];
    });
    const double cutoff = std::exp(out.log_weights[order[s - tail - 1]]);

    std::vector<double> exceed(tail);
    for (int t = 0; t < tail; ++t) {
        exceed[t] = std::exp(out.log_weights[order[s - tail + t]]) - cutoff;
    }
    const GpdFit fit = fit_gpd_tail(exceed);
    out.pareto_k = fit.k;
    if (!fit.degenerate) {
        // replace the tail order statistics by the fitted quantiles at the
        // expected plotting positions, never exceeding the raw maximum
        const double max_ratio = std::exp(out.log_weights[order[s - 1]]);
        for (int t = 0; t < tail; ++t) {
            const double p = (t + 0.5) / tail;
            const double smoothed = cutoff + gpd_quantile(p, fit.sigma, fit.k);
            out.log_weights[order[s - tail + t]] = std::log(std::min(smoothed, max_ratio));
        }
    }

    // final guard: truncate at S^(3/4) times the mean weight
    double mean_w = 0.0;
    for (int i = 0; i < s; ++i) mean_w += std::exp(out.log_weights[i]);
    mean_w /= s;
    const double bound = std::log(mean_w) + 0.75 * std::log(static_cast<double>(s));
    for (int i = 0; i < s; ++i) out.log_weights[i] = std::min(out.log_weights[i], bound);
    return out;
}

ElpdReport psis_loo(const Mat& loglik) {
    const int s = static_cast<int>(loglik.rows());
    const int n = static_cast<int>(loglik.cols());
    if (s < 2) throw DegenerateDraws("psis_loo needs at least two draws");
    ElpdReport rep;
    rep.per_point.resize(n);
    rep.pareto_k.resize(n);
    double p_total = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec neg = -loglik.col(i);
        const PsisResult psis = psis_smooth(neg);
        const Vec num = psis.log_weights + loglik.col(i);
        const double elpd_i =
            log_sum_exp({num.data(), static_cast<std::size_t>(s)}) -
            log_sum_exp({psis.log_weights.data(), static_cast<std::size_t>(s)});
        rep.per_point[i] = elpd_i;
        rep.pareto_k[i] = psis.pareto_k;
        p_total += column_lppd(loglik, i) - elpd_i;
    }
    rep.effective_params = p_total;
    finish_report(rep);
    return rep;
}

std::vector<ComparisonRow> compare(const std::vector<ElpdReport>& reports) {
    if (reports.empty()) return {};
    const int n = static_cast<int>(reports[0].per_point.size());
    for (const auto& r : reports) {
        if (r.per_point.size() != n) {
            throw MismatchedPoints("reports cover different numbers of points");
        }
        if (!reports[0].dataset_digest.empty() && !r.dataset_digest.empty() &&
            r.dataset_digest != reports[0].dataset_digest) {
            throw MismatchedPoints("reports were computed on different datasets");
        }
    }
    std::vector<int> order(reports.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return reports[a].elpd > reports[b].elpd; });
    const ElpdReport& best = reports[order[0]];
    std::vector<ComparisonRow> rows;
    for (int idx : order) {
        const ElpdReport& r = reports[idx];
        ComparisonRow row;
        row.model_name = r.model_name;
        row.elpd = r.elpd;
        row.effective_params = r.effective_params;
        row.se = r.se;
        if (idx == order[0]) {
            row.delta_elpd = 0.0;
            row.delta_se = 0.0;
        } else {
            const Vec diff = r.per_point - best.per_point;
            row.delta_elpd = r.elpd - best.elpd;
            row.delta_se = std::sqrt(static_cast<double>(n) * sample_variance(diff));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PpcCell> posterior_predictive_prevalence(const Mat& draws, const Dataset& dataset,
                                                     const LocationTable& table,
                                                     const ParameterLayout& layout,
                                                     const ModelConfig& config,
                                                     std::uint64_t seed,
                                                     bool use_posterior_eps) {
    (void)config;
    const int s = static_cast<int>(draws.rows());
    const int n_l = table.num_locations;
    const int n_d = layout.n_d;
    if (dataset.empty()) throw EmptyGroup("dataset is empty");
    if (s < 1) throw DegenerateDraws("no draws for the predictive check");

    std::vector<long> group_size(n_l, 0);
    Mat observed_count = Mat::Zero(n_l, n_d);
    for (const auto& rec : dataset) {
        ++group_size[rec.location];
        for (int j = 0; j < n_d; ++j) observed_count(rec.location, j) += rec.responses[j];
    }
    for (int l = 0; l < n_l; ++l) {
        if (group_size[l] == 0) {
            throw EmptyGroup("location " + std::to_string(l) + " has no respondents");
        }
    }

    // replicated prevalences per draw
    std::vector<Mat> rep(s);
    Rng rng = Rng::stream(seed, 0x70706353ULL);
    for (int d = 0; d < s; ++d) {
        const ParameterState state = from_unconstrained(draws.row(d).transpose(), layout);
        const CoefficientField field = build_coefficient_field(state, layout, table);
        Mat count = Mat::Zero(n_l, n_d);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto& r = dataset[i];
            double eps_i = 0.0;
            if (layout.comorbidity) {
                eps_i = use_posterior_eps ? state.eps[static_cast<Eigen::Index>(i)]
                                          : rng.normal();
            }
            const Vec eta = linear_predictor(field, state, layout, r, eps_i);
            for (int j = 0; j < n_d; ++j) {
                if (rng.bernoulli(inverse_logit(eta[j]))) count(r.location, j) += 1.0;
            }
        }
        rep[d] = count;
    }

    std::vector<PpcCell> cells;
    std::vector<double> values(s);
    for (int l = 0; l < n_l; ++l) {
        for (int j = 0; j < n_d; ++j) {
            PpcCell cell;
            cell.location = l;
            cell.disease = j;
            cell.group_size = group_size[l];
            cell.observed = observed_count(l, j) / static_cast<double>(group_size[l]);
            long greater = 0;
            long equal = 0;
            double mean = 0.0;
            for (int d = 0; d < s; ++d) {
                values[d] = rep[d](l, j) / static_cast<double>(group_size[l]);
                mean += values[d];
                if (values[d] > cell.observed) {
                    ++greater;
                } else if (values[d] == cell.observed) {
                    ++equal;
                }
            }
            cell.p_value = (static_cast<double>(greater) + 0.5 * static_cast<double>(equal)) / s;
            cell.rep_mean = mean / s;
            cell.rep_q05 = quantile(values, 0.05);
            cell.rep_q25 = quantile(values, 0.25);
            cell.rep_q75 = quantile(values, 0.75);
            cell.rep_q95 = quantile(values, 0.95);
            cells.push_back(cell);
        }
    }
    return cells;
}

DrawSummary summarize_draws(const std::vector<double>& values) {
    DrawSummary s;
    s.mean = pairwise_sum({values.data(), values.size()}) / static_cast<double>(values.size());
    s.q05 = quantile(values, 0.05);
    s.q25 = quantile(values, 0.25);
    s.q50 = quantile(values, 0.50);
    s.q75 = quantile(values, 0.75);
    s.q95 = quantile(values, 0.95);
    s.q025 = quantile(values, 0.025);
    s.q975 = quantile(values, 0.975);
    return s;
}

std::vector<ComorbidityEdge> comorbidity_summary(const Mat& draws,
                                                 const ParameterLayout& layout) {
    if (!layout.comorbidity) return {};
    const int s = static_cast<int>(draws.rows());
    std::vector<ComorbidityEdge> edges;
    std::vector<double> values(s);
    for (int j1 = 0; j1 < layout.n_d; ++j1) {
        for (int j2 = j1; j2 < layout.n_d; ++j2) {
            for (int d = 0; d < s; ++d) {
                const double g1 =
                    j1 == 0 ? std::exp(draws(d, layout.gamma(0))) : draws(d, layout.gamma(j1));
                const double g2 =
                    j2 == 0 ? std::exp(draws(d, layout.gamma(0))) : draws(d, layout.gamma(j2));
                values[d] = g1 * g2;
            }
            ComorbidityEdge e;
            e.j1 = j1;
            e.j2 = j2;
            e.summary = summarize_draws(values);
            edges.push_back(e);
        }
    }
    return edges;
}

std::vector<FixedEffectCell> fixed_effects_summary(const Mat& draws,
                                                   const ParameterLayout& layout) {
    const int s = static_cast<int>(draws.rows());
    std::vector<FixedEffectCell> cells;
    std::vector<double> values(s);
    for (int j = 0; j < layout.n_d; ++j) {
        for (int h = 0; h < layout.n_p; ++h) {
            for (int d = 0; d < s; ++d) {
                if (layout.direct_mean) {
                    values[d] = draws(d, layout.b0(j, h));
                } else {
                    double b = 0.0;
                    for (int r = 0; r < layout.rank; ++r) {
                        b += draws(d, layout.phi(j, r)) * std::exp(draws(d, layout.delta(r))) *
                             draws(d, layout.psi(r, h));
                    }
                    values[d] = b;
                }
            }
            FixedEffectCell c;
            c.disease = j;
            c.predictor = h;
            c.summary = summarize_draws(values);
            c.excludes_zero = c.summary.q025 > 0.0 || c.summary.q975 < 0.0;
            cells.push_back(c);
        }
    }
    return cells;
}

namespace {

/// Runs a per-draw field assembly and reduces a scalar per (disease, location).
template <typename Fn>
std::vector<LocationOddsRatio> per_location_summary(const Mat& draws,
                                                    const ParameterLayout& layout,
                                                    const LocationTable& table, Fn&& value_at) {
    const int s = static_cast<int>(draws.rows());
    const int n_l = table.num_locations;
    std::vector<std::vector<std::vector<double>>> values(
        layout.n_d, std::vector<std::vector<double>>(n_l, std::vector<double>(s)));
    for (int d = 0; d < s; ++d) {
        const ParameterState state = from_unconstrained(draws.row(d).transpose(), layout);
        const CoefficientField field = build_coefficient_field(state, layout, table);
        for (int j = 0; j < layout.n_d; ++j)
            for (int l = 0; l < n_l; ++l) values[j][l][d] = value_at(state, field, j, l);
    }
    std::vector<LocationOddsRatio> out;
    for (int j = 0; j < layout.n_d; ++j)
        for (int l = 0; l < n_l; ++l) {
            LocationOddsRatio row;
            row.disease = j;
            row.location = l;
            row.summary = summarize_draws(values[j][l]);
            out.push_back(row);
        }
    return out;
}

}  // namespace

std::vector<LocationOddsRatio> odds_ratio_summary(const Mat& draws,
                                                  const ParameterLayout& layout,
                                                  const LocationTable& table, int predictor,
                                                  int cohort) {
    return per_location_summary(
        draws, layout, table,
        [&](const ParameterState& state, const CoefficientField& field, int j, int l) {
            return std::exp(coefficient_at(field, state, layout, j, predictor, l, cohort));
        });
}

std::vector<LocationOddsRatio> cohort_step_odds_summary(const Mat& draws,
                                                        const ParameterLayout& layout,
                                                        const LocationTable& table, int predictor,
                                                        const Vec& profile) {
    return per_location_summary(
        draws, layout, table,
        [&](const ParameterState& state, const CoefficientField& field, int j, int l) {
            if (!layout.has_lambda1) return 1.0;
            if (profile.size() == 0) {
                return std::exp(state.lambda1(j, predictor) * field.xi1[j][0](l, predictor));
            }
            double step = 0.0;
            for (int h = 0; h < layout.n_p; ++h) {
                step += profile[h] * state.lambda1(j, h) * field.xi1[j][0](l, h);
            }
            return std::exp(step);
        });
}

std::vector<CurvePoint> morbidity_curves(const Mat& draws, const ParameterLayout& layout,
                                         const LocationTable& table, const ModelConfig& config,
                                         const RawFields& profile, int location, int cohort,
                                         int age_points) {
    const int s = static_cast<int>(draws.rows());
    std::vector<double> ages(age_points);
    for (int a = 0; a < age_points; ++a) {
        ages[a] = config.age_min +
                  config.age_span * static_cast<double>(a) / std::max(1, age_points - 1);
    }
    std::vector<std::vector<std::vector<double>>> values(
        layout.n_d, std::vector<std::vector<double>>(age_points, std::vector<double>(s)));
    for (int d = 0; d < s; ++d) {
        const ParameterState state = from_unconstrained(draws.row(d).transpose(), layout);
        const CoefficientField field = build_coefficient_field(state, layout, table);
        const Mat beta = coefficient_matrix(field, state, layout, location, cohort);
        for (int a = 0; a < age_points; ++a) {
            RawFields raw = profile;
            raw.age = ages[a];
            const Vec x = build_design(raw, config);
            const Vec eta = beta * x;
            for (int j = 0; j < layout.n_d; ++j) {
                values[j][a][d] = inverse_logit(eta[j]);
            }
        }
    }
    std::vector<CurvePoint> out;
    for (int j = 0; j < layout.n_d; ++j)
        for (int a = 0; a < age_points; ++a) {
            CurvePoint pt;
            pt.disease = j;
            pt.age = ages[a];
            pt.summary = summarize_draws(values[j][a]);
            out.push_back(pt);
        }
    return out;
}

std::vector<NamedSummary> parameter_summary(const Mat& draws, const ParameterLayout& layout) {
    const int s = static_cast<int>(draws.rows());
    const auto names = layout.names();
    std::vector<NamedSummary> out;
    std::vector<double> values(s);
    for (int p = 0; p < layout.dim; ++p) {
        const std::string& name = names[p];
        std::string display = name;
        double (*transform)(double) = nullptr;
        if (name.rfind("log_", 0) == 0) {
            display = name.substr(4);
            transform = +[](double v) { return std::exp(v); };
        } else if (name.rfind("logit_", 0) == 0) {
            display = name.substr(6);
            transform = +[](double v) { return inverse_logit(v); };
        }
        for (int d = 0; d < s; ++d) {
            values[d] = transform ? transform(draws(d, p)) : draws(d, p);
        }
        NamedSummary row;
        row.name = display;
        row.summary = summarize_draws(values);
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace mstlogit

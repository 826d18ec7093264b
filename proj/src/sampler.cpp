#include "mstlogit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "mstlogit/errors.hpp"
#include "mstlogit/special.hpp"

namespace mstlogit {

PhasePoint Integrator::make(Vec q, Vec p) const {
    PhasePoint z;
    z.q = std::move(q);
    z.p = std::move(p);
    z.grad.resize(z.q.size());
    z.logp = target->log_density_gradient(z.q, z.grad);
    return z;
}

void Integrator::step(PhasePoint& z, double eps) const {
    z.p.noalias() += 0.5 * eps * z.grad;
    z.q.array() += eps * inv_metric.array() * z.p.array();
    z.logp = target->log_density_gradient(z.q, z.grad);
    z.p.noalias() += 0.5 * eps * z.grad;
}

double Integrator::hamiltonian(const PhasePoint& z) const {
    const double kinetic = 0.5 * (inv_metric.array() * z.p.array().square()).sum();
    return -z.logp + kinetic;
}

Mat DrawMatrix::stacked() const {
    Mat out(total_draws(), dim);
    int row = 0;
    for (const auto& c : chains) {
        out.middleRows(row, c.draws.rows()) = c.draws;
        row += static_cast<int>(c.draws.rows());
    }
    return out;
}

Mat DrawMatrix::stacked_pointwise() const {
    if (chains.empty() || chains[0].pointwise.size() == 0) return {};
    Mat out(total_draws(), chains[0].pointwise.cols());
    int row = 0;
    for (const auto& c : chains) {
        out.middleRows(row, c.pointwise.rows()) = c.pointwise;
        row += static_cast<int>(c.pointwise.rows());
    }
    return out;
}

namespace {

/// Nesterov dual averaging on log step size.
class DualAverage {
  public:
    DualAverage(double eps0, double delta) { reset(eps0, delta); }

    void reset(double eps0, double delta) {
        mu_ = std::log(10.0 * eps0);
        log_eps_ = std::log(eps0);
        log_eps_bar_ = 0.0;
        h_bar_ = 0.0;
        m_ = 1.0;
        delta_ = delta;
    }

    void update(double accept) {
        if (std::isnan(accept)) accept = 0.0;
        const double w = 1.0 / (m_ + kT0);
        h_bar_ = (1.0 - w) * h_bar_ + w * (delta_ - accept);
        log_eps_ = mu_ - std::sqrt(m_) / kGamma * h_bar_;
        const double w2 = std::pow(m_, -kKappa);
        log_eps_bar_ = w2 * log_eps_ + (1.0 - w2) * log_eps_bar_;
        m_ += 1.0;
    }

    double current() const { return std::exp(log_eps_); }
    double frozen() const { return std::exp(log_eps_bar_); }

  private:
    static constexpr double kT0 = 10.0;
    static constexpr double kGamma = 0.05;
    static constexpr double kKappa = 0.75;
    double mu_ = 0.0, log_eps_ = 0.0, log_eps_bar_ = 0.0, h_bar_ = 0.0, m_ = 1.0;
    double delta_ = 0.8;
};

/// Streaming mean/variance for the metric windows.
class Welford {
  public:
    explicit Welford(int dim) : mean_(Vec::Zero(dim)), m2_(Vec::Zero(dim)) {}

    void add(const Vec& x) {
        ++n_;
        const Vec d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_.array() += d.array() * (x - mean_).array();
    }

    long count() const { return n_; }

    /// Sample variance shrunk toward a small constant, as used for
    /// regularized metric estimates.
    Vec regularized_variance() const {
        const double n = static_cast<double>(n_);
        Vec var = m2_ / std::max(1.0, n - 1.0);
        return (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
    }

  private:
    long n_ = 0;
    Vec mean_;
    Vec m2_;
};

int env_thread_cap() {
    if (const char* s = std::getenv("MSTLOGIT_THREADS")) {
        const int v = std::atoi(s);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

struct NutsChain::Subtree {
    PhasePoint minus, plus;
    PhasePoint sample;
    double sample_h = 0.0;
    double log_sum_w = -INFINITY;
    Vec rho;
    double sum_accept = 0.0;
    int n_leapfrog = 0;
    bool diverged = false;
    bool turned = false;
};

NutsChain::NutsChain(const LogDensityModel& target, const SamplerConfig& config, Rng rng)
    : target_(target), config_(config), rng_(std::move(rng)) {
    config_.validate();
    integrator_.target = &target_;
    integrator_.inv_metric = Vec::Ones(target_.dim());
    step_size_ = config_.init_step_size;
}

void NutsChain::init_random() {
    const int dim = target_.dim();
    for (int attempt = 0; attempt < 100; ++attempt) {
        Vec q0(dim);
        for (int i = 0; i < dim; ++i) {
            q0[i] = rng_.uniform(-config_.init_range, config_.init_range);
        }
        Vec grad(dim);
        const double logp = target_.log_density_gradient(q0, grad);
        if (std::isfinite(logp)) {
            current_.q = std::move(q0);
            current_.grad = std::move(grad);
            current_.logp = logp;
            current_.p = Vec::Zero(dim);
            return;
        }
    }
    throw NonFiniteDensity("no finite starting point found in 100 attempts");
}

void NutsChain::init_at(const Vec& q0) {
    Vec grad(q0.size());
    const double logp = target_.log_density_gradient(q0, grad);
    if (!std::isfinite(logp)) {
        throw NonFiniteDensity("log density not finite at the initial point");
    }
    current_.q = q0;
    current_.grad = std::move(grad);
    current_.logp = logp;
    current_.p = Vec::Zero(q0.size());
}

void NutsChain::find_initial_step_size() {
    // coarse doubling/halving search for a ~50% one-step acceptance
    const int dim = target_.dim();
    Vec p(dim);
    for (int i = 0; i < dim; ++i) {
        p[i] = rng_.normal() / std::sqrt(integrator_.inv_metric[i]);
    }
    PhasePoint z0 = current_;
    z0.p = p;
    const double h0 = integrator_.hamiltonian(z0);
    auto ratio = [&](double eps) {
        PhasePoint z = z0;
        integrator_.step(z, eps);
        const double h = integrator_.hamiltonian(z);
        return std::isfinite(h) ? std::exp(h0 - h) : 0.0;
    };
    double eps = step_size_;
    double a = ratio(eps);
    const double dir = a > 0.5 ? 1.0 : -1.0;
    for (int iter = 0; iter < 50; ++iter) {
        if (dir > 0 ? (a <= 0.5) : (a >= 0.5)) break;
        eps *= dir > 0 ? 2.0 : 0.5;
        if (eps > 1e7 || eps < 1e-10) break;
        a = ratio(eps);
    }
    step_size_ = eps;
}

NutsChain::Subtree NutsChain::build_tree(int depth, const PhasePoint& from, int direction,
                                         double h0) {
    if (depth == 0) {
        Subtree leaf;
        PhasePoint z = from;
        integrator_.step(z, direction * step_size_);
        const double h = integrator_.hamiltonian(z);
        const double delta = std::isfinite(h) ? h - h0 : INFINITY;
        leaf.n_leapfrog = 1;
        leaf.diverged = delta > config_.divergence_threshold;
        leaf.sum_accept = delta > 0.0 ? std::exp(-delta) : 1.0;
        if (!std::isfinite(delta)) leaf.sum_accept = 0.0;
        leaf.log_sum_w = leaf.diverged ? -INFINITY : -delta;
        leaf.rho = z.p;
        leaf.minus = z;
        leaf.plus = z;
        leaf.sample = std::move(z);
        leaf.sample_h = h;
        return leaf;
    }

    Subtree left = build_tree(depth - 1, from, direction, h0);
    if (left.diverged || left.turned) return left;
    const PhasePoint& edge = direction > 0 ? left.plus : left.minus;
    Subtree right = build_tree(depth - 1, edge, direction, h0);

    Subtree merged;
    merged.n_leapfrog = left.n_leapfrog + right.n_leapfrog;
    merged.sum_accept = left.sum_accept + right.sum_accept;
    merged.diverged = right.diverged;
    merged.turned = right.turned;
    if (merged.diverged || merged.turned) return merged;

    merged.log_sum_w = log_add_exp(left.log_sum_w, right.log_sum_w);
    // unbiased multinomial choice between the two halves
    const double logu = std::log(rng_.uniform_pos());
    if (logu < right.log_sum_w - merged.log_sum_w) {
        merged.sample = std::move(right.sample);
        merged.sample_h = right.sample_h;
    } else {
        merged.sample = std::move(left.sample);
        merged.sample_h = left.sample_h;
    }
    merged.rho = left.rho + right.rho;
    merged.minus = direction > 0 ? std::move(left.minus) : std::move(right.minus);
    merged.plus = direction > 0 ? std::move(right.plus) : std::move(left.plus);
    const auto sharp = [this](const Vec& p) { return integrator_.inv_metric.cwiseProduct(p); };
    merged.turned = merged.rho.dot(sharp(merged.minus.p)) <= 0.0 ||
                    merged.rho.dot(sharp(merged.plus.p)) <= 0.0;
    return merged;
}

IterationStats NutsChain::transition() {
    const int dim = target_.dim();
    if (!std::isfinite(current_.logp)) {
        throw NonFiniteDensity("transition started from a non-finite state");
    }
    for (int i = 0; i < dim; ++i) {
        current_.p[i] = rng_.normal() / std::sqrt(integrator_.inv_metric[i]);
    }
    const double h0 = integrator_.hamiltonian(current_);

    PhasePoint tree_minus = current_;
    PhasePoint tree_plus = current_;
    PhasePoint sample = current_;
    double sample_h = h0;
    double tree_log_w = 0.0;  // weight of the initial point relative to itself
    Vec rho = current_.p;

    IterationStats stats;
    stats.step_size = step_size_;
    const auto sharp = [this](const Vec& p) { return integrator_.inv_metric.cwiseProduct(p); };

    for (int depth = 0; depth < config_.max_treedepth; ++depth) {
        const int direction = rng_.uniform() < 0.5 ? -1 : 1;
        const PhasePoint& edge = direction > 0 ? tree_plus : tree_minus;
        Subtree sub = build_tree(depth, edge, direction, h0);
        stats.n_leapfrog += sub.n_leapfrog;
        stats.accept_stat += sub.sum_accept;
        if (sub.diverged) {
            stats.divergent = true;
            break;
        }
        if (sub.turned) break;
        stats.treedepth = depth + 1;
        // biased progressive sampling favours the fresh half of the trajectory
        const double logu = std::log(rng_.uniform_pos());
        if (logu < sub.log_sum_w - tree_log_w) {
            sample = sub.sample;
            sample_h = sub.sample_h;
        }
        tree_log_w = log_add_exp(tree_log_w, sub.log_sum_w);
        rho += sub.rho;
        if (direction > 0) {
            tree_plus = std::move(sub.plus);
        } else {
            tree_minus = std::move(sub.minus);
        }
        if (rho.dot(sharp(tree_minus.p)) <= 0.0 || rho.dot(sharp(tree_plus.p)) <= 0.0) break;
    }

    stats.accept_stat = stats.n_leapfrog > 0 ? stats.accept_stat / stats.n_leapfrog : 0.0;
    stats.energy = sample_h;
    current_ = std::move(sample);
    return stats;
}

void NutsChain::adapt(int warmup_iterations) {
    if (warmup_iterations <= 0) return;
    find_initial_step_size();
    DualAverage da(step_size_, config_.target_accept);

    // window layout: 75 iterations of step-size-only burn-in, variance
    // windows of 25, 50, 100, ... with the last one absorbing the remainder,
    // then 50 iterations to settle the step size on the frozen metric.
    // Short warmups adapt the step size only.
    const bool windowed =
        config_.metric == MetricKind::Diagonal && warmup_iterations >= 150;
    const int init_buffer = 75;
    const int slow_end = warmup_iterations - 50;
    std::vector<int> window_ends;
    if (windowed) {
        int start = init_buffer;
        int size = 25;
        while (start < slow_end) {
            int end = start + size;
            if (end + 2 * size > slow_end) end = slow_end;
            window_ends.push_back(end);
            start = end;
            size *= 2;
        }
    }

    std::size_t widx = 0;
    Welford accum(target_.dim());
    for (int it = 0; it < warmup_iterations; ++it) {
        step_size_ = da.current();
        const IterationStats st = transition();
        da.update(st.accept_stat);
        if (!windowed || widx >= window_ends.size()) continue;
        if (it >= init_buffer && it < slow_end) {
            accum.add(current_.q);
            if (it + 1 == window_ends[widx]) {
                if (accum.count() >= 2) {
                    integrator_.inv_metric = accum.regularized_variance();
                }
                accum = Welford(target_.dim());
                ++widx;
                find_initial_step_size();
                da.reset(step_size_, config_.target_accept);
            }
        }
    }
    step_size_ = da.frozen();
    if (!(step_size_ > 0.0) || !std::isfinite(step_size_)) {
        step_size_ = config_.init_step_size;
    }
}

namespace {

ChainResult run_chain(const LogDensityModel& target, const SamplerConfig& config, int chain_index,
                      const std::function<Vec(const Vec&)>* hook) {
    NutsChain chain(target, config, Rng::stream(config.seed, chain_index));
    chain.init_random();
    chain.adapt(config.warmup);

    ChainResult result;
    result.draws.resize(config.sampling, target.dim());
    result.stats.resize(config.sampling);
    for (int s = 0; s < config.sampling; ++s) {
        result.stats[s] = chain.transition();
        result.draws.row(s) = chain.position();
        if (result.stats[s].divergent) ++result.divergences;
        if (hook) {
            const Vec v = (*hook)(chain.position());
            if (result.pointwise.size() == 0) result.pointwise.resize(config.sampling, v.size());
            result.pointwise.row(s) = v;
        }
    }
    result.step_size = chain.step_size();
    result.inv_metric = chain.inv_metric();
    return result;
}

}  // namespace

DrawMatrix run_sampler(const LogDensityModel& target, const SamplerConfig& config,
                       const std::function<Vec(const Vec&)>* draw_hook) {
    config.validate();
    DrawMatrix out;
    out.dim = target.dim();
    out.sampling = config.sampling;
    out.chains.resize(config.chains);

    const int workers = std::min(config.chains, env_thread_cap());
    if (workers <= 1) {
        for (int k = 0; k < config.chains; ++k) {
            out.chains[k] = run_chain(target, config, k, draw_hook);
        }
    } else {
        std::vector<std::exception_ptr> errors(config.chains);
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    const int k = next.fetch_add(1);
                    if (k >= config.chains) return;
                    try {
                        out.chains[k] = run_chain(target, config, k, draw_hook);
                    } catch (...) {
                        errors[k] = std::current_exception();
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    bool all_diverged = true;
    for (const auto& c : out.chains) {
        if (c.divergences * 2 <= config.sampling) {
            all_diverged = false;
            break;
        }
    }
    if (all_diverged) throw AllChainsDiverged();

    if (config.chains >= 1 && config.sampling >= 8) {
        std::vector<Mat> per_chain;
        per_chain.reserve(out.chains.size());
        for (const auto& c : out.chains) per_chain.push_back(c.draws);
        out.diagnostics = compute_diagnostics(per_chain);
    }
    return out;
}

namespace {

/// Splits each chain in half and rank-normalizes the pooled draws.
std::vector<Vec> split_rank_normalized(const std::vector<Mat>& chains, int param) {
    const int half = static_cast<int>(chains[0].rows()) / 2;
    std::vector<Vec> seq;
    for (const auto& c : chains) {
        seq.push_back(c.col(param).head(half));
        seq.push_back(c.col(param).tail(half));
    }
    const int m = static_cast<int>(seq.size());
    const long total = static_cast<long>(m) * half;
    // pooled average ranks with ties sharing their mean rank
    std::vector<std::pair<double, long>> pool;
    pool.reserve(total);
    for (int s = 0; s < m; ++s)
        for (int i = 0; i < half; ++i) pool.emplace_back(seq[s][i], s * half + i);
    std::sort(pool.begin(), pool.end());
    std::vector<double> rank(total);
    long i = 0;
    while (i < total) {
        long j = i;
        while (j + 1 < total && pool[j + 1].first == pool[i].first) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // 1-based average rank
        for (long k = i; k <= j; ++k) rank[pool[k].second] = avg;
        i = j + 1;
    }
    std::vector<Vec> out(m, Vec(half));
    const double denom = static_cast<double>(total) + 0.25;
    for (int s = 0; s < m; ++s)
        for (int k = 0; k < half; ++k) {
            const double p = (rank[s * half + k] - 0.375) / denom;
            out[s][k] = inverse_normal_cdf(p);
        }
    return out;
}

struct RhatEss {
    bool defined = false;
    double rhat = 0.0;
    bool ess_defined = false;
    double ess = 0.0;
};

RhatEss rhat_ess(const std::vector<Vec>& seq) {
    RhatEss out;
    const int m = static_cast<int>(seq.size());
    const int n = static_cast<int>(seq[0].size());
    Vec means(m), vars(m);
    for (int s = 0; s < m; ++s) {
        means[s] = seq[s].mean();
        vars[s] = (seq[s].array() - means[s]).square().sum() / (n - 1);
    }
    const double w = vars.mean();
    const double mean_of_means = means.mean();
    const double b =
        m > 1 ? (means.array() - mean_of_means).square().sum() / (m - 1) : 0.0;
    const double var_plus = w * (n - 1) / n + b;
    if (!(w > 0.0) || !std::isfinite(var_plus)) return out;  // constant draws

    if (m > 1) {
        out.defined = true;
        out.rhat = std::sqrt(var_plus / w);
    }

    // bulk ESS via per-chain autocovariances with Geyer pairing
    auto autocov = [&](int lag) {
        double acc = 0.0;
        for (int s = 0; s < m; ++s) {
            double c = 0.0;
            for (int t = 0; t < n - lag; ++t) {
                c += (seq[s][t] - means[s]) * (seq[s][t + lag] - means[s]);
            }
            acc += c / n;  // biased estimator
        }
        return acc / m;
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return out;
    double tau = 0.0;
    double prev_pair = INFINITY;
    // rho_0 = 1 - (w - c0)/var_plus pairs with rho_1
    double rho_even = 1.0 - (w - c0) / var_plus;
    int lag = 1;
    while (lag < n - 2) {
        const double rho_odd = 1.0 - (w - autocov(lag)) / var_plus;
        double pair = rho_even + rho_odd;
        if (pair < 0.0) break;
        pair = std::min(pair, prev_pair);  // initial monotone sequence
        tau += pair;
        prev_pair = pair;
        rho_even = 1.0 - (w - autocov(lag + 1)) / var_plus;
        lag += 2;
    }
    const double tau_total = std::max(-1.0 + 2.0 * tau, 1.0 / std::log10(m * n + 10.0));
    if (tau_total > 0.0 && std::isfinite(tau_total)) {
        out.ess_defined = true;
        out.ess = static_cast<double>(m) * n / tau_total;
    }
    return out;
}

}  // namespace

std::vector<ParameterDiagnostic> compute_diagnostics(const std::vector<Mat>& chain_draws) {
    if (chain_draws.empty()) throw InsufficientDraws("no chains");
    const int rows = static_cast<int>(chain_draws[0].rows());
    for (const auto& c : chain_draws) {
        if (c.rows() != rows || c.cols() != chain_draws[0].cols()) {
            throw InsufficientDraws("chains differ in shape");
        }
    }
    if (rows / 2 < 4) {
        throw InsufficientDraws("fewer than 4 draws per split sequence");
    }
    const int dim = static_cast<int>(chain_draws[0].cols());
    const bool multi_chain = chain_draws.size() >= 2;
    std::vector<ParameterDiagnostic> out(dim);
    for (int p = 0; p < dim; ++p) {
        // constant parameters get the undefined flag rather than NaN noise
        bool constant = true;
        const double ref = chain_draws[0](0, p);
        for (const auto& c : chain_draws) {
            if ((c.col(p).array() != ref).any()) {
                constant = false;
                break;
            }
        }
        if (constant) continue;
        const auto seq = split_rank_normalized(chain_draws, p);
        const RhatEss r = rhat_ess(seq);
        out[p].rhat_defined = r.defined && multi_chain;
        out[p].rhat = out[p].rhat_defined ? r.rhat : 0.0;
        out[p].ess_defined = r.ess_defined;
        out[p].ess_bulk = r.ess;
    }
    return out;
}

}  // namespace mstlogit

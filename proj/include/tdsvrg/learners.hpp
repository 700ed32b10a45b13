#pragma once

// The iterative algorithms: vanilla TD(0), TD-SVRG variants (exact, batched,
// i.i.d., Markovian with projection), plus GTD2 and VRTD baselines. All
// emit a uniform RunTrace with one record per epoch.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdsvrg/errors.hpp"
#include "tdsvrg/mdp.hpp"
#include "tdsvrg/rng.hpp"
#include "tdsvrg/sampling.hpp"

namespace tdsvrg {

enum class Algorithm { Td0, TdSvrgFinite, TdSvrgBatched, TdSvrgIid, TdSvrgMarkov, Gtd2, Vrtd };

inline std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Td0: return "td0";
        case Algorithm::TdSvrgFinite: return "td_svrg";
        case Algorithm::TdSvrgBatched: return "td_svrg_batched";
        case Algorithm::TdSvrgIid: return "td_svrg_iid";
        case Algorithm::TdSvrgMarkov: return "td_svrg_markov";
        case Algorithm::Gtd2: return "gtd2";
        case Algorithm::Vrtd: return "vrtd";
    }
    return "unknown";
}

enum class StepSchedule { Constant, InvSqrtT, InvT };

struct LearnerConfig {
    Algorithm algorithm = Algorithm::TdSvrgFinite;
    double alpha = 0.125;
    StepSchedule alpha_schedule = StepSchedule::Constant;
    std::size_t M = 1;             // update batch size / epoch length
    std::size_t epochs = 10;
    BatchSchedule batch_schedule = BatchSchedule::fixed(1);
    double R = 0.0;                // projection radius (Markovian only)
    double beta = 0.0;             // GTD2 second step size
    std::uint64_t seed = 0;
    std::optional<Vector> theta0;  // defaults to the zero vector
};

struct EpochRecord {
    std::size_t epoch = 0;
    Vector theta_tilde;
    double f_value = 0.0;
    double dist_sq = 0.0;
    std::size_t samples_used = 0;
    std::optional<double> est_err_norm; // ||eta_m|| when the mean path is estimated
};

struct RunTrace {
    std::vector<EpochRecord> records; // records[0] is the initialization
    Vector final_theta;
    LearnerConfig config;

    const EpochRecord& final_record() const { return records.back(); }
};

constexpr double kDivergenceGuard = 1e8;

inline Vector project_ball(const Vector& theta, double radius) {
    if (radius < 0.0) throw InvalidRadius("project_ball: negative radius");
    const double n = norm2(theta);
    if (n <= radius) return theta;
    if (radius == 0.0) return Vector(theta.size(), 0.0);
    return (radius / n) * theta;
}

namespace detail {

inline double step_size(const LearnerConfig& cfg, std::size_t t) {
    switch (cfg.alpha_schedule) {
        case StepSchedule::Constant: return cfg.alpha;
        case StepSchedule::InvSqrtT: return cfg.alpha / std::sqrt(static_cast<double>(t));
        case StepSchedule::InvT: return cfg.alpha / static_cast<double>(t);
    }
    return cfg.alpha;
}

inline void guard_divergence(const Vector& theta, std::size_t step) {
    if (norm2(theta) > kDivergenceGuard)
        throw DivergenceDetected("parameter norm exceeded 1e8 at step " + std::to_string(step));
}

inline void record_epoch(RunTrace& trace, const FixedPointSolution& oracle, std::size_t epoch,
                         const Vector& theta, std::size_t samples,
                         std::optional<double> est_err = std::nullopt) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.theta_tilde = theta;
    rec.f_value = f_value(oracle, theta);
    rec.dist_sq = dist_sq(oracle, theta);
    rec.samples_used = samples;
    rec.est_err_norm = est_err;
    trace.records.push_back(std::move(rec));
}

inline Vector initial_theta(const LearnerConfig& cfg, std::size_t dim) {
    if (cfg.theta0) {
        if (cfg.theta0->size() != dim) throw DimensionMismatch("theta0 dimension mismatch");
        return *cfg.theta0;
    }
    return Vector(dim, 0.0);
}

// exact mean-path direction b - A theta under the oracle's law
inline Vector exact_mean_path(const FixedPointSolution& oracle, const Vector& theta) {
    Vector g = oracle.b;
    axpy(-1.0, matvec(oracle.A, theta), g);
    return g;
}

} // namespace detail

using TransitionSource = std::function<Transition()>;

inline TransitionSource dataset_uniform_source(const Mdp& mdp, const Dataset& ds, Rng rng) {
    (void)mdp;
    if (ds.transitions.empty()) throw EmptySource("dataset_uniform_source: empty dataset");
    return [&ds, rng]() mutable { return ds.transitions[rng.uniform_index(ds.size())]; };
}

// Sequential single-sample TD(0); the trace is recorded every M updates so
// sample budgets line up with SVRG epochs.
inline RunTrace run_td0(const Mdp& mdp, TransitionSource source, const LearnerConfig& cfg,
                        const FixedPointSolution& oracle) {
    RunTrace trace;
    trace.config = cfg;
    Vector theta = detail::initial_theta(cfg, oracle.dim());
    detail::record_epoch(trace, oracle, 0, theta, 0);

    std::size_t t = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        for (std::size_t i = 0; i < cfg.M; ++i) {
            ++t;
            const Transition tr = source();
            axpy(detail::step_size(cfg, t), td_update(mdp, tr, theta), theta);
            detail::guard_divergence(theta, t);
        }
        detail::record_epoch(trace, oracle, m, theta, t);
    }
    trace.final_theta = theta;
    return trace;
}

namespace detail {

struct EpochEstimate {
    Vector g_hat;
    std::size_t samples = 0;
    double err_norm = 0.0;
};

// One SVRG epoch body shared by the finite, i.i.d. and Markovian variants.
template <typename InnerSampler>
Vector svrg_inner_loop(const Mdp& mdp, const LearnerConfig& cfg, const Vector& theta_anchor,
                       const Vector& g_hat, InnerSampler&& sample, Rng& pick_rng,
                       std::size_t base_step, bool project) {
    const std::size_t t_pick = pick_rng.uniform_index(cfg.M); // t' in {0,...,M-1}
    Vector theta = theta_anchor;
    Vector snapshot = theta; // t' = 0 keeps the anchor
    for (std::size_t t = 1; t <= cfg.M; ++t) {
        const Transition tr = sample();
        Vector v = td_update(mdp, tr, theta);
        axpy(-1.0, td_update(mdp, tr, theta_anchor), v);
        axpy(1.0, g_hat, v);
        axpy(cfg.alpha, v, theta);
        if (project) theta = project_ball(theta, cfg.R);
        detail::guard_divergence(theta, base_step + t);
        if (t == t_pick) snapshot = theta;
    }
    return snapshot;
}

} // namespace detail

// TD-SVRG on a finite dataset (exact mean path or estimated over n_m samples
// drawn without replacement).
inline RunTrace run_td_svrg(const Mdp& mdp, const Dataset& ds, const LearnerConfig& cfg,
                            const FixedPointSolution& oracle) {
    if (ds.transitions.empty()) throw EmptySource("run_td_svrg: empty dataset");
    const std::size_t N = ds.size();

    RunTrace trace;
    trace.config = cfg;
    Vector theta_tilde = detail::initial_theta(cfg, oracle.dim());
    detail::record_epoch(trace, oracle, 0, theta_tilde, 0);

    std::size_t samples = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        Rng est_rng = stream_for(cfg.seed, m, StreamPurpose::Estimation);
        Rng inner_rng = stream_for(cfg.seed, m, StreamPurpose::InnerLoop);
        Rng pick_rng = stream_for(cfg.seed, m, StreamPurpose::SnapshotPick);

        Vector g_hat;
        std::size_t n_m = 0;
        if (cfg.batch_schedule.mode == ScheduleMode::Exact) {
            g_hat = mean_path_update(mdp, ds, theta_tilde);
            n_m = N;
        } else {
            n_m = estimation_batch_size(cfg.batch_schedule, m, oracle.lambda_A, mdp.r_max,
                                        theta_tilde, f_value(oracle, theta_tilde),
                                        oracle.sigma_sq);
            n_m = std::min(n_m, N);
            if (n_m >= N) {
                g_hat = mean_path_update(mdp, ds, theta_tilde);
            } else {
                const auto idx = est_rng.sample_without_replacement(N, n_m);
                Vector acc(oracle.dim(), 0.0);
                for (std::size_t i : idx)
                    axpy(1.0, td_update(mdp, ds.transitions[i], theta_tilde), acc);
                g_hat = (1.0 / static_cast<double>(n_m)) * acc;
            }
        }
        const double est_err = norm2(g_hat - detail::exact_mean_path(oracle, theta_tilde));
        samples += n_m;

        theta_tilde = detail::svrg_inner_loop(
            mdp, cfg, theta_tilde, g_hat,
            [&]() { return ds.transitions[inner_rng.uniform_index(N)]; }, pick_rng, samples,
            /*project=*/false);
        samples += cfg.M;
        detail::record_epoch(trace, oracle, m, theta_tilde, samples, est_err);
    }
    trace.final_theta = theta_tilde;
    return trace;
}

// TD-SVRG with online i.i.d. sampling; the mean path is estimated over n_m
// fresh draws and the inner loop also consumes fresh draws.
inline RunTrace run_td_svrg_iid(const Mdp& mdp, const LearnerConfig& cfg,
                                const FixedPointSolution& oracle) {
    if (cfg.batch_schedule.mode == ScheduleMode::Exact)
        throw MissingOracle("run_td_svrg_iid: exact schedule requires a finite dataset");
    ChainSampler sampler(mdp);

    RunTrace trace;
    trace.config = cfg;
    Vector theta_tilde = detail::initial_theta(cfg, oracle.dim());
    detail::record_epoch(trace, oracle, 0, theta_tilde, 0);

    std::size_t samples = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        Rng est_rng = stream_for(cfg.seed, m, StreamPurpose::Estimation);
        Rng inner_rng = stream_for(cfg.seed, m, StreamPurpose::InnerLoop);
        Rng pick_rng = stream_for(cfg.seed, m, StreamPurpose::SnapshotPick);

        const std::size_t n_m =
            estimation_batch_size(cfg.batch_schedule, m, oracle.lambda_A, mdp.r_max, theta_tilde,
                                  f_value(oracle, theta_tilde), oracle.sigma_sq);
        Vector acc(oracle.dim(), 0.0);
        for (std::size_t i = 0; i < n_m; ++i)
            axpy(1.0, td_update(mdp, sampler.iid_draw(est_rng), theta_tilde), acc);
        const Vector g_hat = (1.0 / static_cast<double>(n_m)) * acc;
        const double est_err = norm2(g_hat - detail::exact_mean_path(oracle, theta_tilde));
        samples += n_m;

        theta_tilde = detail::svrg_inner_loop(
            mdp, cfg, theta_tilde, g_hat, [&]() { return sampler.iid_draw(inner_rng); }, pick_rng,
            samples, /*project=*/false);
        samples += cfg.M;
        detail::record_epoch(trace, oracle, m, theta_tilde, samples, est_err);
    }
    trace.final_theta = theta_tilde;
    return trace;
}

// TD-SVRG under Markovian sampling: each epoch estimates the mean path from a
// fresh consecutive trajectory, the inner loop continues that chain, and
// every inner update is projected onto the ball of radius R.
inline RunTrace run_td_svrg_markov(const Mdp& mdp, const LearnerConfig& cfg,
                                   const FixedPointSolution& oracle,
                                   const ErgodicityProfile& profile) {
    (void)profile;
    if (cfg.R < norm2(oracle.theta_star))
        throw InvalidRadius("run_td_svrg_markov: R < ||theta*||");
    ChainSampler sampler(mdp);

    RunTrace trace;
    trace.config = cfg;
    Vector theta_tilde = detail::initial_theta(cfg, oracle.dim());
    detail::record_epoch(trace, oracle, 0, theta_tilde, 0);

    std::size_t samples = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        Rng chain_rng = stream_for(cfg.seed, m, StreamPurpose::Trajectory);
        Rng pick_rng = stream_for(cfg.seed, m, StreamPurpose::SnapshotPick);

        const std::size_t n_m =
            estimation_batch_size(cfg.batch_schedule, m, oracle.lambda_A, mdp.r_max, theta_tilde,
                                  f_value(oracle, theta_tilde), oracle.sigma_sq);
        std::size_t state = sampler.sample_stationary(chain_rng);
        Vector acc(oracle.dim(), 0.0);
        for (std::size_t i = 0; i < n_m; ++i) {
            const Transition tr = sampler.step(state, chain_rng);
            state = tr.s2;
            axpy(1.0, td_update(mdp, tr, theta_tilde), acc);
        }
        const Vector g_hat = (1.0 / static_cast<double>(n_m)) * acc;
        const double est_err = norm2(g_hat - detail::exact_mean_path(oracle, theta_tilde));
        samples += n_m;

        theta_tilde = detail::svrg_inner_loop(
            mdp, cfg, theta_tilde, g_hat,
            [&]() {
                const Transition tr = sampler.step(state, chain_rng);
                state = tr.s2;
                return tr;
            },
            pick_rng, samples, /*project=*/true);
        samples += cfg.M;
        detail::record_epoch(trace, oracle, m, theta_tilde, samples, est_err);
    }
    trace.final_theta = theta_tilde;
    return trace;
}

// Standard two-timescale GTD2 baseline.
inline RunTrace run_gtd2(const Mdp& mdp, TransitionSource source, const LearnerConfig& cfg,
                         const FixedPointSolution& oracle) {
    RunTrace trace;
    trace.config = cfg;
    Vector theta = detail::initial_theta(cfg, oracle.dim());
    Vector w(oracle.dim(), 0.0);
    detail::record_epoch(trace, oracle, 0, theta, 0);

    std::size_t t = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        for (std::size_t i = 0; i < cfg.M; ++i) {
            ++t;
            const Transition tr = source();
            const Vector phi_s = mdp.phi(tr.s);
            const Vector phi_s2 = mdp.phi(tr.s2);
            const double delta = tr.r + mdp.gamma * dot(phi_s2, theta) - dot(phi_s, theta);
            const double phi_w = dot(phi_s, w);
            axpy(cfg.beta * (delta - phi_w), phi_s, w);
            Vector dir = phi_s;
            axpy(-mdp.gamma, phi_s2, dir);
            axpy(cfg.alpha * phi_w, dir, theta);
            detail::guard_divergence(theta, t);
        }
        detail::record_epoch(trace, oracle, m, theta, t);
    }
    trace.final_theta = theta;
    return trace;
}

// VRTD baseline: SVRG-style epochs with a fixed estimation batch of size M
// (no growth); converges to an accuracy floor and oscillates.
inline RunTrace run_vrtd(const Mdp& mdp, const LearnerConfig& cfg,
                         const FixedPointSolution& oracle) {
    ChainSampler sampler(mdp);

    RunTrace trace;
    trace.config = cfg;
    Vector theta_tilde = detail::initial_theta(cfg, oracle.dim());
    detail::record_epoch(trace, oracle, 0, theta_tilde, 0);

    std::size_t samples = 0;
    for (std::size_t m = 1; m <= cfg.epochs; ++m) {
        Rng est_rng = stream_for(cfg.seed, m, StreamPurpose::Estimation);
        Rng inner_rng = stream_for(cfg.seed, m, StreamPurpose::InnerLoop);
        Rng pick_rng = stream_for(cfg.seed, m, StreamPurpose::SnapshotPick);

        Vector acc(oracle.dim(), 0.0);
        for (std::size_t i = 0; i < cfg.M; ++i)
            axpy(1.0, td_update(mdp, sampler.iid_draw(est_rng), theta_tilde), acc);
        const Vector g_hat = (1.0 / static_cast<double>(cfg.M)) * acc;
        const double est_err = norm2(g_hat - detail::exact_mean_path(oracle, theta_tilde));
        samples += cfg.M;

        theta_tilde = detail::svrg_inner_loop(
            mdp, cfg, theta_tilde, g_hat, [&]() { return sampler.iid_draw(inner_rng); }, pick_rng,
            samples, /*project=*/false);
        samples += cfg.M;
        detail::record_epoch(trace, oracle, m, theta_tilde, samples, est_err);
    }
    trace.final_theta = theta_tilde;
    return trace;
}

} // namespace tdsvrg

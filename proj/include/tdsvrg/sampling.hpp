#pragma once

// Dataset construction (Markovian and balanced trajectories), i.i.d.
// transition streams, mean-path updates, and the estimation batch-size
// schedules n_m.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdsvrg/dataset.hpp"
#include "tdsvrg/errors.hpp"
#include "tdsvrg/mdp.hpp"
#include "tdsvrg/rng.hpp"

namespace tdsvrg {

// Shared sampling plumbing: inverse-CDF draws from the chain's rows and from
// the stationary distribution.
class ChainSampler {
public:
    explicit ChainSampler(const Mdp& mdp)
        : mdp_(&mdp), mu_(stationary_distribution(mdp.P)) {}

    const Vector& stationary() const { return mu_; }

    std::size_t sample_stationary(Rng& rng) const { return rng.discrete(mu_); }

    std::size_t sample_next(std::size_t s, Rng& rng) const {
        const double u = rng.uniform();
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < mdp_->n_states; ++j) {
            acc += mdp_->P(s, j);
            if (u < acc) return j;
        }
        return mdp_->n_states - 1;
    }

    Transition step(std::size_t s, Rng& rng) const {
        const std::size_t s2 = sample_next(s, rng);
        return Transition{s, s2, mdp_->rewards(s, s2)};
    }

    Transition iid_draw(Rng& rng) const {
        return step(sample_stationary(rng), rng);
    }

private:
    const Mdp* mdp_;
    Vector mu_;
};

// Markovian trajectory of the requested length, started from the stationary
// distribution.
inline Dataset sample_trajectory(const Mdp& mdp, std::size_t length, std::uint64_t seed) {
    if (length < 1) throw Error("sample_trajectory: length must be >= 1");
    ChainSampler sampler(mdp);
    Rng rng = stream_for(seed, 0, StreamPurpose::Trajectory);

    std::vector<Transition> ts;
    ts.reserve(length);
    std::size_t s = sampler.sample_stationary(rng);
    for (std::size_t t = 0; t < length; ++t) {
        Transition tr = sampler.step(s, rng);
        s = tr.s2;
        ts.push_back(tr);
    }
    return make_dataset(std::move(ts), mdp.id);
}

// Closed walk from s0: simulate until the first transition back into s0 at or
// after min_length steps. The resulting first-state and second-state
// multisets coincide, so the dataset is balanced by construction.
inline Dataset sample_balanced_dataset(const Mdp& mdp, std::size_t s0, std::size_t min_length,
                                       std::uint64_t seed) {
    if (min_length < 1) throw Error("sample_balanced_dataset: min_length must be >= 1");
    if (s0 >= mdp.n_states) throw Error("sample_balanced_dataset: s0 out of range");
    ChainSampler sampler(mdp);
    Rng rng = stream_for(seed, 0, StreamPurpose::Trajectory);

    const double return_prob = sampler.stationary()[s0];
    if (return_prob <= 0.0)
        throw HorizonExceeded("sample_balanced_dataset: s0 has zero stationary mass");
    const std::size_t overshoot_cap =
        static_cast<std::size_t>(std::ceil(100.0 / return_prob));

    std::vector<Transition> ts;
    ts.reserve(min_length + 16);
    std::size_t s = s0;
    for (std::size_t t = 0;; ++t) {
        if (t > min_length + overshoot_cap)
            throw HorizonExceeded("sample_balanced_dataset: no return to s0 within " +
                                  std::to_string(overshoot_cap) + " steps past min_length");
        Transition tr = sampler.step(s, rng);
        s = tr.s2;
        ts.push_back(tr);
        if (ts.size() >= min_length && tr.s2 == s0) break;
    }
    return make_dataset(std::move(ts), mdp.id);
}

// Independent draws: s ~ mu_pi, s' ~ P(s, .), r = r(s, s').
class IidStream {
public:
    IidStream(const Mdp& mdp, std::uint64_t seed)
        : sampler_(mdp), rng_(stream_for(seed, 0, StreamPurpose::Trajectory)) {}
    IidStream(const Mdp& mdp, Rng rng) : sampler_(mdp), rng_(rng) {}

    Transition next() { return sampler_.iid_draw(rng_); }

private:
    ChainSampler sampler_;
    Rng rng_;
};

// Single continuing chain; consecutive calls produce a Markovian trajectory.
class MarkovStream {
public:
    MarkovStream(const Mdp& mdp, std::uint64_t seed)
        : sampler_(mdp), rng_(stream_for(seed, 0, StreamPurpose::Trajectory)) {
        state_ = sampler_.sample_stationary(rng_);
    }
    MarkovStream(const Mdp& mdp, Rng rng) : sampler_(mdp), rng_(rng) {
        state_ = sampler_.sample_stationary(rng_);
    }

    std::size_t state() const { return state_; }

    Transition next() {
        Transition tr = sampler_.step(state_, rng_);
        state_ = tr.s2;
        return tr;
    }

private:
    ChainSampler sampler_;
    Rng rng_;
    std::size_t state_;
};

template <typename TransitionRange>
inline Vector mean_path_update(const Mdp& mdp, const TransitionRange& transitions,
                               const Vector& theta) {
    std::size_t n = 0;
    Vector acc(theta.size(), 0.0);
    for (const Transition& t : transitions) {
        axpy(1.0, td_update(mdp, t, theta), acc);
        ++n;
    }
    if (n == 0) throw EmptySource("mean_path_update: empty source");
    return (1.0 / static_cast<double>(n)) * acc;
}

inline Vector mean_path_update(const Mdp& mdp, const Dataset& ds, const Vector& theta) {
    return mean_path_update(mdp, ds.transitions, theta);
}

enum class ScheduleMode { Exact, Fixed, Theoretical, Practical };

struct BatchSchedule {
    ScheduleMode mode = ScheduleMode::Exact;
    double c = 1.0;                      // free constant of the growing schedules
    std::optional<std::size_t> cap;      // dataset size N, when finite
    std::size_t fixed_size = 0;          // for ScheduleMode::Fixed

    static BatchSchedule exact(std::size_t n) {
        return BatchSchedule{ScheduleMode::Exact, 1.0, n, 0};
    }
    static BatchSchedule fixed(std::size_t m) {
        return BatchSchedule{ScheduleMode::Fixed, 1.0, std::nullopt, m};
    }
    static BatchSchedule theoretical(double c, std::optional<std::size_t> cap = std::nullopt) {
        return BatchSchedule{ScheduleMode::Theoretical, c, cap, 0};
    }
    static BatchSchedule practical(double c, std::optional<std::size_t> cap = std::nullopt) {
        return BatchSchedule{ScheduleMode::Practical, c, cap, 0};
    }
};

// Estimation batch size n_m for epoch `epoch` (1-based over epochs; epoch 0 is
// initialization). Growing schedules divide by c lambda_A (2/3)^epoch; the
// theoretical numerator is 4 f(theta_prev) + 2 sigma^2, the practical one is
// 2 r_max^2 + 8 ||theta_prev||^2. Results are rounded up, floored at one
// sample, rescaled by N/(N-1) and capped at N for finite datasets.
inline std::size_t estimation_batch_size(const BatchSchedule& sched, std::size_t epoch,
                                         double lambda_A, double r_max,
                                         const Vector& theta_prev,
                                         std::optional<double> f_prev = std::nullopt,
                                         std::optional<double> sigma_sq = std::nullopt) {
    switch (sched.mode) {
        case ScheduleMode::Exact:
            if (!sched.cap) throw MissingOracle("estimation_batch_size: exact mode requires N");
            return *sched.cap;
        case ScheduleMode::Fixed:
            return std::max<std::size_t>(sched.fixed_size, 1);
        case ScheduleMode::Theoretical:
        case ScheduleMode::Practical: {
            if (lambda_A <= 0.0) throw MissingInput("estimation_batch_size: lambda_A must be > 0");
            double numerator;
            if (sched.mode == ScheduleMode::Theoretical) {
                if (!f_prev || !sigma_sq)
                    throw MissingOracle(
                        "estimation_batch_size: theoretical schedule needs f(theta) and sigma^2");
                numerator = 4.0 * *f_prev + 2.0 * *sigma_sq;
            } else {
                numerator = 2.0 * r_max * r_max + 8.0 * norm2_sq(theta_prev);
            }
            double value = numerator /
                           (sched.c * lambda_A * std::pow(2.0 / 3.0, static_cast<double>(epoch)));
            if (sched.cap && *sched.cap > 1)
                value *= static_cast<double>(*sched.cap) / static_cast<double>(*sched.cap - 1);
            std::size_t n = ceil_to_size(value);
            if (sched.cap) n = std::min(n, *sched.cap);
            return std::max<std::size_t>(n, 1);
        }
    }
    throw Error("estimation_batch_size: unknown mode");
}

// --- delimited text round trip ------------------------------------------------

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_dataset: cannot open " + path);
    out << "s,s2,r\n";
    out.precision(17);
    for (const Transition& t : ds.transitions)
        out << t.s << "," << t.s2 << "," << t.r << "\n";
    if (!out) throw IoError("save_dataset: write failed for " + path);
}

// The balanced flag is recomputed on load, never trusted from the file.
inline Dataset load_dataset(const std::string& path, std::string source_id = "") {
    std::ifstream in(path);
    if (!in) throw IoError("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("s,s2,r", 0) != 0)
        throw IoError("load_dataset: missing 's,s2,r' header in " + path);
    std::vector<Transition> ts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        Transition t;
        char comma1 = 0, comma2 = 0;
        if (!(ss >> t.s >> comma1 >> t.s2 >> comma2 >> t.r) || comma1 != ',' || comma2 != ',')
            throw IoError("load_dataset: malformed line '" + line + "' in " + path);
        ts.push_back(t);
    }
    return make_dataset(std::move(ts), std::move(source_id));
}

} // namespace tdsvrg

#pragma once

// Theoretical parameter rules, batch-size comparison tables, convergence-rate
// fitting, and cross-run aggregation.

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tdsvrg/errors.hpp"
#include "tdsvrg/learners.hpp"
#include "tdsvrg/mdp.hpp"

namespace tdsvrg {

enum class Regime { FiniteBalanced, FiniteUnbalanced, Prop1SqNorm, Iid, Markov };

inline std::string regime_name(Regime r) {
    switch (r) {
        case Regime::FiniteBalanced: return "finite_balanced";
        case Regime::FiniteUnbalanced: return "finite_unbalanced";
        case Regime::Prop1SqNorm: return "prop1_sq_norm";
        case Regime::Iid: return "iid";
        case Regime::Markov: return "markov";
    }
    return "unknown";
}

struct TheoreticalParams {
    Regime regime = Regime::FiniteBalanced;
    double alpha = 0.0;
    std::size_t M = 0;
    double J = 0.0;          // unbalanced error term 4 gamma^2 / (N lambda_A)
    std::size_t n_m = 0;     // Markov regime estimation batch size
    double C2 = 0.0;         // Markov regime trajectory-error constant
};

// Exact constants prescribed per regime. The Markov regime splits the error
// budget evenly: each of the three bound terms is held to epsilon/3.
inline TheoreticalParams theoretical_parameters(
    const FixedPointSolution& sol, Regime regime,
    std::optional<std::size_t> N = std::nullopt, std::optional<double> epsilon = std::nullopt,
    const ErgodicityProfile* profile = nullptr) {
    const double lambda = sol.lambda_A;
    TheoreticalParams p;
    p.regime = regime;
    switch (regime) {
        case Regime::FiniteBalanced:
            p.alpha = 1.0 / 8.0;
            p.M = ceil_to_size(16.0 / lambda);
            break;
        case Regime::FiniteUnbalanced: {
            if (!N) throw MissingInput("theoretical_parameters: unbalanced regime needs N");
            p.J = 4.0 * sol.gamma * sol.gamma / (static_cast<double>(*N) * lambda);
            p.alpha = 1.0 / (8.0 + p.J);
            p.M = ceil_to_size(2.0 / (lambda * p.alpha));
            break;
        }
        case Regime::Prop1SqNorm:
            p.alpha = lambda / 32.0;
            p.M = ceil_to_size(32.0 / (lambda * lambda));
            break;
        case Regime::Iid:
            p.alpha = 1.0 / 16.0;
            p.M = ceil_to_size(32.0 / lambda);
            break;
        case Regime::Markov: {
            if (!epsilon || !profile)
                throw MissingInput("theoretical_parameters: markov regime needs epsilon and profile");
            const double eps = *epsilon;
            if (eps <= 0.0 || eps >= 1.0)
                throw MissingInput("theoretical_parameters: epsilon must lie in (0,1)");
            p.alpha = eps / (16.0 * std::log(1.0 / eps));
            p.M = ceil_to_size(2.0 / (p.alpha * lambda));
            p.C2 = 4.0 * (1.0 + (profile->m_const - 1.0) * profile->rho) / (1.0 - profile->rho) *
                   (4.0 * profile->R * profile->R + profile->r_max * profile->r_max);
            p.n_m = ceil_to_size(8.0 * p.C2 / (lambda * eps));
            break;
        }
    }
    return p;
}

// Theorem-style epoch-m error envelope for the Markovian algorithm:
// (3/4)^m f0 + 8 C2 / (lambda_A n_m) + 4 alpha (2 G^2 (4 + 6 tau^mix(alpha)) + 9 R^2).
inline double markov_error_bound(const FixedPointSolution& sol, const ErgodicityProfile& profile,
                                 double C2, double f0, std::size_t m, std::size_t n_m,
                                 double alpha) {
    const double tau = static_cast<double>(profile.tau_mix(alpha));
    return std::pow(0.75, static_cast<double>(m)) * f0 +
           8.0 * C2 / (sol.lambda_A * static_cast<double>(n_m)) +
           4.0 * alpha *
               (2.0 * profile.G * profile.G * (4.0 + 6.0 * tau) + 9.0 * profile.R * profile.R);
}

// Empirical second-moment matrix C = E[phi phi^T] under the dataset's
// first-state law.
inline Matrix empirical_feature_covariance(const Mdp& mdp, const Dataset& ds) {
    const std::size_t d = mdp.n_features();
    Matrix c(d, d);
    const double inv_n = 1.0 / static_cast<double>(ds.size());
    for (const Transition& t : ds.transitions) {
        const Vector phi = mdp.phi(t.s);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c(i, j) += inv_n * phi[i] * phi[j];
    }
    return c;
}

// Maximum per-transition update operator norm: for the rank-one map
// theta -> phi(s)(phi(s) - gamma phi(s'))^T theta this is
// ||phi(s)|| * ||phi(s) - gamma phi(s')||.
inline double lipschitz_bound(const Mdp& mdp, const Dataset& ds) {
    double lg = 0.0;
    for (const Transition& t : ds.transitions) {
        Vector diff = mdp.phi(t.s);
        axpy(-mdp.gamma, mdp.phi(t.s2), diff);
        lg = std::max(lg, norm2(mdp.phi(t.s)) * norm2(diff));
    }
    return lg;
}

// PD-SVRG theoretical batch size: 51 kappa^2(C) L_G^2 / lambda_min(A^T C^-1 A)^2.
inline double pd_svrg_batch_formula(const FixedPointSolution& dataset_sol, const Matrix& c,
                                    double l_g) {
    const std::size_t d = c.rows();
    const SymEigResult c_eig = sym_eigenvalues(c);
    if (c_eig.min() <= kSingularPivot)
        throw SingularC("pd_svrg_batch_formula: C is singular (lambda_min = " +
                        std::to_string(c_eig.min()) + ")");
    const double kappa_c = c_eig.max() / c_eig.min();

    // A^T C^{-1} A via column solves
    const Matrix& a = dataset_sol.A;
    Matrix cinv_a(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vector col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = a(i, j);
        Vector x;
        try {
            x = solve_linear(c, col);
        } catch (const SingularMatrix&) {
            throw SingularC("pd_svrg_batch_formula: C solve failed");
        }
        for (std::size_t i = 0; i < d; ++i) cinv_a(i, j) = x[i];
    }
    Matrix q = matmul(a.transpose(), cinv_a);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (q(i, j) + q(j, i));
            q(i, j) = v;
            q(j, i) = v;
        }
    const double lam = sym_eigenvalues(q).min();
    return 51.0 * kappa_c * kappa_c * l_g * l_g / (lam * lam);
}

enum class BatchMethod { TdSvrg, PdSvrg, Vrtd };

inline std::string batch_method_name(BatchMethod m) {
    switch (m) {
        case BatchMethod::TdSvrg: return "td_svrg";
        case BatchMethod::PdSvrg: return "pd_svrg";
        case BatchMethod::Vrtd: return "vrtd";
    }
    return "unknown";
}

struct BatchComparisonRow {
    BatchMethod method = BatchMethod::TdSvrg;
    std::size_t n_states = 0;
    std::size_t n_features = 0;
    double gamma = 0.0;
    double value = 0.0; // mean theoretical batch size
    std::size_t n_seeds = 0;
};

// Means of the theoretical batch sizes over a set of (mdp, dataset)
// instances that share one recipe. The VRTD row is emitted only when an
// epsilon is supplied: its paper leaves the constant unstated, so the value
// is the non-reproducing scaling vrtd_scale / (epsilon lambda_A^2).
inline std::vector<BatchComparisonRow> batch_size_table(
    const std::vector<std::pair<const Mdp*, const Dataset*>>& instances,
    std::optional<double> epsilon = std::nullopt, double vrtd_scale = 1.0) {
    if (instances.empty()) throw MissingInput("batch_size_table: no instances");
    const Mdp& first = *instances.front().first;

    double td_sum = 0.0, pd_sum = 0.0, vrtd_sum = 0.0;
    for (const auto& [mdp, ds] : instances) {
        const FixedPointSolution sol = fixed_point(*mdp, *ds);
        td_sum += 16.0 / sol.lambda_A;
        pd_sum += pd_svrg_batch_formula(sol, empirical_feature_covariance(*mdp, *ds),
                                        lipschitz_bound(*mdp, *ds));
        if (epsilon) vrtd_sum += vrtd_scale / (*epsilon * sol.lambda_A * sol.lambda_A);
    }
    const double inv = 1.0 / static_cast<double>(instances.size());

    std::vector<BatchComparisonRow> rows;
    const std::size_t seeds = instances.size();
    rows.push_back({BatchMethod::TdSvrg, first.n_states, first.n_features(), first.gamma,
                    td_sum * inv, seeds});
    rows.push_back({BatchMethod::PdSvrg, first.n_states, first.n_features(), first.gamma,
                    pd_sum * inv, seeds});
    if (epsilon)
        rows.push_back({BatchMethod::Vrtd, first.n_states, first.n_features(), first.gamma,
                        vrtd_sum * inv, seeds});
    return rows;
}

constexpr double kLogFloor = 1e-300;

struct RateFit {
    double rate = 1.0;      // per-epoch factor; < 1 means geometric decay
    std::size_t floored = 0; // epochs whose f was clamped to the log floor
};

// Least-squares slope of log f against epoch index, exponentiated.
inline RateFit convergence_rate_fit(const RunTrace& trace, std::size_t burn_in) {
    std::vector<double> xs, ys;
    std::size_t floored = 0;
    for (const EpochRecord& rec : trace.records) {
        if (rec.epoch < burn_in) continue;
        double f = rec.f_value;
        if (f <= 0.0) {
            f = kLogFloor;
            ++floored;
        }
        xs.push_back(static_cast<double>(rec.epoch));
        ys.push_back(std::log(f));
    }
    if (xs.size() < 3)
        throw InsufficientData("convergence_rate_fit: need >= 3 post-burn-in epochs, got " +
                               std::to_string(xs.size()));
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return RateFit{std::exp(slope), floored};
}

struct AggregatePoint {
    std::size_t epoch = 0;
    double samples_used = 0.0;   // mean across runs
    double geo_f = 0.0;          // exp(mean(log f))
    double geo_dist_sq = 0.0;    // exp(mean(log dist^2))
    std::size_t floored = 0;     // values clamped at the log floor
};

inline std::vector<AggregatePoint> aggregate_geometric(const std::vector<RunTrace>& traces) {
    if (traces.empty()) throw MisalignedTraces("aggregate_geometric: no traces");
    const std::size_t n_epochs = traces.front().records.size();
    for (const RunTrace& t : traces)
        if (t.records.size() != n_epochs)
            throw MisalignedTraces("aggregate_geometric: traces have different epoch counts");

    std::vector<AggregatePoint> out(n_epochs);
    const double inv = 1.0 / static_cast<double>(traces.size());
    for (std::size_t e = 0; e < n_epochs; ++e) {
        AggregatePoint& pt = out[e];
        pt.epoch = traces.front().records[e].epoch;
        double log_f = 0.0, log_d = 0.0;
        for (const RunTrace& t : traces) {
            const EpochRecord& rec = t.records[e];
            if (rec.epoch != pt.epoch)
                throw MisalignedTraces("aggregate_geometric: epoch indices differ across traces");
            pt.samples_used += inv * static_cast<double>(rec.samples_used);
            double f = rec.f_value, d = rec.dist_sq;
            if (f <= 0.0) { f = kLogFloor; ++pt.floored; }
            if (d <= 0.0) { d = kLogFloor; ++pt.floored; }
            log_f += inv * std::log(f);
            log_d += inv * std::log(d);
        }
        pt.geo_f = std::exp(log_f);
        pt.geo_dist_sq = std::exp(log_d);
    }
    return out;
}

inline void write_batch_table(const std::vector<BatchComparisonRow>& rows,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_batch_table: cannot open " + path);
    out << "method,states,features,gamma,mean_batch,seeds\n";
    out.precision(17);
    for (const BatchComparisonRow& r : rows)
        out << batch_method_name(r.method) << "," << r.n_states << "," << r.n_features << ","
            << r.gamma << "," << r.value << "," << r.n_seeds << "\n";
    if (!out) throw IoError("write_batch_table: write failed for " + path);
}

} // namespace tdsvrg

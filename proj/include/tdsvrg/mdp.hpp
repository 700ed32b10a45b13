#pragma once

// MDP representation, random instance generation, exact fixed points
// (A, b, theta*, lambda_A, sigma^2), the objective f(theta) and its Dirichlet
// decomposition, the TD update vector, the reset transform for balanced
// dataset collection, and geometric-ergodicity profiles.

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "tdsvrg/dataset.hpp"
#include "tdsvrg/errors.hpp"
#include "tdsvrg/linalg.hpp"
#include "tdsvrg/rng.hpp"

namespace tdsvrg {

struct Mdp {
    std::size_t n_states = 0;
    Matrix P;        // n x n, row-stochastic
    Matrix rewards;  // n x n, r(s, s')
    double gamma = 0.0;
    Matrix features; // n x d, row s is phi(s)^T
    double r_max = 0.0;
    std::string id;

    std::size_t n_features() const { return features.cols(); }

    Vector phi(std::size_t s) const { return features.row(s); }

    void validate() const {
        if (gamma < 0.0 || gamma >= 1.0)
            throw InvalidDiscount("gamma must lie in [0,1), got " + std::to_string(gamma));
        check_row_stochastic(P);
        double rm = 0.0;
        for (double v : rewards.data()) rm = std::max(rm, std::abs(v));
        if (std::abs(rm - r_max) > 1e-9 * (1.0 + rm))
            throw Error("r_max inconsistent with reward table");
        for (std::size_t s = 0; s < n_states; ++s) {
            if (norm2(features.row(s)) > 1.0 + 1e-9)
                throw Error("feature row " + std::to_string(s) + " exceeds unit norm");
        }
    }
};

inline double recompute_r_max(const Matrix& rewards) {
    double rm = 0.0;
    for (double v : rewards.data()) rm = std::max(rm, std::abs(v));
    return rm;
}

// Random instance recipe: per-state action-selection probabilities drawn from
// U[0,1) and normalized, per-action random transition rows, rewards U[0,1),
// and features with one constant coordinate, globally rescaled to unit norm.
inline Mdp random_mdp(std::size_t n_states, std::size_t n_actions, std::size_t n_features,
                      double gamma, std::uint64_t seed) {
    if (gamma < 0.0 || gamma >= 1.0)
        throw InvalidDiscount("gamma must lie in [0,1), got " + std::to_string(gamma));
    if (n_states < 1 || n_features < 1 || n_actions < 1)
        throw Error("random_mdp: sizes must be positive");

    Rng rng = Rng(seed).split(static_cast<std::uint64_t>(StreamPurpose::Instance));

    Mdp mdp;
    mdp.n_states = n_states;
    mdp.gamma = gamma;
    mdp.P = Matrix(n_states, n_states);
    mdp.rewards = Matrix(n_states, n_states);
    mdp.features = Matrix(n_states, n_features);
    mdp.id = "random_mdp(s=" + std::to_string(n_states) + ",a=" + std::to_string(n_actions) +
             ",d=" + std::to_string(n_features) + ",g=" + std::to_string(gamma) +
             ",seed=" + std::to_string(seed) + ")";

    Vector action_probs(n_actions), row(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
        double wsum = 0.0;
        for (std::size_t a = 0; a < n_actions; ++a) {
            action_probs[a] = rng.uniform();
            wsum += action_probs[a];
        }
        if (wsum <= 0.0) { action_probs.assign(n_actions, 1.0); wsum = static_cast<double>(n_actions); }
        for (std::size_t a = 0; a < n_actions; ++a) {
            double rsum = 0.0;
            for (std::size_t j = 0; j < n_states; ++j) {
                row[j] = rng.uniform();
                rsum += row[j];
            }
            const double w = action_probs[a] / wsum;
            for (std::size_t j = 0; j < n_states; ++j) mdp.P(s, j) += w * row[j] / rsum;
        }
        // renormalize against accumulated rounding
        double psum = 0.0;
        for (std::size_t j = 0; j < n_states; ++j) psum += mdp.P(s, j);
        for (std::size_t j = 0; j < n_states; ++j) mdp.P(s, j) /= psum;
    }

    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t j = 0; j < n_states; ++j) mdp.rewards(s, j) = rng.uniform();
    mdp.r_max = recompute_r_max(mdp.rewards);

    double max_norm = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) {
        for (std::size_t k = 0; k + 1 < n_features; ++k) mdp.features(s, k) = rng.uniform();
        mdp.features(s, n_features - 1) = 1.0;
        max_norm = std::max(max_norm, norm2(mdp.features.row(s)));
    }
    if (max_norm > 0.0)
        for (double& v : mdp.features.data()) v /= max_norm;

    mdp.validate();
    return mdp;
}

enum class SamplingLaw { Environment, Dataset };

struct FixedPointSolution {
    Matrix A;            // d x d
    Vector b;            // d
    Vector theta_star;   // d
    double lambda_A = 0.0;
    double lambda_max = 0.0; // max eigenvalue of (A + A^T)/2, for condition numbers
    double sigma_sq = 0.0;   // E ||g_{s,s'}(theta*)||^2
    double gamma = 0.0;      // discount of the generating problem
    SamplingLaw source = SamplingLaw::Environment;

    std::size_t dim() const { return b.size(); }
};

// g_{s,s'}(theta) = (r + gamma phi(s')^T theta - phi(s)^T theta) phi(s)
inline Vector td_update(const Vector& phi_s, const Vector& phi_s2, double r, double gamma,
                        const Vector& theta) {
    if (phi_s.size() != theta.size() || phi_s2.size() != theta.size())
        throw DimensionMismatch("td_update: feature/parameter length mismatch");
    const double delta = r + gamma * dot(phi_s2, theta) - dot(phi_s, theta);
    return delta * phi_s;
}

inline Vector td_update(const Mdp& mdp, const Transition& t, const Vector& theta) {
    return td_update(mdp.phi(t.s), mdp.phi(t.s2), t.r, mdp.gamma, theta);
}

namespace detail {

inline FixedPointSolution finish_fixed_point(Matrix A, Vector b, SamplingLaw law) {
    FixedPointSolution sol;
    const std::size_t d = b.size();
    try {
        sol.theta_star = solve_linear(A, b);
    } catch (const SingularMatrix&) {
        throw SingularA("fixed_point: matrix A is singular (Assumption 1 violated)");
    }
    Matrix sym(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) sym(i, j) = 0.5 * (A(i, j) + A(j, i));
    const SymEigResult eig = sym_eigenvalues(sym);
    sol.lambda_A = eig.min();
    sol.lambda_max = eig.max();
    if (sol.lambda_A <= 0.0)
        throw NonPositiveLambda("fixed_point: lambda_A = " + std::to_string(sol.lambda_A));
    sol.A = std::move(A);
    sol.b = std::move(b);
    sol.source = law;
    return sol;
}

} // namespace detail

// Exact fixed point under the environment law mu_pi (x) P.
inline FixedPointSolution fixed_point(const Mdp& mdp) {
    const std::size_t n = mdp.n_states, d = mdp.n_features();
    const Vector mu = stationary_distribution(mdp.P);

    Matrix A(d, d);
    Vector b(d, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        const Vector phi_s = mdp.phi(s);
        Vector expected_next(d, 0.0); // E[phi(s') | s]
        double rbar = 0.0;
        for (std::size_t s2 = 0; s2 < n; ++s2) {
            const double p = mdp.P(s, s2);
            if (p == 0.0) continue;
            for (std::size_t k = 0; k < d; ++k) expected_next[k] += p * mdp.features(s2, k);
            rbar += p * mdp.rewards(s, s2);
        }
        for (std::size_t i = 0; i < d; ++i) {
            const double w = mu[s] * phi_s[i];
            for (std::size_t j = 0; j < d; ++j)
                A(i, j) += w * (phi_s[j] - mdp.gamma * expected_next[j]);
            b[i] += w * rbar;
        }
    }

    FixedPointSolution sol = detail::finish_fixed_point(std::move(A), std::move(b),
                                                        SamplingLaw::Environment);
    double sigma_sq = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const Vector phi_s = mdp.phi(s);
        const double vs = dot(phi_s, sol.theta_star);
        const double phi_norm_sq = norm2_sq(phi_s);
        for (std::size_t s2 = 0; s2 < n; ++s2) {
            const double p = mu[s] * mdp.P(s, s2);
            if (p == 0.0) continue;
            const double delta = mdp.rewards(s, s2) +
                                 mdp.gamma * dot(mdp.phi(s2), sol.theta_star) - vs;
            sigma_sq += p * delta * delta * phi_norm_sq;
        }
    }
    sol.sigma_sq = sigma_sq;
    sol.gamma = mdp.gamma;
    return sol;
}

// Empirical fixed point: uniform law over the dataset's transitions.
inline FixedPointSolution fixed_point(const Mdp& mdp, const Dataset& ds) {
    if (ds.transitions.empty()) throw EmptySource("fixed_point: empty dataset");
    const std::size_t d = mdp.n_features();
    const double inv_n = 1.0 / static_cast<double>(ds.size());

    Matrix A(d, d);
    Vector b(d, 0.0);
    for (const Transition& t : ds.transitions) {
        const Vector phi_s = mdp.phi(t.s);
        const Vector phi_s2 = mdp.phi(t.s2);
        for (std::size_t i = 0; i < d; ++i) {
            const double w = inv_n * phi_s[i];
            for (std::size_t j = 0; j < d; ++j)
                A(i, j) += w * (phi_s[j] - mdp.gamma * phi_s2[j]);
            b[i] += w * t.r;
        }
    }

    FixedPointSolution sol = detail::finish_fixed_point(std::move(A), std::move(b),
                                                        SamplingLaw::Dataset);
    double sigma_sq = 0.0;
    for (const Transition& t : ds.transitions)
        sigma_sq += inv_n * norm2_sq(td_update(mdp, t, sol.theta_star));
    sol.sigma_sq = sigma_sq;
    sol.gamma = mdp.gamma;
    return sol;
}

// f(theta) = (theta - theta*)^T A (theta - theta*)
inline double f_value(const FixedPointSolution& sol, const Vector& theta) {
    if (theta.size() != sol.dim()) throw DimensionMismatch("f_value: dimension mismatch");
    const Vector diff = theta - sol.theta_star;
    return quad_form(diff, sol.A, diff);
}

inline double dist_sq(const FixedPointSolution& sol, const Vector& theta) {
    return norm2_sq(theta - sol.theta_star);
}

struct DirichletDecomposition {
    double d_norm = 0.0;    // sum_s mu(s) (V_theta(s) - V_theta*(s))^2
    double dirichlet = 0.0; // 1/2 sum_{s,s'} mu(s)P(s,s') (dV(s) - dV(s'))^2
};

// Decomposes f_e(theta) as (1-gamma) d_norm + gamma dirichlet.
inline DirichletDecomposition dirichlet_decomposition(const Mdp& mdp,
                                                      const FixedPointSolution& sol,
                                                      const Vector& theta) {
    if (theta.size() != sol.dim())
        throw DimensionMismatch("dirichlet_decomposition: dimension mismatch");
    const Vector mu = stationary_distribution(mdp.P);
    const Vector diff = theta - sol.theta_star;
    Vector dv(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) dv[s] = dot(mdp.phi(s), diff);

    DirichletDecomposition out;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        out.d_norm += mu[s] * dv[s] * dv[s];
        for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) {
            const double p = mu[s] * mdp.P(s, s2);
            if (p == 0.0) continue;
            const double e = dv[s] - dv[s2];
            out.dirichlet += 0.5 * p * e * e;
        }
    }
    return out;
}

// Exact tabular values: V = (I - gamma P)^{-1} rbar with rbar(s) = sum_s' P(s,s') r(s,s').
inline Vector exact_values(const Mdp& mdp) {
    const std::size_t n = mdp.n_states;
    Matrix m(n, n);
    Vector rbar(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t s2 = 0; s2 < n; ++s2) {
            m(s, s2) = (s == s2 ? 1.0 : 0.0) - mdp.gamma * mdp.P(s, s2);
            rbar[s] += mdp.P(s, s2) * mdp.rewards(s, s2);
        }
    }
    return solve_linear(m, rbar);
}

struct ResetTransform {
    Mdp mdp;              // the reset MDP M' with gamma' = (1+gamma)/2
    std::size_t s0 = 0;
    double p = 0.0;       // reset probability (1-gamma)/(1+gamma)
    double kappa = 0.0;   // oracle-fitted recovery coefficient
    double fit_residual = 0.0;

    // V_M(s) = V_M'(s) + kappa * V_M'(s0)
    Vector recover(const Vector& v_reset) const {
        Vector v = v_reset;
        const double shift = kappa * v_reset[s0];
        for (double& x : v) x += shift;
        return v;
    }
};

// Appendix-style reset construction: P'(s,.) = p e_{s0} + (1-p) P(s,.), with
// the reward into s0 adjusted so each state's expected one-step reward is
// preserved. The recovery coefficient kappa is fitted against exact Bellman
// solves of both chains rather than taken from a closed form.
inline ResetTransform reset_transform(const Mdp& mdp, std::size_t s0) {
    if (mdp.gamma <= 0.0)
        throw InvalidDiscount("reset_transform requires gamma > 0");
    if (s0 >= mdp.n_states) throw Error("reset_transform: s0 out of range");

    ResetTransform rt;
    rt.s0 = s0;
    rt.p = (1.0 - mdp.gamma) / (1.0 + mdp.gamma);

    Mdp m2 = mdp;
    m2.gamma = (1.0 + mdp.gamma) / 2.0;
    m2.id = mdp.id + "+reset(s0=" + std::to_string(s0) + ")";
    const double p = rt.p;
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
        double rbar = 0.0;
        for (std::size_t j = 0; j < mdp.n_states; ++j) rbar += mdp.P(s, j) * mdp.rewards(s, j);
        const double mass_to_s0 = p + (1.0 - p) * mdp.P(s, s0);
        m2.rewards(s, s0) =
            (p * rbar + (1.0 - p) * mdp.P(s, s0) * mdp.rewards(s, s0)) / mass_to_s0;
        for (std::size_t j = 0; j < mdp.n_states; ++j) m2.P(s, j) = (1.0 - p) * mdp.P(s, j);
        m2.P(s, s0) += p;
    }
    m2.r_max = recompute_r_max(m2.rewards);
    m2.validate();
    rt.mdp = std::move(m2);

    const Vector v_orig = exact_values(mdp);
    const Vector v_reset = exact_values(rt.mdp);
    const double anchor = v_reset[s0];
    if (std::abs(anchor) > 1e-12) {
        double acc = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s) acc += v_orig[s] - v_reset[s];
        rt.kappa = acc / (static_cast<double>(mdp.n_states) * anchor);
    } else {
        rt.kappa = 0.0;
    }
    double res = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        res = std::max(res, std::abs(v_orig[s] - v_reset[s] - rt.kappa * anchor));
    rt.fit_residual = res;
    return rt;
}

struct ErgodicityProfile {
    double m_const = 1.0;
    double rho = 0.5;
    double G = 0.0;        // uniform update-norm bound r_max + 2R under ||phi|| <= 1
    double R = 0.0;
    double r_max = 0.0;
    Vector tv_curve;       // tv_curve[t] = sup_s d_TV(P^t(s,.), mu)

    // mixing time: first t >= 1 with sup-TV below alpha
    std::size_t tau_mix(double alpha) const {
        for (std::size_t t = 1; t < tv_curve.size(); ++t)
            if (tv_curve[t] <= alpha) return t;
        // extrapolate along the fitted envelope past the computed horizon
        if (rho < 1.0 && alpha > 0.0 && m_const > 0.0) {
            const double t = std::log(alpha / m_const) / std::log(rho);
            return static_cast<std::size_t>(std::max(t, 1.0)) + 1;
        }
        return tv_curve.empty() ? 1 : tv_curve.size();
    }
};

// Exact sup-TV decay curve from powers of P, plus the tightest geometric
// envelope m rho^t that dominates it.
inline ErgodicityProfile ergodicity_profile(const Mdp& mdp, double radius, std::size_t horizon) {
    const std::size_t n = mdp.n_states;
    const Vector mu = stationary_distribution(mdp.P);

    ErgodicityProfile prof;
    prof.R = radius;
    prof.r_max = mdp.r_max;
    prof.G = mdp.r_max + 2.0 * radius;
    prof.tv_curve.resize(horizon + 1, 0.0);

    Matrix pt = Matrix::identity(n);
    for (std::size_t t = 0; t <= horizon; ++t) {
        double sup_tv = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            double tv = 0.0;
            for (std::size_t j = 0; j < n; ++j) tv += std::abs(pt(s, j) - mu[j]);
            sup_tv = std::max(sup_tv, 0.5 * tv);
        }
        prof.tv_curve[t] = sup_tv;
        if (t < horizon) pt = matmul(pt, mdp.P);
    }

    bool mixed = false;
    for (std::size_t t = 1; t <= horizon; ++t)
        if (prof.tv_curve[t] < 0.5) { mixed = true; break; }
    if (!mixed && n > 1)
        throw NotMixing("ergodicity_profile: sup-TV never fell below 0.5 within horizon " +
                        std::to_string(horizon));

    double rho = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        if (prof.tv_curve[t] > 0.0)
            rho = std::max(rho, std::pow(prof.tv_curve[t], 1.0 / static_cast<double>(t)));
    }
    if (rho <= 0.0) rho = 0.5;        // chain mixes exactly in one step
    rho = std::min(rho, 0.999);       // keep the envelope geometric
    double m_const = 0.0;
    double pw = 1.0;
    for (std::size_t t = 0; t <= horizon; ++t) {
        m_const = std::max(m_const, prof.tv_curve[t] / pw);
        pw *= rho;
    }
    prof.rho = rho;
    prof.m_const = std::max(m_const, 1e-12);
    return prof;
}

} // namespace tdsvrg

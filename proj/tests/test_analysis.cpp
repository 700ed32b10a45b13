#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "support.hpp"
#include "tdsvrg/analysis.hpp"
#include "tdsvrg/sampling.hpp"

using namespace tdsvrg;
using tdsvrg::testing::flip_chain;
using tdsvrg::testing::one_state;

namespace {

RunTrace trace_from_f(const std::vector<double>& fs) {
    RunTrace t;
    for (std::size_t e = 0; e < fs.size(); ++e) {
        EpochRecord rec;
        rec.epoch = e;
        rec.f_value = fs[e];
        rec.dist_sq = fs[e];
        rec.samples_used = e;
        t.records.push_back(rec);
    }
    return t;
}

} // namespace

TEST_CASE("balanced regime constants") {
    const FixedPointSolution sol = fixed_point(flip_chain());
    const TheoreticalParams p = theoretical_parameters(sol, Regime::FiniteBalanced);
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(0.125, 1e-14));
    REQUIRE(p.M == 64);
    REQUIRE_THAT(p.alpha * static_cast<double>(p.M) * sol.lambda_A,
                 Catch::Matchers::WithinAbs(2.0, 1e-6));
}

TEST_CASE("unbalanced regime constants") {
    FixedPointSolution sol = fixed_point(flip_chain());
    sol.gamma = 0.9; // the spec arithmetic uses gamma = 0.9 with lambda = 0.25
    const TheoreticalParams p =
        theoretical_parameters(sol, Regime::FiniteUnbalanced, std::size_t(100));
    REQUIRE_THAT(p.J, Catch::Matchers::WithinAbs(0.1296, 1e-10));
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(1.0 / 8.1296, 1e-10));
    REQUIRE(p.M == 66);
}

TEST_CASE("unbalanced regime converges to balanced constants as N grows") {
    const FixedPointSolution sol = fixed_point(flip_chain());
    const TheoreticalParams p =
        theoretical_parameters(sol, Regime::FiniteUnbalanced, std::size_t(100000000));
    REQUIRE(p.J < 1e-6);
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(0.125, 1e-7));
}

TEST_CASE("iid regime constants") {
    const FixedPointSolution sol = fixed_point(flip_chain());
    const TheoreticalParams p = theoretical_parameters(sol, Regime::Iid);
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(1.0 / 16.0, 1e-14));
    REQUIRE(p.M == 128);
}

TEST_CASE("prop1 regime constants") {
    const FixedPointSolution sol = fixed_point(flip_chain());
    const TheoreticalParams p = theoretical_parameters(sol, Regime::Prop1SqNorm);
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(0.25 / 32.0, 1e-14));
    REQUIRE(p.M == 512);
}

TEST_CASE("markov regime constants") {
    const Mdp m = tdsvrg::testing::lazy_flip();
    const FixedPointSolution sol = fixed_point(m);
    const ErgodicityProfile prof = ergodicity_profile(m, 4.0, 64);
    const double eps = 0.1;
    const TheoreticalParams p =
        theoretical_parameters(sol, Regime::Markov, std::nullopt, eps, &prof);
    REQUIRE_THAT(p.alpha, Catch::Matchers::WithinAbs(eps / (16.0 * std::log(1.0 / eps)), 1e-14));
    REQUIRE(p.M == ceil_to_size(2.0 / (p.alpha * sol.lambda_A)));
    const double c2 = 4.0 * (1.0 + (prof.m_const - 1.0) * prof.rho) / (1.0 - prof.rho) *
                      (4.0 * prof.R * prof.R + prof.r_max * prof.r_max);
    REQUIRE_THAT(p.C2, Catch::Matchers::WithinAbs(c2, 1e-10));
    REQUIRE(p.n_m == ceil_to_size(8.0 * c2 / (sol.lambda_A * eps)));
}

TEST_CASE("regime-specific inputs are enforced") {
    const FixedPointSolution sol = fixed_point(flip_chain());
    REQUIRE_THROWS_AS(theoretical_parameters(sol, Regime::FiniteUnbalanced), MissingInput);
    REQUIRE_THROWS_AS(theoretical_parameters(sol, Regime::Markov), MissingInput);
    REQUIRE_THROWS_AS(theoretical_parameters(sol, Regime::Markov, std::nullopt, 0.1, nullptr),
                      MissingInput);
}

TEST_CASE("markov error bound is monotone in its knobs") {
    const Mdp m = tdsvrg::testing::lazy_flip();
    const FixedPointSolution sol = fixed_point(m);
    const ErgodicityProfile prof = ergodicity_profile(m, 4.0, 64);
    const double c2 = 100.0, f0 = 1.0;
    const double base = markov_error_bound(sol, prof, c2, f0, 3, 1000, 0.01);
    REQUIRE(markov_error_bound(sol, prof, c2, f0, 3, 2000, 0.01) < base);
    REQUIRE(markov_error_bound(sol, prof, c2, f0, 3, 1000, 0.005) < base);
}

TEST_CASE("pd_svrg formula with unit inputs") {
    FixedPointSolution sol;
    sol.A = Matrix::identity(2);
    sol.b = {0.0, 0.0};
    sol.theta_star = {0.0, 0.0};
    REQUIRE_THAT(pd_svrg_batch_formula(sol, Matrix::identity(2), 1.0),
                 Catch::Matchers::WithinAbs(51.0, 1e-10));
}

TEST_CASE("pd_svrg formula with identity features on the flip chain") {
    const Mdp m = flip_chain();
    // identity features, uniform stationary law: C = E[phi phi^T] = I/2
    const Dataset ds = sample_trajectory(m, 4, 1);
    const FixedPointSolution sol = fixed_point(m, ds);
    const Matrix c = empirical_feature_covariance(m, ds);
    REQUIRE_THAT(c(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(c(1, 1), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(c(0, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));

    const double l_g = lipschitz_bound(m, ds);
    // kappa(C) = 1, so value = 51 L^2 / lambda_min(A^T C^-1 A)^2 with an
    // independently computed eigenvalue
    Matrix q = matmul(sol.A.transpose(), sol.A);
    for (double& v : q.data()) v *= 2.0; // C^-1 = 2I
    const double lam = sym_eigenvalues(q).min();
    REQUIRE_THAT(pd_svrg_batch_formula(sol, c, l_g),
                 Catch::Matchers::WithinAbs(51.0 * l_g * l_g / (lam * lam), 1e-8));
}

TEST_CASE("pd_svrg formula rejects singular C") {
    FixedPointSolution sol;
    sol.A = Matrix::identity(2);
    Matrix c(2, 2);
    c(0, 0) = 1.0; // rank one
    REQUIRE_THROWS_AS(pd_svrg_batch_formula(sol, c, 1.0), SingularC);
}

TEST_CASE("batch table on a one-state instance gives 16 over one minus gamma") {
    const Mdp m = one_state(0.9);
    std::vector<Transition> ts(10, Transition{0, 0, 1.0});
    const Dataset ds = make_dataset(std::move(ts), m.id);
    const auto rows = batch_size_table({{&m, &ds}});
    REQUIRE(rows.size() == 2); // no epsilon, so no VRTD row
    REQUIRE(rows[0].method == BatchMethod::TdSvrg);
    REQUIRE_THAT(rows[0].value, Catch::Matchers::WithinAbs(16.0 / 0.1, 1e-8));
}

TEST_CASE("batch table TD column equals 16 over an independent lambda") {
    const Mdp m = random_mdp(12, 3, 4, 0.8, 33);
    const Dataset ds = sample_trajectory(m, 400, 2);
    const auto rows = batch_size_table({{&m, &ds}});
    const FixedPointSolution sol = fixed_point(m, ds);
    Matrix sym(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) sym(i, j) = 0.5 * (sol.A(i, j) + sol.A(j, i));
    REQUIRE_THAT(rows[0].value,
                 Catch::Matchers::WithinAbs(16.0 / sym_eigenvalues(sym).min(), 1e-8));
}

TEST_CASE("batch table emits the VRTD row only with an epsilon") {
    const Mdp m = random_mdp(8, 2, 3, 0.8, 35);
    const Dataset ds = sample_trajectory(m, 200, 1);
    REQUIRE(batch_size_table({{&m, &ds}}).size() == 2);
    const auto rows = batch_size_table({{&m, &ds}}, 0.1, 2.0);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[2].method == BatchMethod::Vrtd);
    const FixedPointSolution sol = fixed_point(m, ds);
    REQUIRE_THAT(rows[2].value,
                 Catch::Matchers::WithinAbs(2.0 / (0.1 * sol.lambda_A * sol.lambda_A), 1e-6));
}

TEST_CASE("small-instance TD batch magnitude matches the 50-state recipe") {
    std::vector<Mdp> mdps;
    std::vector<Dataset> datasets;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        mdps.push_back(random_mdp(50, 20, 6, 0.8, seed));
        datasets.push_back(sample_trajectory(mdps.back(), 2000, seed + 1));
    }
    std::vector<std::pair<const Mdp*, const Dataset*>> instances;
    for (std::size_t i = 0; i < mdps.size(); ++i) instances.emplace_back(&mdps[i], &datasets[i]);
    const auto rows = batch_size_table(instances);
    REQUIRE(rows[0].value >= 5e2);
    REQUIRE(rows[0].value <= 1e4);
    REQUIRE(rows[1].value > rows[0].value);
}

TEST_CASE("rate fit recovers an exact geometric series") {
    std::vector<double> fs;
    for (int m = 0; m < 10; ++m) fs.push_back(std::pow(4.0, -m));
    const RateFit fit = convergence_rate_fit(trace_from_f(fs), 0);
    REQUIRE_THAT(fit.rate, Catch::Matchers::WithinAbs(0.25, 1e-10));
    REQUIRE(fit.floored == 0);
}

TEST_CASE("rate fit of a constant trace is one") {
    const RateFit fit = convergence_rate_fit(trace_from_f({3.0, 3.0, 3.0, 3.0, 3.0}), 0);
    REQUIRE_THAT(fit.rate, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("rate fit needs enough epochs") {
    REQUIRE_THROWS_AS(convergence_rate_fit(trace_from_f({1.0, 0.5}), 0), InsufficientData);
    REQUIRE_THROWS_AS(convergence_rate_fit(trace_from_f({1.0, 0.5, 0.25, 0.125}), 2),
                      InsufficientData);
}

TEST_CASE("rate fit floors nonpositive values") {
    const RateFit fit = convergence_rate_fit(trace_from_f({1.0, 0.1, 0.0, 0.0}), 0);
    REQUIRE(fit.floored == 2);
}

TEST_CASE("aggregate of two traces is the geometric mean") {
    const auto agg = aggregate_geometric({trace_from_f({1.0, 1e-2}), trace_from_f({1.0, 1e-4})});
    REQUIRE(agg.size() == 2);
    REQUIRE_THAT(agg[1].geo_f, Catch::Matchers::WithinRel(1e-3, 1e-10));
}

TEST_CASE("aggregate of a single trace is itself") {
    const RunTrace t = trace_from_f({2.0, 0.5, 0.125});
    const auto agg = aggregate_geometric({t});
    for (std::size_t e = 0; e < t.records.size(); ++e)
        REQUIRE_THAT(agg[e].geo_f, Catch::Matchers::WithinRel(t.records[e].f_value, 1e-12));
}

TEST_CASE("aggregate rejects misaligned traces") {
    REQUIRE_THROWS_AS(aggregate_geometric({trace_from_f({1.0, 0.5}), trace_from_f({1.0})}),
                      MisalignedTraces);
    REQUIRE_THROWS_AS(aggregate_geometric({}), MisalignedTraces);
}

TEST_CASE("aggregate floors zero values and counts them") {
    const auto agg = aggregate_geometric({trace_from_f({1.0, 0.0})});
    REQUIRE(agg[1].floored == 2); // both f and dist_sq hit the floor
    REQUIRE_THAT(agg[1].geo_f, Catch::Matchers::WithinRel(kLogFloor, 1e-10));
}

TEST_CASE("batch table writer emits the documented header") {
    const Mdp m = one_state(0.5);
    std::vector<Transition> ts(4, Transition{0, 0, 1.0});
    const Dataset ds = make_dataset(std::move(ts), m.id);
    const auto rows = batch_size_table({{&m, &ds}});
    const std::string path = "test_batch_table.csv";
    write_batch_table(rows, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "method,states,features,gamma,mean_batch,seeds");
    in.close();
    std::remove(path.c_str());
}

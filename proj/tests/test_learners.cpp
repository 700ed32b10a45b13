#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"
#include "tdsvrg/learners.hpp"

using namespace tdsvrg;
using tdsvrg::testing::flip_chain;
using tdsvrg::testing::lazy_flip;
using tdsvrg::testing::one_state;
using tdsvrg::testing::random_theta;

namespace {

Dataset one_state_dataset(std::size_t n) {
    std::vector<Transition> ts(n, Transition{0, 0, 1.0});
    return make_dataset(std::move(ts), "one_state");
}

} // namespace

TEST_CASE("project_ball") {
    const Vector inside = project_ball({0.3, 0.4}, 1.0);
    REQUIRE(inside == Vector{0.3, 0.4});

    const Vector scaled = project_ball({3.0, 4.0}, 1.0);
    REQUIRE_THAT(scaled[0], Catch::Matchers::WithinAbs(0.6, 1e-14));
    REQUIRE_THAT(scaled[1], Catch::Matchers::WithinAbs(0.8, 1e-14));

    const Vector zero = project_ball({5.0, -2.0}, 0.0);
    REQUIRE(zero == Vector{0.0, 0.0});

    // idempotence
    const Vector twice = project_ball(scaled, 1.0);
    REQUIRE(twice == scaled);
}

TEST_CASE("step schedules") {
    LearnerConfig cfg;
    cfg.alpha = 1.0;
    cfg.alpha_schedule = StepSchedule::InvSqrtT;
    REQUIRE_THAT(detail::step_size(cfg, 4), Catch::Matchers::WithinAbs(0.5, 1e-14));
    cfg.alpha_schedule = StepSchedule::InvT;
    REQUIRE_THAT(detail::step_size(cfg, 4), Catch::Matchers::WithinAbs(0.25, 1e-14));
    cfg.alpha_schedule = StepSchedule::Constant;
    REQUIRE_THAT(detail::step_size(cfg, 4), Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("td0 scalar recursion approaches the fixed point monotonically") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Td0;
    cfg.alpha = 0.5;
    cfg.M = 1;
    cfg.epochs = 160;
    cfg.seed = 1;
    const RunTrace trace =
        run_td0(m, dataset_uniform_source(m, ds, stream_for(1, 0, StreamPurpose::InnerLoop)), cfg,
                sol);

    double theta = 0.0, prev = -1.0;
    for (const EpochRecord& rec : trace.records) {
        REQUIRE_THAT(rec.theta_tilde[0], Catch::Matchers::WithinAbs(theta, 1e-12));
        REQUIRE(rec.theta_tilde[0] > prev);
        prev = rec.theta_tilde[0];
        theta += 0.5 * (1.0 - 0.1 * theta);
    }
    REQUIRE_THAT(trace.final_theta[0], Catch::Matchers::WithinAbs(10.0, 1e-2));
}

TEST_CASE("td0 started at the fixed point of a single-transition dataset stays put") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Td0;
    cfg.alpha = 0.25;
    cfg.M = 5;
    cfg.epochs = 10;
    cfg.theta0 = sol.theta_star;
    const RunTrace trace =
        run_td0(m, dataset_uniform_source(m, ds, stream_for(2, 0, StreamPurpose::InnerLoop)), cfg,
                sol);
    for (const EpochRecord& rec : trace.records)
        REQUIRE_THAT(rec.f_value, Catch::Matchers::WithinAbs(0.0, 1e-20));
}

TEST_CASE("td0 diverges loudly under an aggressive step size") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Td0;
    cfg.alpha = 30.0;
    cfg.M = 100;
    cfg.epochs = 10;
    REQUIRE_THROWS_AS(
        run_td0(m, dataset_uniform_source(m, ds, stream_for(3, 0, StreamPurpose::InnerLoop)), cfg,
                sol),
        DivergenceDetected);
}

TEST_CASE("td_svrg inner loop is deterministic on a single-transition dataset") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgFinite;
    cfg.alpha = 0.125;
    cfg.M = 8;
    cfg.epochs = 1;
    cfg.batch_schedule = BatchSchedule::exact(ds.size());
    cfg.seed = 5;
    const RunTrace trace = run_td_svrg(m, ds, cfg, sol);

    // with zero variance v_t = g(theta_{t-1}), so the inner iterates follow
    // the scalar recursion theta_t = theta_{t-1} + alpha (1 - 0.1 theta_{t-1});
    // the snapshot must land on that trajectory (theta_1 = 0.125, ...)
    std::vector<double> path{0.0};
    for (int t = 1; t <= 8; ++t)
        path.push_back(path.back() + 0.125 * (1.0 - 0.1 * path.back()));
    REQUIRE_THAT(path[1], Catch::Matchers::WithinAbs(0.125, 1e-15));
    const double snap = trace.final_theta[0];
    bool on_path = false;
    for (double v : path)
        if (std::abs(v - snap) <= 1e-12) on_path = true;
    REQUIRE(on_path);
}

TEST_CASE("td_svrg started at theta* is absorbed") {
    const Mdp m = random_mdp(8, 2, 4, 0.85, 40);
    const Dataset ds = sample_trajectory(m, 300, 1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgFinite;
    cfg.alpha = 0.125;
    cfg.M = 32;
    cfg.epochs = 5;
    cfg.batch_schedule = BatchSchedule::exact(ds.size());
    cfg.theta0 = sol.theta_star;
    const RunTrace trace = run_td_svrg(m, ds, cfg, sol);
    for (const EpochRecord& rec : trace.records)
        REQUIRE_THAT(rec.f_value, Catch::Matchers::WithinAbs(0.0, 1e-18));
}

TEST_CASE("td_svrg converges geometrically on a balanced dataset") {
    const Mdp m = random_mdp(10, 3, 4, 0.8, 42);
    const ResetTransform rt = reset_transform(m, 0);
    const Dataset ds = sample_balanced_dataset(rt.mdp, 0, 500, 3);
    const FixedPointSolution sol = fixed_point(rt.mdp, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgFinite;
    cfg.alpha = 0.125;
    cfg.M = ceil_to_size(16.0 / sol.lambda_A);
    cfg.epochs = 10;
    cfg.batch_schedule = BatchSchedule::exact(ds.size());
    cfg.seed = 7;
    const RunTrace trace = run_td_svrg(rt.mdp, ds, cfg, sol);
    REQUIRE(trace.final_record().f_value < 0.01 * trace.records[0].f_value);
}

TEST_CASE("td_svrg sample accounting") {
    const Mdp m = random_mdp(6, 2, 3, 0.8, 44);
    const Dataset ds = sample_trajectory(m, 100, 2);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgFinite;
    cfg.alpha = 0.05;
    cfg.M = 17;
    cfg.epochs = 6;

    SECTION("exact mode consumes N + M per epoch") {
        cfg.batch_schedule = BatchSchedule::exact(ds.size());
        const RunTrace trace = run_td_svrg(m, ds, cfg, sol);
        REQUIRE(trace.records.size() == 7);
        for (std::size_t e = 0; e < trace.records.size(); ++e)
            REQUIRE(trace.records[e].samples_used == e * (ds.size() + cfg.M));
    }
    SECTION("growing schedule sums n_k + M") {
        cfg.batch_schedule = BatchSchedule::practical(1.0, ds.size());
        const RunTrace trace = run_td_svrg(m, ds, cfg, sol);
        std::size_t expect = 0;
        for (std::size_t e = 1; e < trace.records.size(); ++e) {
            const std::size_t n_k =
                estimation_batch_size(cfg.batch_schedule, e, sol.lambda_A, m.r_max,
                                      trace.records[e - 1].theta_tilde);
            expect += std::min(n_k, ds.size()) + cfg.M;
            REQUIRE(trace.records[e].samples_used == expect);
        }
    }
}

TEST_CASE("td_svrg trace invariants") {
    const Mdp m = random_mdp(6, 2, 3, 0.8, 44);
    const Dataset ds = sample_trajectory(m, 100, 2);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgFinite;
    cfg.alpha = 0.1;
    cfg.M = 8;
    cfg.batch_schedule = BatchSchedule::exact(ds.size());

    SECTION("record count is epochs + 1") {
        cfg.epochs = 9;
        const RunTrace trace = run_td_svrg(m, ds, cfg, sol);
        REQUIRE(trace.records.size() == 10);
        for (std::size_t e = 1; e < trace.records.size(); ++e) {
            REQUIRE(trace.records[e].samples_used > trace.records[e - 1].samples_used);
            REQUIRE(trace.records[e].f_value >= 0.0);
        }
    }
    SECTION("epochs = 0 leaves only the initialization record") {
        cfg.epochs = 0;
        const RunTrace trace = run_td_svrg(m, ds, cfg, sol);
        REQUIRE(trace.records.size() == 1);
        REQUIRE(trace.records[0].epoch == 0);
    }
}

TEST_CASE("control variate is unbiased by full enumeration") {
    const Mdp m = random_mdp(8, 2, 4, 0.85, 47);
    const Dataset ds = sample_trajectory(m, 200, 6);
    Rng rng(81);
    const Vector theta = random_theta(4, 4.0, rng);
    const Vector anchor = random_theta(4, 4.0, rng);

    const Vector g_bar_anchor = mean_path_update(m, ds, anchor);
    // conditional mean of v_t over a uniformly drawn transition
    Vector mean_v(4, 0.0);
    for (const Transition& t : ds.transitions) {
        Vector v = td_update(m, t, theta);
        axpy(-1.0, td_update(m, t, anchor), v);
        axpy(1.0, g_bar_anchor, v);
        axpy(1.0 / static_cast<double>(ds.size()), v, mean_v);
    }
    const Vector g_bar_theta = mean_path_update(m, ds, theta);
    REQUIRE(norm_inf(mean_v - g_bar_theta) <= 1e-12);
}

TEST_CASE("iid td_svrg decreases f under the theoretical schedule") {
    const Mdp m = random_mdp(10, 3, 4, 0.8, 50);
    const FixedPointSolution sol = fixed_point(m);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgIid;
    cfg.alpha = 1.0 / 16.0;
    cfg.M = ceil_to_size(32.0 / sol.lambda_A);
    cfg.epochs = 8;
    cfg.batch_schedule = BatchSchedule::theoretical(1.0);
    cfg.seed = 3;
    const RunTrace trace = run_td_svrg_iid(m, cfg, sol);
    REQUIRE(trace.final_record().f_value < 0.1 * trace.records[0].f_value);
    for (std::size_t e = 1; e < trace.records.size(); ++e)
        REQUIRE(trace.records[e].est_err_norm.has_value());
}

TEST_CASE("iid td_svrg rejects the exact schedule") {
    const Mdp m = lazy_flip();
    const FixedPointSolution sol = fixed_point(m);
    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgIid;
    cfg.batch_schedule = BatchSchedule::exact(100);
    REQUIRE_THROWS_AS(run_td_svrg_iid(m, cfg, sol), MissingOracle);
}

TEST_CASE("markov td_svrg on the one-state chain converges to theta*") {
    const Mdp m = one_state(0.9);
    const FixedPointSolution sol = fixed_point(m);
    const ErgodicityProfile prof = ergodicity_profile(m, 12.0, 16);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgMarkov;
    cfg.alpha = 0.125;
    cfg.M = 64;
    cfg.epochs = 10;
    cfg.batch_schedule = BatchSchedule::fixed(16);
    cfg.R = 12.0;
    cfg.seed = 9;
    const RunTrace trace = run_td_svrg_markov(m, cfg, sol, prof);
    REQUIRE(norm2(trace.final_theta) <= cfg.R + 1e-12);
    REQUIRE_THAT(trace.final_theta[0], Catch::Matchers::WithinAbs(10.0, 0.5));
}

TEST_CASE("markov td_svrg started at theta* is absorbed") {
    const Mdp m = one_state(0.9);
    const FixedPointSolution sol = fixed_point(m);
    const ErgodicityProfile prof = ergodicity_profile(m, 12.0, 16);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgMarkov;
    cfg.alpha = 0.125;
    cfg.M = 16;
    cfg.epochs = 5;
    cfg.batch_schedule = BatchSchedule::fixed(8);
    cfg.R = 12.0;
    cfg.theta0 = sol.theta_star;
    const RunTrace trace = run_td_svrg_markov(m, cfg, sol, prof);
    for (const EpochRecord& rec : trace.records)
        REQUIRE_THAT(rec.f_value, Catch::Matchers::WithinAbs(0.0, 1e-18));
}

TEST_CASE("markov td_svrg validates the projection radius") {
    const Mdp m = one_state(0.9);
    const FixedPointSolution sol = fixed_point(m);
    const ErgodicityProfile prof = ergodicity_profile(m, 5.0, 16);
    LearnerConfig cfg;
    cfg.algorithm = Algorithm::TdSvrgMarkov;
    cfg.R = 5.0; // ||theta*|| = 10
    REQUIRE_THROWS_AS(run_td_svrg_markov(m, cfg, sol, prof), InvalidRadius);
}

TEST_CASE("gtd2 updates vanish in expectation at the fixed point") {
    const Mdp m = random_mdp(8, 2, 4, 0.85, 52);
    const ResetTransform rt = reset_transform(m, 0);
    const Dataset ds = sample_balanced_dataset(rt.mdp, 0, 400, 5);
    const FixedPointSolution sol = fixed_point(rt.mdp, ds);

    // with theta = theta* and w = 0: mean w update is beta * mean(delta phi) =
    // beta * g_bar(theta*) = 0; the theta update carries the factor phi^T w = 0
    const Vector mean_delta_phi = mean_path_update(rt.mdp, ds, sol.theta_star);
    REQUIRE(norm_inf(mean_delta_phi) <= 1e-10);
}

TEST_CASE("gtd2 first scalar step uses the pre-update w") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Gtd2;
    cfg.alpha = 0.25;
    cfg.beta = 0.5;
    cfg.M = 1;
    cfg.epochs = 1;
    const RunTrace trace =
        run_gtd2(m, dataset_uniform_source(m, ds, stream_for(4, 0, StreamPurpose::InnerLoop)), cfg,
                 sol);
    // step 1 from (theta, w) = (0, 0): phi^T w = 0, so theta stays at 0 while
    // w absorbs beta * delta = 0.5
    REQUIRE_THAT(trace.final_theta[0], Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("gtd2 converges on a dataset with a reasonable grid cell") {
    const Mdp m = random_mdp(10, 3, 4, 0.8, 55);
    const Dataset ds = sample_trajectory(m, 1000, 3);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Gtd2;
    cfg.alpha = 0.25;
    cfg.beta = 0.5;
    cfg.M = 2000;
    cfg.epochs = 10;
    cfg.seed = 6;
    const RunTrace trace = run_gtd2(
        m, dataset_uniform_source(m, ds, stream_for(cfg.seed, 0, StreamPurpose::InnerLoop)), cfg,
        sol);
    REQUIRE(trace.final_record().f_value < trace.records[0].f_value);
}

TEST_CASE("vrtd on a zero-variance source matches exact td_svrg") {
    const Mdp m = one_state(0.9);
    const Dataset ds = one_state_dataset(1);
    const FixedPointSolution sol = fixed_point(m, ds);

    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Vrtd;
    cfg.alpha = 0.1;
    cfg.M = 16;
    cfg.epochs = 6;
    cfg.seed = 12;
    const RunTrace vrtd = run_vrtd(m, cfg, sol);

    LearnerConfig cfg2 = cfg;
    cfg2.algorithm = Algorithm::TdSvrgFinite;
    cfg2.batch_schedule = BatchSchedule::exact(ds.size());
    const RunTrace svrg = run_td_svrg(m, ds, cfg2, sol);

    REQUIRE(vrtd.records.size() == svrg.records.size());
    for (std::size_t e = 0; e < vrtd.records.size(); ++e)
        REQUIRE_THAT(vrtd.records[e].theta_tilde[0],
                     Catch::Matchers::WithinAbs(svrg.records[e].theta_tilde[0], 1e-12));
}

TEST_CASE("vrtd started at theta* with exact estimation is constant") {
    const Mdp m = one_state(0.9); // zero variance makes every estimate exact
    const FixedPointSolution sol = fixed_point(m);
    LearnerConfig cfg;
    cfg.algorithm = Algorithm::Vrtd;
    cfg.alpha = 0.1;
    cfg.M = 32;
    cfg.epochs = 5;
    cfg.theta0 = sol.theta_star;
    const RunTrace trace = run_vrtd(m, cfg, sol);
    for (const EpochRecord& rec : trace.records)
        REQUIRE_THAT(rec.f_value, Catch::Matchers::WithinAbs(0.0, 1e-18));
}

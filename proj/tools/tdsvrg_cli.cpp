// Command-line harness: generate instances, solve fixed points, run seeded
// experiment grids, compare theoretical batch sizes, and emit plot-ready
// series from trace directories.
//
// Exit codes: 0 ok, 1 partial failure (some runs failed), 2 invalid input.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tdsvrg/analysis.hpp"
#include "tdsvrg/io.hpp"
#include "tdsvrg/learners.hpp"
#include "tdsvrg/sampling.hpp"

namespace fs = std::filesystem;
using namespace tdsvrg;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("TDSVRG_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

std::uint64_t derive_run_seed(std::uint64_t master, std::size_t cell, std::size_t run) {
    return stream_for(master, cell, StreamPurpose::Instance).split(run).next_u64();
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const std::string& f : split_fields(s, ',')) {
        try {
            out.push_back(std::stod(trim(f)));
        } catch (const std::invalid_argument&) {
            throw ConfigError("expected a comma-separated list of numbers, got '" + s + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

Algorithm parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::Td0, Algorithm::TdSvrgFinite, Algorithm::TdSvrgBatched,
                        Algorithm::TdSvrgIid, Algorithm::TdSvrgMarkov, Algorithm::Gtd2,
                        Algorithm::Vrtd})
        if (algorithm_name(a) == name) return a;
    throw ConfigError("unknown algorithm '" + name + "'");
}

StepSchedule parse_step_schedule(const std::string& name) {
    if (name == "constant") return StepSchedule::Constant;
    if (name == "inv_sqrt_t") return StepSchedule::InvSqrtT;
    if (name == "inv_t") return StepSchedule::InvT;
    throw ConfigError("unknown alpha_schedule '" + name + "'");
}

BatchSchedule parse_batch(const std::string& s, std::optional<std::size_t> cap) {
    const std::size_t colon = s.find(':');
    const std::string mode = s.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (mode == "exact") {
        if (!cap) throw ConfigError("batch = exact requires a finite dataset");
        return BatchSchedule::exact(*cap);
    }
    if (mode == "fixed") {
        if (arg.empty()) throw ConfigError("batch = fixed:<size> requires a size");
        return BatchSchedule::fixed(static_cast<std::size_t>(std::stoull(arg)));
    }
    if (mode == "theoretical") return BatchSchedule::theoretical(arg.empty() ? 1.0 : std::stod(arg), cap);
    if (mode == "practical") return BatchSchedule::practical(arg.empty() ? 1.0 : std::stod(arg), cap);
    throw ConfigError("unknown batch schedule '" + s + "'");
}

// ---------------------------------------------------------------- generate --

int cmd_generate(std::size_t states, std::size_t actions, std::size_t features, double gamma,
                 std::size_t n, std::uint64_t seed, const std::string& out,
                 const std::string& feature_file) {
    fs::create_directories(out);
    Mdp mdp = random_mdp(states, actions, features, gamma, seed);
    double rescale = 1.0;
    if (!feature_file.empty()) {
        FeatureLoad fl = load_features(feature_file);
        if (fl.features.rows() != states)
            throw ConfigError("feature file has " + std::to_string(fl.features.rows()) +
                              " rows, expected " + std::to_string(states));
        mdp.features = fl.features;
        rescale = fl.rescale_factor;
    }
    save_mdp(mdp, out + "/mdp");

    std::vector<std::pair<std::string, std::string>> manifest;
    manifest.emplace_back("seed", std::to_string(seed));
    manifest.emplace_back("states", std::to_string(states));
    manifest.emplace_back("actions", std::to_string(actions));
    manifest.emplace_back("features", std::to_string(features));
    manifest.emplace_back("gamma", format_double(gamma));
    manifest.emplace_back("n", std::to_string(n));
    manifest.emplace_back("feature_rescale_factor", format_double(rescale));

    try {
        const FixedPointSolution sol = fixed_point(mdp);
        manifest.emplace_back("lambda_A", format_double(sol.lambda_A));
        manifest.emplace_back("theta_star", format_vector(sol.theta_star));
        manifest.emplace_back("sigma_sq", format_double(sol.sigma_sq));
    } catch (const SingularA& e) {
        manifest.emplace_back("solve_error", e.what());
    } catch (const NonPositiveLambda& e) {
        manifest.emplace_back("solve_error", e.what());
    }

    const Dataset markov = sample_trajectory(mdp, n, seed);
    save_dataset(markov, out + "/dataset_markov.csv");
    manifest.emplace_back("dataset_markov_size", std::to_string(markov.size()));

    const ResetTransform rt = reset_transform(mdp, 0);
    save_mdp(rt.mdp, out + "/mdp_reset");
    manifest.emplace_back("reset_p", format_double(rt.p));
    manifest.emplace_back("reset_kappa", format_double(rt.kappa));
    const Dataset balanced = sample_balanced_dataset(rt.mdp, 0, n, seed);
    save_dataset(balanced, out + "/dataset_balanced.csv");
    manifest.emplace_back("dataset_balanced_size", std::to_string(balanced.size()));
    manifest.emplace_back("dataset_balanced_is_balanced", balanced.balanced ? "true" : "false");

    write_manifest(out + "/manifest.txt", manifest);
    std::cout << "generated instance in " << out << "\n";
    return 0;
}

// ------------------------------------------------------------------- solve --

int cmd_solve(const std::string& mdp_dir, const std::string& dataset_path,
              const std::string& out_file) {
    const Mdp mdp = load_mdp(mdp_dir);
    FixedPointSolution sol;
    if (dataset_path.empty()) {
        sol = fixed_point(mdp);
    } else {
        const Dataset ds = load_dataset(dataset_path, mdp.id);
        sol = fixed_point(mdp, ds);
    }
    std::vector<std::pair<std::string, std::string>> entries;
    entries.emplace_back("source",
                         sol.source == SamplingLaw::Environment ? "environment" : "dataset");
    entries.emplace_back("gamma", format_double(sol.gamma));
    entries.emplace_back("theta_star", format_vector(sol.theta_star));
    entries.emplace_back("lambda_A", format_double(sol.lambda_A));
    entries.emplace_back("lambda_max", format_double(sol.lambda_max));
    entries.emplace_back("sigma_sq", format_double(sol.sigma_sq));
    if (!out_file.empty()) write_manifest(out_file, entries);
    for (const auto& [k, v] : entries) std::cout << k << " = " << v << "\n";
    return 0;
}

// --------------------------------------------------------------------- run --

struct RunCell {
    LearnerConfig base;
    std::string label; // algorithm plus cell index, used in file names
};

struct RunTask {
    std::size_t cell = 0;
    std::size_t run = 0;
    std::uint64_t seed = 0;
};

struct RunResult {
    bool ok = false;
    std::string error;
    RunTrace trace;
};

struct Experiment {
    Mdp mdp;
    std::optional<Dataset> dataset;
    std::string setting; // finite | iid | markov
    std::size_t n_runs = 1;
    std::uint64_t master_seed = 0;
    std::string output_dir;
    std::size_t profile_horizon = 256;
};

RunTrace execute_one(const Experiment& ex, const FixedPointSolution& oracle,
                     const ErgodicityProfile* profile, LearnerConfig cfg) {
    const Mdp& mdp = ex.mdp;
    switch (cfg.algorithm) {
        case Algorithm::TdSvrgFinite:
        case Algorithm::TdSvrgBatched:
            if (!ex.dataset) throw ConfigError("td_svrg requires setting = finite with a dataset");
            return run_td_svrg(mdp, *ex.dataset, cfg, oracle);
        case Algorithm::TdSvrgIid:
            return run_td_svrg_iid(mdp, cfg, oracle);
        case Algorithm::TdSvrgMarkov:
            if (!profile) throw ConfigError("td_svrg_markov requires setting = markov");
            return run_td_svrg_markov(mdp, cfg, oracle, *profile);
        case Algorithm::Vrtd:
            return run_vrtd(mdp, cfg, oracle);
        case Algorithm::Td0:
        case Algorithm::Gtd2: {
            TransitionSource source;
            if (ex.setting == "finite") {
                if (!ex.dataset) throw ConfigError("finite setting requires a dataset");
                source = dataset_uniform_source(
                    mdp, *ex.dataset, stream_for(cfg.seed, 0, StreamPurpose::InnerLoop));
            } else if (ex.setting == "iid") {
                source = [stream = std::make_shared<IidStream>(
                              mdp, stream_for(cfg.seed, 0, StreamPurpose::Trajectory))]() {
                    return stream->next();
                };
            } else {
                source = [stream = std::make_shared<MarkovStream>(
                              mdp, stream_for(cfg.seed, 0, StreamPurpose::Trajectory))]() {
                    return stream->next();
                };
            }
            return cfg.algorithm == Algorithm::Td0 ? run_td0(mdp, source, cfg, oracle)
                                                  : run_gtd2(mdp, source, cfg, oracle);
        }
    }
    throw ConfigError("unhandled algorithm");
}

std::vector<RunCell> expand_learner_grid(const std::vector<ConfigSection>& sections,
                                         std::optional<std::size_t> dataset_size) {
    std::vector<RunCell> cells;
    for (const ConfigSection& sec : sections) {
        if (sec.name != "learner") continue;
        LearnerConfig base;
        base.algorithm = parse_algorithm(sec.get("algorithm"));
        base.alpha_schedule = parse_step_schedule(sec.get_or("alpha_schedule", "constant"));
        base.M = sec.get_size_or("M", 1);
        base.epochs = sec.get_size_or("epochs", 10);
        base.batch_schedule = parse_batch(sec.get_or("batch", "fixed:1"), dataset_size);
        base.R = sec.get_double_or("R", 0.0);

        const std::vector<double> alphas = parse_double_list(sec.get("alpha"));
        const std::vector<double> betas =
            sec.has("beta") ? parse_double_list(sec.get("beta")) : std::vector<double>{0.0};
        for (double a : alphas)
            for (double b : betas) {
                RunCell cell;
                cell.base = base;
                cell.base.alpha = a;
                cell.base.beta = b;
                std::ostringstream label;
                label << algorithm_name(base.algorithm) << "_cell" << cells.size();
                cell.label = label.str();
                cells.push_back(std::move(cell));
            }
    }
    if (cells.empty()) throw ConfigError("config has no [learner] section");
    return cells;
}

int cmd_run(const std::string& config_path, std::size_t jobs) {
    const std::vector<ConfigSection> sections = parse_config_file(config_path);
    const ConfigSection* exp_sec = nullptr;
    for (const ConfigSection& s : sections)
        if (s.name == "experiment") exp_sec = &s;
    if (!exp_sec) throw ConfigError("config has no [experiment] section");

    Experiment ex;
    ex.mdp = load_mdp(exp_sec->get("mdp_dir"));
    ex.setting = exp_sec->get_or("setting", "finite");
    if (ex.setting != "finite" && ex.setting != "iid" && ex.setting != "markov")
        throw ConfigError("setting must be finite, iid or markov");
    if (exp_sec->has("dataset"))
        ex.dataset = load_dataset(exp_sec->get("dataset"), ex.mdp.id);
    if (ex.setting == "finite" && !ex.dataset)
        throw ConfigError("finite setting requires dataset = <path>");
    ex.n_runs = exp_sec->get_size_or("n_runs", 1);
    if (ex.n_runs < 1) throw ConfigError("n_runs must be >= 1");
    ex.master_seed = exp_sec->get_size_or("master_seed", 0);
    ex.output_dir = exp_sec->get_or("output_dir", default_out_dir());
    ex.profile_horizon = exp_sec->get_size_or("profile_horizon", 256);
    fs::create_directories(ex.output_dir);

    const FixedPointSolution oracle =
        ex.setting == "finite" ? fixed_point(ex.mdp, *ex.dataset) : fixed_point(ex.mdp);

    std::optional<std::size_t> ds_size;
    if (ex.dataset) ds_size = ex.dataset->size();
    std::vector<RunCell> cells = expand_learner_grid(sections, ds_size);

    std::optional<ErgodicityProfile> profile;
    for (const RunCell& c : cells)
        if (c.base.algorithm == Algorithm::TdSvrgMarkov && !profile)
            profile = ergodicity_profile(ex.mdp, c.base.R, ex.profile_horizon);

    std::vector<RunTask> tasks;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (std::size_t r = 0; r < ex.n_runs; ++r)
            tasks.push_back({c, r, derive_run_seed(ex.master_seed, c, r)});

    // results land in a preallocated slot per task, so output is canonical
    // regardless of which worker finishes first
    std::vector<RunResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const RunTask& task = tasks[i];
            LearnerConfig cfg = cells[task.cell].base;
            cfg.seed = task.seed;
            RunResult& res = results[i];
            try {
                res.trace = execute_one(ex, oracle, profile ? &*profile : nullptr, cfg);
                res.ok = true;
            } catch (const std::exception& e) {
                res.error = e.what();
            }
        }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    if (jobs <= 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < std::min(jobs, tasks.size()); ++j) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::size_t failures = 0;
    std::ofstream summary(ex.output_dir + "/summary.txt");
    if (!summary) throw IoError("cannot open " + ex.output_dir + "/summary.txt");
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const RunCell& cell = cells[c];
        const std::string alg = algorithm_name(cell.base.algorithm);
        std::vector<RunTrace> ok_traces;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].cell != c) continue;
            const RunResult& res = results[i];
            if (!res.ok) {
                ++failures;
                summary << cell.label << " run " << tasks[i].run << " FAILED: " << res.error
                        << "\n";
                continue;
            }
            std::ostringstream name;
            name << "trace_" << cell.label << "_run" << tasks[i].run << ".csv";
            write_trace_csv(res.trace, alg, tasks[i].seed, ex.output_dir + "/" + name.str());
            ok_traces.push_back(res.trace);
        }
        summary << cell.label << ": algorithm = " << alg << ", alpha = "
                << format_double(cell.base.alpha) << ", beta = " << format_double(cell.base.beta)
                << ", M = " << cell.base.M << ", runs_ok = " << ok_traces.size() << "/"
                << ex.n_runs << "\n";
        if (ok_traces.empty()) continue;

        const std::vector<AggregatePoint> agg = aggregate_geometric(ok_traces);
        std::ofstream agg_out(ex.output_dir + "/aggregate_" + cell.label + ".csv");
        agg_out << "epoch,samples_used,geo_f,geo_dist_sq,floored\n";
        for (const AggregatePoint& pt : agg)
            agg_out << pt.epoch << "," << format_double(pt.samples_used) << ","
                    << format_double(pt.geo_f) << "," << format_double(pt.geo_dist_sq) << ","
                    << pt.floored << "\n";

        if (agg.size() >= 4) {
            RunTrace pseudo;
            for (const AggregatePoint& pt : agg) {
                EpochRecord rec;
                rec.epoch = pt.epoch;
                rec.f_value = pt.geo_f;
                rec.dist_sq = pt.geo_dist_sq;
                pseudo.records.push_back(rec);
            }
            const RateFit fit = convergence_rate_fit(pseudo, 1);
            summary << cell.label << ": fitted_rate = " << format_double(fit.rate) << "\n";
        }
    }
    summary.close();
    std::cout << "wrote traces to " << ex.output_dir << " (" << failures << " failed runs)\n";
    return failures == 0 ? 0 : 1;
}

// --------------------------------------------------------------- compare --

int cmd_compare_batches(const std::string& recipes_arg, const std::string& features_arg,
                        std::size_t seeds, std::size_t n, std::optional<double> epsilon,
                        double vrtd_scale, const std::string& out) {
    struct Recipe { std::size_t states, actions; double gamma; };
    std::vector<Recipe> recipes;
    for (const std::string& r : split_fields(recipes_arg, ';')) {
        const std::vector<std::string> f = split_fields(r, ':');
        if (f.size() != 3) throw ConfigError("recipe must be states:actions:gamma, got '" + r + "'");
        recipes.push_back({static_cast<std::size_t>(std::stoull(f[0])),
                           static_cast<std::size_t>(std::stoull(f[1])), std::stod(f[2])});
    }
    std::vector<std::size_t> dims;
    for (const std::string& d : split_fields(features_arg, ','))
        dims.push_back(static_cast<std::size_t>(std::stoull(d)));
    if (seeds < 1) throw ConfigError("--seeds must be >= 1");

    std::vector<BatchComparisonRow> all_rows;
    for (const Recipe& rec : recipes) {
        for (std::size_t d : dims) {
            std::vector<Mdp> mdps;
            std::vector<Dataset> datasets;
            mdps.reserve(seeds);
            datasets.reserve(seeds);
            for (std::size_t s = 0; s < seeds; ++s) {
                mdps.push_back(random_mdp(rec.states, rec.actions, d, rec.gamma,
                                          derive_run_seed(7, dims.size() * s + d, 0)));
                datasets.push_back(sample_trajectory(mdps.back(), n, s + 1));
            }
            std::vector<std::pair<const Mdp*, const Dataset*>> instances;
            for (std::size_t s = 0; s < seeds; ++s)
                instances.emplace_back(&mdps[s], &datasets[s]);
            try {
                const auto rows = batch_size_table(instances, epsilon, vrtd_scale);
                all_rows.insert(all_rows.end(), rows.begin(), rows.end());
            } catch (const Error& e) {
                std::cerr << "recipe " << rec.states << " states, d = " << d
                          << " failed: " << e.what() << "\n";
            }
        }
    }
    write_batch_table(all_rows, out);
    std::cout << "wrote " << all_rows.size() << " rows to " << out << "\n";
    return 0;
}

// -------------------------------------------------------------- plotdata --

int cmd_plotdata(const std::string& trace_dir, const std::string& out_dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && entry.path().extension() == ".csv")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no trace_*.csv files in " + trace_dir);

    std::map<std::string, std::vector<std::vector<TraceRow>>> by_algorithm;
    for (const std::string& f : files) {
        std::vector<TraceRow> rows = read_trace_csv(f);
        if (rows.empty()) continue;
        by_algorithm[rows.front().algorithm].push_back(std::move(rows));
    }

    fs::create_directories(out_dir);
    for (const auto& [alg, runs] : by_algorithm) {
        const std::size_t n_epochs = runs.front().size();
        for (const auto& run : runs)
            if (run.size() != n_epochs)
                throw MisalignedTraces("plotdata: trace lengths differ for " + alg);

        std::ofstream f_out(out_dir + "/fig_" + alg + "_log_f.csv");
        std::ofstream d_out(out_dir + "/fig_" + alg + "_log_dist.csv");
        if (!f_out || !d_out) throw IoError("plotdata: cannot open output in " + out_dir);
        f_out << "samples_used,log10_f,floored\n";
        d_out << "samples_used,half_log10_dist_sq,floored\n";
        const double inv = 1.0 / static_cast<double>(runs.size());
        for (std::size_t e = 0; e < n_epochs; ++e) {
            double samples = 0.0, log_f = 0.0, log_d = 0.0;
            std::size_t floored = 0;
            for (const auto& run : runs) {
                if (run[e].epoch != runs.front()[e].epoch)
                    throw MisalignedTraces("plotdata: epoch mismatch for " + alg);
                samples += inv * static_cast<double>(run[e].samples_used);
                double fv = run[e].f_value, dv = run[e].dist_sq;
                if (fv <= 0.0) { fv = kLogFloor; ++floored; }
                if (dv <= 0.0) { dv = kLogFloor; ++floored; }
                log_f += inv * std::log10(fv);
                log_d += inv * std::log10(dv);
            }
            f_out << format_double(samples) << "," << format_double(log_f) << "," << floored
                  << "\n";
            d_out << format_double(samples) << "," << format_double(0.5 * log_d) << "," << floored
                  << "\n";
        }
    }
    std::cout << "wrote series for " << by_algorithm.size() << " algorithms to " << out_dir
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TD policy evaluation with variance reduction: experiment harness"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a random MDP instance with datasets");
    std::size_t g_states = 400, g_actions = 10, g_features = 21, g_n = 5000;
    double g_gamma = 0.95;
    std::uint64_t g_seed = 0;
    std::string g_out = default_out_dir(), g_feature_file;
    gen->add_option("--states", g_states, "number of states")->required();
    gen->add_option("--actions", g_actions, "number of actions");
    gen->add_option("--features", g_features, "feature dimension (includes constant)");
    gen->add_option("--gamma", g_gamma, "discount factor");
    gen->add_option("--n", g_n, "dataset size (balanced dataset: minimum length)");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--out", g_out, "output directory");
    gen->add_option("--feature-file", g_feature_file, "delimited feature matrix to ingest");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve the TD fixed point of an instance");
    std::string s_mdp, s_dataset, s_out;
    solve->add_option("--mdp", s_mdp, "MDP directory")->required();
    solve->add_option("--dataset", s_dataset, "dataset CSV (empirical law; omit for environment)");
    solve->add_option("--out", s_out, "write the solution to this file");

    // run
    auto* run = app.add_subcommand("run", "Run a seeded experiment described by a config file");
    std::string r_config;
    std::size_t r_jobs = 0;
    run->add_option("--config", r_config, "config file")->required();
    run->add_option("--jobs", r_jobs, "max concurrent runs (0 = hardware parallelism)");

    // compare-batches
    auto* cmp = app.add_subcommand("compare-batches", "Tabulate theoretical batch sizes");
    std::string c_recipes = "50:20:0.8;400:10:0.95;1000:20:0.99";
    std::string c_features = "6,11,21,41";
    std::size_t c_seeds = 10, c_n = 5000;
    double c_epsilon = 0.0, c_vrtd_scale = 1.0;
    std::string c_out = default_out_dir() + "/batch_table.csv";
    cmp->add_option("--recipes", c_recipes, "semicolon list of states:actions:gamma");
    cmp->add_option("--features", c_features, "comma list of feature dimensions");
    cmp->add_option("--seeds", c_seeds, "instances per cell");
    cmp->add_option("--n", c_n, "dataset size per instance");
    cmp->add_option("--epsilon", c_epsilon,
                    "target accuracy; enables the (non-reproducing) VRTD column");
    cmp->add_option("--vrtd-scale", c_vrtd_scale, "user constant for the VRTD O(1/(eps*lambda^2)) row");
    cmp->add_option("--out", c_out, "output table path");

    // plotdata
    auto* plot = app.add_subcommand("plotdata", "Emit plot-ready series from a trace directory");
    std::string p_traces, p_out = default_out_dir();
    plot->add_option("--traces", p_traces, "directory of trace_*.csv files")->required();
    plot->add_option("--out", p_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_generate(g_states, g_actions, g_features, g_gamma, g_n, g_seed, g_out,
                                g_feature_file);
        if (solve->parsed()) return cmd_solve(s_mdp, s_dataset, s_out);
        if (run->parsed()) return cmd_run(r_config, r_jobs);
        if (cmp->parsed())
            return cmd_compare_batches(c_recipes, c_features, c_seeds, c_n,
                                       c_epsilon > 0.0 ? std::optional<double>(c_epsilon)
                                                       : std::nullopt,
                                       c_vrtd_scale, c_out);
        if (plot->parsed()) return cmd_plotdata(p_traces, p_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

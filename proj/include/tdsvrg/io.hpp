#pragma once

// File formats: trace CSVs, flat key = value config files, delimited
// matrices, MDP directories, and feature-matrix ingestion.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tdsvrg/errors.hpp"
#include "tdsvrg/learners.hpp"
#include "tdsvrg/mdp.hpp"

namespace tdsvrg {

// All floats are serialized at 17 significant digits so repeated runs can be
// compared byte for byte.
constexpr int kFloatDigits = 17;

inline std::string format_double(double x) {
    std::ostringstream ss;
    ss.precision(kFloatDigits);
    ss << x;
    return ss.str();
}

// --- trace CSV ----------------------------------------------------------------

inline const char* kTraceHeader = "algorithm,seed,epoch,samples_used,f_value,dist_sq,est_err_norm";

struct TraceRow {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
    std::size_t samples_used = 0;
    double f_value = 0.0;
    double dist_sq = 0.0;
    std::optional<double> est_err_norm;
};

inline void write_trace_csv(const RunTrace& trace, const std::string& algorithm,
                            std::uint64_t seed, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_trace_csv: cannot open " + path);
    out << kTraceHeader << "\n";
    for (const EpochRecord& rec : trace.records) {
        out << algorithm << "," << seed << "," << rec.epoch << "," << rec.samples_used << ","
            << format_double(rec.f_value) << "," << format_double(rec.dist_sq) << ",";
        if (rec.est_err_norm) out << format_double(*rec.est_err_norm);
        out << "\n";
    }
    if (!out) throw IoError("write_trace_csv: write failed for " + path);
}

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

inline std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_trace_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw IoError("read_trace_csv: bad header in " + path);
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split_fields(line, ',');
        if (f.size() != 7) throw IoError("read_trace_csv: malformed row in " + path);
        TraceRow r;
        r.algorithm = f[0];
        r.seed = std::stoull(f[1]);
        r.epoch = std::stoull(f[2]);
        r.samples_used = std::stoull(f[3]);
        r.f_value = std::stod(f[4]);
        r.dist_sq = std::stod(f[5]);
        if (!f[6].empty()) r.est_err_norm = std::stod(f[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// --- flat key = value config --------------------------------------------------

// Sections open with [name]; the same section name may repeat (e.g. several
// [learner] blocks). Lines starting with # are comments.
struct ConfigSection {
    std::string name;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw ConfigError("config: section [" + name + "] missing key '" + key + "'");
        return it->second;
    }
    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    double get_double(const std::string& key) const {
        try {
            return std::stod(get(key));
        } catch (const std::invalid_argument&) {
            throw ConfigError("config: key '" + key + "' is not a number");
        }
    }
    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }
    std::size_t get_size(const std::string& key) const {
        try {
            const long long v = std::stoll(get(key));
            if (v < 0) throw ConfigError("config: key '" + key + "' must be >= 0");
            return static_cast<std::size_t>(v);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config: key '" + key + "' is not an integer");
        }
    }
    std::size_t get_size_or(const std::string& key, std::size_t fallback) const {
        return has(key) ? get_size(key) : fallback;
    }
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<ConfigSection> parse_config(std::istream& in, const std::string& origin) {
    std::vector<ConfigSection> sections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
            sections.push_back(ConfigSection{trim(t.substr(1, t.size() - 2)), {}});
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        if (sections.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key before any section");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        sections.back().values[key] = trim(t.substr(eq + 1));
    }
    return sections;
}

inline std::vector<ConfigSection> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("parse_config_file: cannot open " + path);
    return parse_config(in, path);
}

// --- delimited matrices -------------------------------------------------------

inline void save_matrix(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_matrix: cannot open " + path);
    out.precision(kFloatDigits);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ",";
            out << m(i, j);
        }
        out << "\n";
    }
    if (!out) throw IoError("save_matrix: write failed for " + path);
}

inline Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_matrix: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const std::string& f : split_fields(line, ',')) {
            try {
                row.push_back(std::stod(f));
            } catch (const std::invalid_argument&) {
                throw IoError("load_matrix: non-numeric field '" + f + "' in " + path);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("load_matrix: ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("load_matrix: empty file " + path);
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

// Feature ingestion for externally supplied representations: one state per
// row, d delimited columns. The whole matrix is divided by the largest row
// norm when that norm exceeds one, and the factor is reported.
struct FeatureLoad {
    Matrix features;
    double rescale_factor = 1.0; // applied divisor; 1 when no rescale needed
};

inline FeatureLoad load_features(const std::string& path) {
    FeatureLoad out{load_matrix(path), 1.0};
    double max_norm = 0.0;
    for (std::size_t s = 0; s < out.features.rows(); ++s) {
        double nsq = 0.0;
        for (std::size_t j = 0; j < out.features.cols(); ++j)
            nsq += out.features(s, j) * out.features(s, j);
        max_norm = std::max(max_norm, std::sqrt(nsq));
    }
    if (max_norm > 1.0) {
        out.rescale_factor = max_norm;
        for (std::size_t s = 0; s < out.features.rows(); ++s)
            for (std::size_t j = 0; j < out.features.cols(); ++j)
                out.features(s, j) /= max_norm;
    }
    return out;
}

// --- MDP directory layout -----------------------------------------------------
//
//   P.csv        transition matrix
//   rewards.csv  per-transition rewards
//   features.csv feature matrix (one state per row)
//   mdp.txt      [mdp] section with gamma, r_max, id

inline void save_mdp(const Mdp& mdp, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_matrix(mdp.P, dir + "/P.csv");
    save_matrix(mdp.rewards, dir + "/rewards.csv");
    save_matrix(mdp.features, dir + "/features.csv");
    std::ofstream out(dir + "/mdp.txt");
    if (!out) throw IoError("save_mdp: cannot open " + dir + "/mdp.txt");
    out << "[mdp]\n";
    out << "gamma = " << format_double(mdp.gamma) << "\n";
    out << "r_max = " << format_double(mdp.r_max) << "\n";
    out << "id = " << mdp.id << "\n";
    if (!out) throw IoError("save_mdp: write failed in " + dir);
}

inline Mdp load_mdp(const std::string& dir) {
    Mdp mdp;
    mdp.P = load_matrix(dir + "/P.csv");
    mdp.rewards = load_matrix(dir + "/rewards.csv");
    mdp.features = load_matrix(dir + "/features.csv");
    mdp.n_states = mdp.P.rows();
    const std::vector<ConfigSection> cfg = parse_config_file(dir + "/mdp.txt");
    if (cfg.empty() || cfg.front().name != "mdp")
        throw IoError("load_mdp: " + dir + "/mdp.txt lacks an [mdp] section");
    mdp.gamma = cfg.front().get_double("gamma");
    mdp.r_max = cfg.front().get_double("r_max");
    mdp.id = cfg.front().get_or("id", "");
    mdp.validate();
    return mdp;
}

// Flat manifest of named scalars/vectors, itself a config-format file.
inline void write_manifest(const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(path);
    if (!out) throw IoError("write_manifest: cannot open " + path);
    out << "[manifest]\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
    if (!out) throw IoError("write_manifest: write failed for " + path);
}

inline std::string format_vector(const Vector& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v[i]);
    }
    return s;
}

} // namespace tdsvrg

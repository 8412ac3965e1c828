#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "potential.hpp"

namespace opasym {

/// Evaluation abscissae: either an explicit list or an inclusive uniform range.
struct GridSpec {
    std::optional<std::vector<double>> explicit_points;
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    std::vector<double> points() const {
        if (explicit_points) return *explicit_points;
        std::vector<double> pts(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            pts[static_cast<std::size_t>(i)] = count == 1 ? min : min + (max - min) * i / (count - 1);
        return pts;
    }
};

struct SamplerSettings {
    int n = 0;               // number of particles; resolved to max(2, N) when absent
    long sweeps = 100000;
    long burn_in = 100000;
    int thin = 10;
    int bins = 40;
    double global_move_rate = 0.1;
};

struct RunConfig {
    int N = 1;
    std::vector<int> n_values;
    double T = 1.0;
    GridSpec grid;
    int precision_digits = 30;
    std::optional<double> edge_exclusion_delta;
    std::optional<int> cuts_hint;
    std::optional<std::vector<std::pair<double, double>>> cut_guess;
    std::optional<std::vector<double>> fillings;
    std::uint64_t seed = 0;
    bool seed_given = false;
    SamplerSettings sampler;
};

struct Config {
    Potential potential;
    RunConfig run;
};

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw config_error(key, "missing required field");
    return j.at(key);
}

inline double as_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw config_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw config_error(path, "expected a finite number");
    return v;
}

inline long as_integer(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number_integer()) throw config_error(path, "expected an integer");
    return j.get<long>();
}

} // namespace detail

/// Parses the JSON run description. All invariants of Potential and
/// RunConfig are enforced here; failures name the offending field.
inline Config parse_config(const std::string& text) {
    using detail::as_integer;
    using detail::as_number;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("<document>", std::string("malformed document: ") + e.what());
    }
    if (!j.is_object()) throw config_error("<document>", "top level must be an object");

    const auto& jv = detail::require(j, "V");
    if (!jv.is_array() || jv.empty()) throw config_error("V", "expected a non-empty coefficient list");
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < jv.size(); ++k) coeffs.push_back(as_number(jv[k], "V[" + std::to_string(k) + "]"));
    Potential pot(std::move(coeffs));

    RunConfig run;
    const long N = as_integer(detail::require(j, "N"), "N");
    if (N < 1) throw config_error("N", "must be >= 1");
    run.N = static_cast<int>(N);

    if (j.contains("n_values")) {
        const auto& a = j.at("n_values");
        if (!a.is_array() || a.empty()) throw config_error("n_values", "expected a non-empty integer list");
        for (std::size_t k = 0; k < a.size(); ++k) {
            const long n = as_integer(a[k], "n_values[" + std::to_string(k) + "]");
            if (n < 0) throw config_error("n_values[" + std::to_string(k) + "]", "must be >= 0");
            run.n_values.push_back(static_cast<int>(n));
        }
    } else {
        run.n_values = {std::max(0, run.N - 1), run.N};
    }

    if (j.contains("T")) {
        run.T = as_number(j.at("T"), "T");
        if (run.T <= 0.0) throw config_error("T", "must be positive");
    }

    const auto& g = detail::require(j, "grid");
    if (g.is_array()) {
        if (g.empty()) throw config_error("grid", "empty grid");
        std::vector<double> pts;
        for (std::size_t k = 0; k < g.size(); ++k) pts.push_back(as_number(g[k], "grid[" + std::to_string(k) + "]"));
        run.grid.explicit_points = std::move(pts);
    } else if (g.is_object()) {
        run.grid.min = as_number(detail::require(g, "min"), "grid.min");
        run.grid.max = as_number(detail::require(g, "max"), "grid.max");
        const long c = as_integer(detail::require(g, "count"), "grid.count");
        if (c < 1) throw config_error("grid.count", "empty grid");
        if (run.grid.max < run.grid.min) throw config_error("grid.max", "must be >= grid.min");
        run.grid.count = static_cast<int>(c);
    } else {
        throw config_error("grid", "expected {min,max,count} or a list of abscissae");
    }

    run.precision_digits = std::max(30, 2 * run.N);
    if (j.contains("precision_digits")) {
        const long p = as_integer(j.at("precision_digits"), "precision_digits");
        if (p < 15) throw config_error("precision_digits", "must be >= 15");
        run.precision_digits = static_cast<int>(p);
    }

    if (j.contains("edge_exclusion_delta")) {
        const double d = as_number(j.at("edge_exclusion_delta"), "edge_exclusion_delta");
        if (d <= 0.0) throw config_error("edge_exclusion_delta", "must be positive");
        run.edge_exclusion_delta = d;
    }

    if (j.contains("cuts_hint")) {
        const auto& c = j.at("cuts_hint");
        if (c.is_number_integer()) {
            const long s = c.get<long>();
            if (s < 1) throw config_error("cuts_hint", "must be >= 1");
            run.cuts_hint = static_cast<int>(s);
        } else if (c.is_array()) {
            std::vector<std::pair<double, double>> cuts;
            for (std::size_t k = 0; k < c.size(); ++k) {
                const std::string path = "cuts_hint[" + std::to_string(k) + "]";
                if (!c[k].is_array() || c[k].size() != 2) throw config_error(path, "expected [a, b]");
                cuts.emplace_back(as_number(c[k][0], path + "[0]"), as_number(c[k][1], path + "[1]"));
                if (!(cuts.back().first < cuts.back().second)) throw config_error(path, "need a < b");
                if (k > 0 && !(cuts[k - 1].second < cuts[k].first)) throw config_error(path, "cuts must be ordered and disjoint");
            }
            if (cuts.empty()) throw config_error("cuts_hint", "empty cut list");
            run.cuts_hint = static_cast<int>(cuts.size());
            run.cut_guess = std::move(cuts);
        } else {
            throw config_error("cuts_hint", "expected an integer or a list of [a, b] intervals");
        }
    }

    if (j.contains("fillings")) {
        const auto& f = j.at("fillings");
        if (!f.is_array() || f.empty()) throw config_error("fillings", "expected a non-empty list");
        std::vector<double> eps;
        double total = 0.0;
        for (std::size_t k = 0; k < f.size(); ++k) {
            eps.push_back(as_number(f[k], "fillings[" + std::to_string(k) + "]"));
            if (eps.back() <= 0.0) throw config_error("fillings[" + std::to_string(k) + "]", "must be positive");
            total += eps.back();
        }
        if (std::abs(total - run.T) > 1e-12 * std::max(1.0, run.T)) throw config_error("fillings", "must sum to T");
        run.fillings = std::move(eps);
    }

    if (j.contains("seed")) {
        const long s = as_integer(j.at("seed"), "seed");
        if (s < 0) throw config_error("seed", "must be >= 0");
        run.seed = static_cast<std::uint64_t>(s);
        run.seed_given = true;
    }

    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        if (!s.is_object()) throw config_error("sampler", "expected an object");
        if (s.contains("n")) {
            const long n = as_integer(s.at("n"), "sampler.n");
            if (n < 2) throw config_error("sampler.n", "must be >= 2");
            run.sampler.n = static_cast<int>(n);
        }
        if (s.contains("sweeps")) run.sampler.sweeps = as_integer(s.at("sweeps"), "sampler.sweeps");
        if (s.contains("burn_in")) run.sampler.burn_in = as_integer(s.at("burn_in"), "sampler.burn_in");
        if (s.contains("thin")) run.sampler.thin = static_cast<int>(as_integer(s.at("thin"), "sampler.thin"));
        if (s.contains("bins")) run.sampler.bins = static_cast<int>(as_integer(s.at("bins"), "sampler.bins"));
        if (s.contains("global_move_rate")) run.sampler.global_move_rate = as_number(s.at("global_move_rate"), "sampler.global_move_rate");
        if (run.sampler.sweeps < 1) throw config_error("sampler.sweeps", "must be >= 1");
        if (run.sampler.burn_in < 0) throw config_error("sampler.burn_in", "must be >= 0");
        if (run.sampler.thin < 1) throw config_error("sampler.thin", "must be >= 1");
        if (run.sampler.bins < 1) throw config_error("sampler.bins", "must be >= 1");
        if (run.sampler.global_move_rate < 0.0 || run.sampler.global_move_rate > 1.0)
            throw config_error("sampler.global_move_rate", "must lie in [0, 1]");
    }
    if (run.sampler.n == 0) run.sampler.n = std::max(2, run.N);

    return Config{std::move(pot), std::move(run)};
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("<file>", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline nlohmann::json to_json(const Config& c) {
    nlohmann::json j;
    j["V"] = c.potential.coeffs();
    const RunConfig& r = c.run;
    j["N"] = r.N;
    j["n_values"] = r.n_values;
    j["T"] = r.T;
    if (r.grid.explicit_points) {
        j["grid"] = *r.grid.explicit_points;
    } else {
        j["grid"] = {{"min", r.grid.min}, {"max", r.grid.max}, {"count", r.grid.count}};
    }
    j["precision_digits"] = r.precision_digits;
    if (r.edge_exclusion_delta) j["edge_exclusion_delta"] = *r.edge_exclusion_delta;
    if (r.cut_guess) {
        nlohmann::json cuts = nlohmann::json::array();
        for (const auto& [a, b] : *r.cut_guess) cuts.push_back({a, b});
        j["cuts_hint"] = cuts;
    } else if (r.cuts_hint) {
        j["cuts_hint"] = *r.cuts_hint;
    }
    if (r.fillings) j["fillings"] = *r.fillings;
    if (r.seed_given) j["seed"] = r.seed;
    j["sampler"] = {{"n", r.sampler.n},
                    {"sweeps", r.sampler.sweeps},
                    {"burn_in", r.sampler.burn_in},
                    {"thin", r.sampler.thin},
                    {"bins", r.sampler.bins},
                    {"global_move_rate", r.sampler.global_move_rate}};
    return j;
}

inline std::string serialize_config(const Config& c) { return to_json(c).dump(2); }

/// FNV-1a over the canonical serialisation; recorded in every output file.
inline std::uint64_t config_hash(const Config& c) {
    const std::string s = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace opasym

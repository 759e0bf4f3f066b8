// Command-line runner: one entry point for sampling, functional evaluation,
// sprinkling constructions, tail estimation, scaling curves, rate sweeps and
// the verification suite. Configuration comes from a JSON file plus flag
// overrides (flags win); all randomness flows from the single root seed.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geomld/estimation.hpp"
#include "geomld/point_process.hpp"
#include "geomld/rates.hpp"
#include "geomld/rng.hpp"
#include "geomld/sprinkling.hpp"
#include "geomld/verify.hpp"

using nlohmann::json;
using namespace geomld;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitHardFailure = 3;

struct ExperimentConfig {
    std::string command;
    std::string regime;  // sparse | critical | dense
    RegimeParams params;
    std::uint64_t seed = 1;
    long replicates = 10000;
    int threads = 1;
    std::string out_path;
    std::string format = "csv";
    // command-specific knobs
    double a = 0.0;
    int resolution = 128;
    int samples = 32;
    int configs = 20;
    std::string construction;       // sprinkle: knn | contact | sparse | dense
    std::string functional_name;    // functional: overrides the regime default
    std::vector<double> speeds;     // curve speeds
    double rate_a_min = 0.05, rate_a_max = 0.95;
    int rate_steps = 19;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::set<std::string> kTopKeys = {
    "command", "regime", "params", "seed", "replicates", "threads", "out",
    "format", "a", "resolution", "samples", "configs", "construction",
    "functional", "speeds", "rate_a_min", "rate_a_max", "rate_steps"};

const std::set<std::string> kParamKeys = {"d",  "n",  "r_n",     "k0", "k",
                                          "alpha", "a_n", "s0", "M",  "M_prime",
                                          "M0", "epsilon", "w_n"};

void parse_params(const json& j, RegimeParams& p) {
    for (const auto& [key, value] : j.items()) {
        if (!kParamKeys.count(key))
            throw ValidationError("unknown params field: " + key);
        if (key == "d") p.d = value.get<int>();
        else if (key == "n") p.n = value.get<double>();
        else if (key == "r_n") p.r_n = value.get<double>();
        else if (key == "k0") p.k0 = value.get<int>();
        else if (key == "k") p.k = value.get<int>();
        else if (key == "alpha") p.alpha = value.get<double>();
        else if (key == "a_n") p.a_n = value.get<double>();
        else if (key == "s0") p.s0 = value.get<double>();
        else if (key == "M") p.M = value.get<double>();
        else if (key == "M_prime") p.M_prime = value.get<double>();
        else if (key == "M0") p.M0 = value.get<double>();
        else if (key == "epsilon") p.epsilon = value.get<double>();
        else if (key == "w_n") p.w_n = value.get<double>();
    }
}

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    for (const auto& [key, value] : j.items()) {
        if (!kTopKeys.count(key))
            throw ValidationError("unknown config field: " + key);
        if (key == "command") c.command = value.get<std::string>();
        else if (key == "regime") c.regime = value.get<std::string>();
        else if (key == "params") parse_params(value, c.params);
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "replicates") c.replicates = value.get<long>();
        else if (key == "threads") c.threads = value.get<int>();
        else if (key == "out") c.out_path = value.get<std::string>();
        else if (key == "format") c.format = value.get<std::string>();
        else if (key == "a") c.a = value.get<double>();
        else if (key == "resolution") c.resolution = value.get<int>();
        else if (key == "samples") c.samples = value.get<int>();
        else if (key == "configs") c.configs = value.get<int>();
        else if (key == "construction") c.construction = value.get<std::string>();
        else if (key == "functional") c.functional_name = value.get<std::string>();
        else if (key == "speeds") c.speeds = value.get<std::vector<double>>();
        else if (key == "rate_a_min") c.rate_a_min = value.get<double>();
        else if (key == "rate_a_max") c.rate_a_max = value.get<double>();
        else if (key == "rate_steps") c.rate_steps = value.get<int>();
    }
    return c;
}

json params_to_json(const RegimeParams& p) {
    return json{{"d", p.d},       {"n", p.n},           {"r_n", p.r_n},
                {"k0", p.k0},     {"k", p.k},           {"alpha", p.alpha},
                {"a_n", p.a_n},   {"s0", p.s0},         {"M", p.M},
                {"M_prime", p.M_prime}, {"M0", p.M0},   {"epsilon", p.epsilon},
                {"w_n", p.w_n}};
}

// threads deliberately omitted: it may never influence an output byte
json config_to_json(const ExperimentConfig& c) {
    return json{{"command", c.command},
                {"regime", c.regime},
                {"params", params_to_json(c.params)},
                {"seed", c.seed},
                {"replicates", c.replicates},
                {"out", c.out_path},
                {"format", c.format}};
}

void require_regime_fields(const ExperimentConfig& c) {
    if (c.regime == "sparse") {
        if (c.params.n <= 0.0) throw ValidationError("missing/invalid field for regime=sparse: n");
        if (c.params.r_n <= 0.0) throw ValidationError("missing/invalid field for regime=sparse: r_n");
        if (c.params.k0 < 1) throw ValidationError("missing/invalid field for regime=sparse: k0");
    } else if (c.regime == "critical") {
        if (c.params.n <= 0.0) throw ValidationError("missing/invalid field for regime=critical: n");
        if (c.params.k < 1) throw ValidationError("missing/invalid field for regime=critical: k");
    } else if (c.regime == "dense") {
        if (c.params.n <= 0.0) throw ValidationError("missing/invalid field for regime=dense: n");
        if (c.params.a_n <= 0.0) throw ValidationError("missing/invalid field for regime=dense: a_n");
        if (c.params.k < 1) throw ValidationError("missing/invalid field for regime=dense: k");
    } else if (!c.regime.empty()) {
        throw ValidationError("unknown regime: " + c.regime);
    }
}

void write_output(const ExperimentConfig& c, const std::string& body) {
    if (c.out_path.empty()) return;
    std::ofstream os(c.out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open out path: " + c.out_path);
    if (c.format == "csv")
        os << "# config: " << config_to_json(c).dump() << "\n";
    os << body;
}

void print_summary(const json& j) { std::cout << j.dump() << "\n"; }

StreamKey root_key(const ExperimentConfig& c) { return {c.seed, "cli", 0}; }

int cmd_sample(const ExperimentConfig& c) {
    const PointSet ps = sample_poisson(c.params.n, c.params.d, root_key(c).with_lane("sample"));
    write_output(c, point_set_to_csv(ps));
    print_summary(json{{"command", "sample"}, {"points", ps.size()}, {"out", c.out_path}});
    return 0;
}

int cmd_functional(const ExperimentConfig& c) {
    require_regime_fields(c);
    const PointSet ps = sample_poisson(c.params.n, c.params.d, root_key(c).with_lane("functional"));
    std::string name = c.functional_name;
    if (name.empty()) {
        if (c.regime == "sparse") name = "sparse_H";
        else if (c.regime == "critical") name = "critical_knn_H";
        else name = "dense_H";
    }
    double value = 0.0;
    json diagnostics;
    if (name == "sparse_H" || name == "sparse_H_tilde") {
        const ScoreSpec score = clique_count_score(c.params.d, c.params.k0);
        value = name == "sparse_H" ? sparse_H(ps, c.params, score)
                                   : sparse_H_tilde(ps, c.params, score);
        diagnostics["score"] = score.name;
    } else if (name == "critical_knn_H") {
        value = critical_knn_H(ps, c.params);
    } else if (name == "critical_cutoff_H") {
        value = critical_cutoff_H(ps, c.params, knn_cutoff_cap(c.params));
        diagnostics["g_of_M"] = knn_cutoff_cap(c.params);
    } else if (name == "contact_H") {
        const auto v = contact_H(ps, c.params, c.resolution);
        value = v.value;
        diagnostics["refinement_delta"] = v.refinement_delta;
        diagnostics["resolution"] = c.resolution;
    } else if (name == "dense_H") {
        value = dense_H(ps, c.params);
    } else {
        throw ValidationError("unknown functional: " + name);
    }
    json record{{"functional", name},
                {"params", params_to_json(c.params)},
                {"value", value},
                {"diagnostics", diagnostics}};
    json wrapped{{"config", config_to_json(c)}, {"result", record}};
    write_output(c, wrapped.dump(2) + "\n");
    print_summary(record);
    return 0;
}

json report_to_json(const SprinkleReport& rep) {
    return json{{"bad_count", rep.bad_count},
                {"inserted_points", rep.inserted.size()},
                {"target_event_holds", rep.target_event_holds},
                {"max_post_radius", rep.max_post_radius},
                {"excess", std::isnan(rep.excess) ? json() : json(rep.excess)},
                {"adjusted_grid_side", rep.adjusted_grid_side},
                {"adjusted_sub_side", rep.adjusted_sub_side}};
}

int cmd_sprinkle(const ExperimentConfig& c) {
    require_regime_fields(c);
    std::string kind = c.construction;
    if (kind.empty()) {
        if (c.regime == "sparse") kind = "sparse";
        else if (c.regime == "dense") kind = "dense";
        else kind = "knn";
    }
    const StreamKey key = root_key(c).with_lane("sprinkle");
    const PointSet P = sample_poisson(c.params.n, c.params.d, key.with_lane("P"));
    json summary;
    std::string body;
    if (kind == "knn") {
        auto [unioned, rep] = knn_sprinkle(P, c.params, key);
        summary = report_to_json(rep);
        body = json{{"config", config_to_json(c)}, {"report", summary}}.dump(2) + "\n";
    } else if (kind == "contact") {
        auto [unioned, rep] = contact_sprinkle(P, c.params, key);
        summary = report_to_json(rep);
        body = json{{"config", config_to_json(c)}, {"report", summary}}.dump(2) + "\n";
    } else if (kind == "sparse") {
        const PointSet Pp = sample_poisson(c.params.n, c.params.d, key.with_lane("Pprime"));
        const ScoreSpec score = clique_count_score(c.params.d, c.params.k0);
        auto [P2, rep] = sparse_resample(P, Pp, c.params, key, &score);
        summary = report_to_json(rep);
        body = json{{"config", config_to_json(c)}, {"report", summary}}.dump(2) + "\n";
    } else if (kind == "dense") {
        const PointSet Pp = sample_poisson(c.params.n, c.params.d, key.with_lane("Pprime"));
        const auto res = dense_sequential_resample(P, Pp, c.params, c.samples, key);
        summary = report_to_json(res.report);
        summary["e_star"] = res.e_star;
        body = box_states_to_csv(res.states);
        if (c.format == "json")
            body = json{{"config", config_to_json(c)}, {"report", summary}}.dump(2) + "\n";
    } else {
        throw ValidationError("unknown construction: " + kind);
    }
    write_output(c, body);
    print_summary(summary);
    return 0;
}

TailFunctional regime_functional(const ExperimentConfig& c) {
    if (c.regime == "sparse") return TailFunctional::SparseClique;
    if (c.regime == "dense") return TailFunctional::DenseKnn;
    throw ValidationError("estimate/curve support regime sparse or dense");
}

int cmd_estimate(const ExperimentConfig& c) {
    require_regime_fields(c);
    const auto f = regime_functional(c);
    const auto r = estimate_lower_tail(f, c.params, c.a, c.replicates,
                                       root_key(c).with_lane("estimate"), c.threads);
    std::ostringstream body;
    body.precision(12);
    body << "speed,a,p_hat,se,normalized_log\n"
         << r.speed << ',' << c.a << ',' << r.p_hat << ',' << r.std_err << ','
         << r.normalized_log << "\n";
    write_output(c, body.str());
    print_summary(json{{"command", "estimate"},
                       {"p_hat", r.p_hat},
                       {"se", r.std_err},
                       {"speed", r.speed},
                       {"normalized_log", r.normalized_log}});
    return 0;
}

// realize a target speed by adjusting r_n (sparse) or a_n (dense)
RegimeParams params_for_speed(const ExperimentConfig& c, double speed) {
    RegimeParams p = c.params;
    if (c.regime == "sparse") {
        p.r_n = std::pow(speed / std::pow(p.n, p.k0),
                         1.0 / (static_cast<double>(p.d) * (p.k0 - 1)));
    } else {
        // solve n a^{k-1} e^{-a} = speed on the decreasing branch
        double lo = std::max(1.0, static_cast<double>(p.k - 1));
        double hi = std::log(p.n) + 10.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double val = p.n * std::pow(mid, p.k - 1) * std::exp(-mid);
            if (val > speed)
                lo = mid;
            else
                hi = mid;
        }
        p.a_n = 0.5 * (lo + hi);
    }
    return p;
}

int cmd_curve(const ExperimentConfig& c) {
    require_regime_fields(c);
    if (c.speeds.empty()) throw ValidationError("curve requires speeds");
    std::vector<RegimeParams> plist;
    for (double s : c.speeds) plist.push_back(params_for_speed(c, s));
    const auto rows = scaling_curve(regime_functional(c), plist, c.a, c.replicates,
                                    root_key(c).with_lane("curve"), c.threads);
    std::ostringstream body;
    body.precision(12);
    body << "speed,a,p_hat,se,normalized_log,degenerate\n";
    for (const auto& row : rows)
        body << row.speed << ',' << c.a << ',' << row.result.p_hat << ','
             << row.result.std_err << ',' << row.result.normalized_log << ','
             << (row.degenerate ? 1 : 0) << "\n";
    write_output(c, body.str());
    print_summary(json{{"command", "curve"}, {"rows", rows.size()}});
    return 0;
}

int cmd_rate(const ExperimentConfig& c) {
    std::ostringstream body;
    body.precision(12);
    body << "a,rate,theta,converged\n";
    for (int i = 0; i < c.rate_steps; ++i) {
        const double a = c.rate_a_min +
                         (c.rate_a_max - c.rate_a_min) *
                             (c.rate_steps == 1 ? 0.0
                                                : static_cast<double>(i) / (c.rate_steps - 1));
        const auto sol = dense_rate(a, c.params.k, c.params.s0);
        body << a << ',' << sol.rate << ',' << sol.theta << ','
             << (sol.converged ? 1 : 0) << "\n";
    }
    write_output(c, body.str());
    print_summary(json{{"command", "rate"}, {"rows", c.rate_steps}});
    return 0;
}

int cmd_verify(const ExperimentConfig& c) {
    const auto summary = run_verify_suite(c.seed, c.replicates, c.threads);
    write_output(c, summary.csv);
    long passed = 0;
    for (const auto& chk : summary.checks)
        if (chk.pass) ++passed;
    print_summary(json{{"command", "verify"},
                       {"checks", summary.checks.size()},
                       {"passed", passed},
                       {"hard_failure", summary.hard_failure},
                       {"stat_failure", summary.stat_failure}});
    if (summary.hard_failure) return kExitHardFailure;
    return summary.stat_failure ? kExitHardFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geomld: lower-tail simulation and verification toolkit"};
    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<long> replicates_flag;
    std::optional<int> threads_flag;
    std::optional<std::string> out_flag;
    std::optional<std::string> format_flag;
    std::string command;

    app.add_option("command", command,
                   "sample|functional|sprinkle|estimate|curve|rate|verify");
    app.add_option("--config", config_path, "JSON config path");
    app.add_option("--seed", seed_flag, "root seed (overrides config)");
    app.add_option("--replicates", replicates_flag, "replicates (overrides config)");
    app.add_option("--threads", threads_flag, "thread count (overrides config)");
    app.add_option("--out", out_flag, "output path (overrides config)");
    app.add_option("--format", format_flag, "csv|json (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitValidation : 0;
    }

    try {
        json j = json::object();
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) {
                std::cerr << "error: cannot read config: " << config_path << "\n";
                return kExitValidation;
            }
            is >> j;
        }
        ExperimentConfig cfg = parse_config(j);
        if (!command.empty()) cfg.command = command;
        if (seed_flag) cfg.seed = *seed_flag;
        if (replicates_flag) cfg.replicates = *replicates_flag;
        if (threads_flag) cfg.threads = *threads_flag;
        if (out_flag) cfg.out_path = *out_flag;
        if (format_flag) cfg.format = *format_flag;
        if (cfg.format != "csv" && cfg.format != "json")
            throw ValidationError("format must be csv or json");

        if (cfg.command == "sample") return cmd_sample(cfg);
        if (cfg.command == "functional") return cmd_functional(cfg);
        if (cfg.command == "sprinkle") return cmd_sprinkle(cfg);
        if (cfg.command == "estimate") return cmd_estimate(cfg);
        if (cfg.command == "curve") return cmd_curve(cfg);
        if (cfg.command == "rate") return cmd_rate(cfg);
        if (cfg.command == "verify") return cmd_verify(cfg);
        throw ValidationError("unknown command: " + cfg.command);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

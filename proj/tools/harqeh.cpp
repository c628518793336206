// Copyright 2026 The harqeh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// harqeh: solve, simulate and verify time-switching policies for an
// RF-powered HARQ-IR receiver.
//
//   harqeh solve --lambda 0.5 --r1 10 --r2 1 --e 1 --ed 5
//   harqeh table1 --episodes 100000
//   harqeh policy-grid --lambda 0.5 --r1 5 --r2 2 --e 2 --ed 5 --tie-break mark
//   harqeh estimate --policy bf --lambda 0.5 --r1 10 --r2 1 --e 1 --ed 5
//   harqeh verify --suite lemma1
//
// Exit codes: 0 success, 1 verification failure or runtime error, 2 usage.

#include "harqeh/absorption.hpp"
#include "harqeh/model.hpp"
#include "harqeh/montecarlo.hpp"
#include "harqeh/policies.hpp"
#include "harqeh/solver.hpp"
#include "harqeh/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using harqeh::LinkConfig;
using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal, independent of the C++ locale.
std::string num(double x) {
    if (std::isnan(x)) return "";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return ec == std::errc{} ? std::string(buf.data(), ptr) : std::string("?");
}

json num_json(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct Options {
    std::optional<double> lambda;
    std::optional<double> r1;
    std::optional<double> r2;
    std::optional<int> e;
    std::optional<int> ed;
    int bmax = 0;
    std::uint64_t episodes = 0;
    std::uint64_t seed = 20170101;
    std::string format = "csv";
    std::string tie_break = "prefer-eh";
    std::string out_dir;
    int lanes = 0;
    // subcommand-specific
    std::string policy = "bf";
    std::string suite = "all";
    std::uint64_t rollouts = 1'000'000;
};

LinkConfig link_config(const Options& o) {
    std::vector<std::string> missing;
    if (!o.lambda) missing.emplace_back("--lambda");
    if (!o.r1) missing.emplace_back("--r1");
    if (!o.r2) missing.emplace_back("--r2");
    if (!o.e) missing.emplace_back("--e");
    if (!o.ed) missing.emplace_back("--ed");
    if (!missing.empty()) {
        std::string what = "missing required link parameter(s):";
        for (const auto& m : missing) what += " " + m;
        throw UsageError(what);
    }
    try {
        return LinkConfig{*o.lambda, *o.r1, *o.r2, *o.e, *o.ed, o.bmax}.validated();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

json config_json(const LinkConfig& c) {
    return {{"lambda", c.lambda}, {"r1", c.r1}, {"r2", c.r2}, {"e", c.e}, {"e_d", c.e_d}, {"b_max", c.b_max}};
}

// Writes the result body to stdout, or to <out_dir>/<name> with a manifest
// next to it. The summary goes wherever the body does not.
void emit(const Options& o, const std::string& command_line, const std::string& name, const std::string& body,
          const std::string& summary, json manifest_extra) {
    const std::string ext = o.format == "json" ? ".json" : ".csv";
    if (o.out_dir.empty()) {
        std::cout << body;
        if (!summary.empty()) std::cerr << summary << '\n';
        return;
    }
    const std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    const std::string file = name + ext;
    std::ofstream(dir / file, std::ios::binary) << body;

    json manifest = std::move(manifest_extra);
    manifest["tool"] = "harqeh";
    manifest["version"] = kVersion;
    manifest["command"] = command_line;
    manifest["seed"] = o.seed;
    manifest["timestamp"] = utc_timestamp();
    manifest["outputs"] = {{file, {{"sha256", sha256_hex(body)}, {"bytes", body.size()}}}};
    std::ofstream(dir / (name + ".manifest.json"), std::ios::binary) << manifest.dump(2) << '\n';
    if (!summary.empty()) std::cout << summary << '\n';
    std::cout << "wrote " << (dir / file).string() << '\n';
}

int cmd_solve(const Options& o, const std::string& cl) {
    const LinkConfig cfg = link_config(o);
    const harqeh::ValueTable vt = harqeh::value_iteration_ssp(cfg);
    const harqeh::InfoLattice& lat = vt.space.lattice();
    std::ostringstream body;
    if (o.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < vt.space.size(); ++i) {
            const auto s = vt.space.state(i);
            rows.push_back({{"b", s.b}, {"m_index", s.m}, {"m_bits", lat.bits(s.m)}, {"k", vt.k[i]},
                            {"q_eh", num_json(vt.q_eh[i])}, {"q_id", num_json(vt.q_id[i])},
                            {"tie", vt.tie[i] != 0}});
        }
        body << json{{"config", config_json(cfg)}, {"k00", vt.at({0, 0})}, {"iterations", vt.iterations},
                     {"residual", vt.residual}, {"states", rows}}
                    .dump(2)
             << '\n';
    } else {
        body << "b,m_index,m_bits,k,q_eh,q_id,tie\n";
        for (std::size_t i = 0; i < vt.space.size(); ++i) {
            const auto s = vt.space.state(i);
            body << s.b << ',' << s.m << ',' << num(lat.bits(s.m)) << ',' << num(vt.k[i]) << ','
                 << num(vt.q_eh[i]) << ',' << num(vt.q_id[i]) << ',' << (vt.tie[i] ? 1 : 0) << '\n';
        }
    }
    std::ostringstream summary;
    summary << "k(0,0) = " << std::setprecision(10) << vt.at({0, 0}) << " (iterations " << vt.iterations
            << ", residual " << vt.residual << ")";
    emit(o, cl, "solve", body.str(), summary.str(), {{"config", config_json(cfg)}});
    return 0;
}

struct TableSpec {
    std::string name;
    std::string column_label;
    std::vector<double> columns;
    LinkConfig (*make)(double);
};

int cmd_table(const Options& o, const std::string& cl, const TableSpec& spec) {
    const std::uint64_t episodes = o.episodes > 0 ? o.episodes : 10'000'000;
    const std::vector<std::string> heuristics{"bf", "if", "ct"};
    std::vector<double> via;
    std::vector<std::vector<harqeh::EstimateResult>> mc(heuristics.size());
    for (std::size_t c = 0; c < spec.columns.size(); ++c) {
        const LinkConfig cfg = spec.make(spec.columns[c]);
        const harqeh::ValueTable vt = harqeh::value_iteration_ssp(cfg);
        const auto optimal = harqeh::tabular_policy(vt, harqeh::TieBreak::PreferEh);
        via.push_back(harqeh::mean_absorption_times(*optimal, cfg).at({0, 0}));
        for (std::size_t h = 0; h < heuristics.size(); ++h) {
            const auto policy = harqeh::make_policy(heuristics[h], cfg);
            const std::uint64_t seed = harqeh::derive_seed(o.seed, c * heuristics.size() + h);
            harqeh::EstimateOptions eo;
            eo.lanes = o.lanes;
            mc[h].push_back(harqeh::estimate(*policy, cfg, episodes, seed, eo));
        }
    }

    std::ostringstream body;
    if (o.format == "json") {
        json cols = json::array();
        for (std::size_t c = 0; c < spec.columns.size(); ++c) {
            json entry{{spec.column_label, spec.columns[c]}, {"config", config_json(spec.make(spec.columns[c]))},
                       {"VIA", via[c]}};
            for (std::size_t h = 0; h < heuristics.size(); ++h) {
                const auto& r = mc[h][c];
                entry[heuristics[h]] = {{"mean", r.mean}, {"stderr", r.std_error}, {"ci95", {r.ci95_low, r.ci95_high}},
                                        {"episodes", r.n_episodes}, {"seed", r.master_seed}, {"policy", r.policy_spec}};
            }
            cols.push_back(entry);
        }
        body << json{{"table", spec.name}, {"episodes", episodes}, {"columns", cols}}.dump(2) << '\n';
    } else {
        body << "row";
        for (double v : spec.columns) body << ',' << spec.column_label << '=' << num(v);
        body << "\nVIA";
        for (double v : via) body << ',' << num(v);
        body << '\n';
        const char* labels[] = {"BF", "IF", "CT"};
        for (std::size_t h = 0; h < heuristics.size(); ++h) {
            body << labels[h];
            for (const auto& r : mc[h]) body << ',' << num(r.mean);
            body << '\n';
        }
        for (std::size_t h = 0; h < heuristics.size(); ++h) {
            body << labels[h] << "_stderr";
            for (const auto& r : mc[h]) body << ',' << num(r.std_error);
            body << '\n';
        }
    }
    emit(o, cl, spec.name, body.str(), "", {{"episodes", episodes}});
    return 0;
}

const char* cell_name(harqeh::Cell c) {
    switch (c) {
        case harqeh::Cell::Absorb: return "ABSORB";
        case harqeh::Cell::Eh: return "EH";
        case harqeh::Cell::Id: return "ID";
        case harqeh::Cell::Tie: return "TIE";
    }
    return "?";
}

int cmd_policy_grid(const Options& o, const std::string& cl) {
    const LinkConfig cfg = link_config(o);
    harqeh::TieBreak tie{};
    try {
        tie = harqeh::parse_tie_break(o.tie_break);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const harqeh::ValueTable vt = harqeh::value_iteration_ssp(cfg);
    const harqeh::ActionGrid grid = harqeh::extract_policy(vt, tie);
    const harqeh::InfoLattice& lat = vt.space.lattice();
    std::ostringstream body;
    if (o.format == "json") {
        json rows = json::array();
        for (int b = 0; b <= cfg.b_max; ++b) {
            json row = json::array();
            for (int m = 0; m < lat.size(); ++m) row.push_back(cell_name(grid.at({b, m})));
            rows.push_back(row);
        }
        json levels = json::array();
        for (int m = 0; m < lat.size(); ++m) levels.push_back(lat.bits(m));
        body << json{{"config", config_json(cfg)}, {"tie_break", o.tie_break}, {"m_bits", levels}, {"grid", rows}}
                    .dump(2)
             << '\n';
    } else {
        body << 'b';
        for (int m = 0; m < lat.size(); ++m) body << ",m=" << num(lat.bits(m));
        body << '\n';
        for (int b = 0; b <= cfg.b_max; ++b) {
            body << b;
            for (int m = 0; m < lat.size(); ++m) body << ',' << cell_name(grid.at({b, m}));
            body << '\n';
        }
    }
    emit(o, cl, "policy_grid", body.str(), "", {{"config", config_json(cfg)}, {"tie_break", o.tie_break}});
    return 0;
}

int cmd_estimate(const Options& o, const std::string& cl) {
    const LinkConfig cfg = link_config(o);
    harqeh::PolicyPtr policy;
    try {
        policy = harqeh::make_policy(o.policy, cfg);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const std::uint64_t episodes = o.episodes > 0 ? o.episodes : 100'000;
    harqeh::EstimateOptions eo;
    eo.lanes = o.lanes;
    const harqeh::EstimateResult r = harqeh::estimate(*policy, cfg, episodes, o.seed, eo);
    const double exact = harqeh::mean_absorption_times(*policy, cfg).at({0, 0});
    std::ostringstream body;
    if (o.format == "json") {
        body << json{{"config", config_json(cfg)}, {"policy", r.policy_spec}, {"mean", r.mean},
                     {"stderr", r.std_error}, {"ci95", {r.ci95_low, r.ci95_high}}, {"episodes", r.n_episodes},
                     {"seed", r.master_seed}, {"exact", exact}}
                    .dump(2)
             << '\n';
    } else {
        body << "policy,episodes,seed,mean,stderr,ci95_low,ci95_high,exact\n"
             << r.policy_spec << ',' << r.n_episodes << ',' << r.master_seed << ',' << num(r.mean) << ','
             << num(r.std_error) << ',' << num(r.ci95_low) << ',' << num(r.ci95_high) << ',' << num(exact) << '\n';
    }
    emit(o, cl, "estimate", body.str(), "", {{"config", config_json(cfg)}, {"episodes", episodes}});
    return 0;
}

int cmd_verify(const Options& o) {
    const std::vector<std::string> known{"lemma1", "monotone", "deviation", "bmax"};
    std::vector<std::string> suites;
    if (o.suite == "all") {
        suites = known;
    } else if (std::find(known.begin(), known.end(), o.suite) != known.end()) {
        suites.push_back(o.suite);
    } else {
        throw UsageError("unknown suite '" + o.suite + "'");
    }
    bool ok = true;
    for (const std::string& s : suites) {
        harqeh::SuiteReport r;
        if (s == "lemma1") r = harqeh::verify_lemma1();
        if (s == "monotone") r = harqeh::verify_monotone();
        if (s == "bmax") r = harqeh::verify_bmax();
        if (s == "deviation") {
            const LinkConfig cfg = o.lambda ? link_config(o) : harqeh::configs::figure();
            r = harqeh::verify_deviation(cfg, o.rollouts, o.seed, o.lanes);
        }
        std::cout << r.to_text();
        ok = ok && r.ok();
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal time-switching policies for RF energy-harvesting HARQ-IR receivers", "harqeh"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Plain key=value file (e.g. lambda=0.5); flags override it");
    app.set_version_flag("--version", kVersion);

    Options o;
    app.add_option("--lambda", o.lambda, "P[GOOD channel]");
    app.add_option("--r1", o.r1, "GOOD-state rate in bits/slot (message rate)");
    app.add_option("--r2", o.r2, "BAD-state rate in bits/slot");
    app.add_option("--e", o.e, "energy units harvested per GOOD slot");
    app.add_option("--ed", o.ed, "decode energy threshold");
    app.add_option("--bmax", o.bmax, "battery capacity (default e_d + 4e)");
    app.add_option("--episodes", o.episodes, "Monte Carlo episodes");
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--tie-break", o.tie_break, "prefer-eh, prefer-id or mark")
        ->check(CLI::IsMember({"prefer-eh", "prefer-id", "mark"}));
    app.add_option("--out-dir", o.out_dir, "write results and manifests here")->envname("HARQEH_OUT_DIR");
    app.add_option("--lanes", o.lanes, "OpenMP threads for Monte Carlo (0 = default)");

    auto* solve = app.add_subcommand("solve", "value iteration; per-state k, q_eh, q_id, ties");
    auto* table1 = app.add_subcommand("table1", "expected re-transmissions vs r2 (lambda 0.5, r1 10, e 1, e_d 5)");
    auto* table2 = app.add_subcommand("table2", "expected re-transmissions vs lambda (r1 10, r2 5, e 2, e_d 5)");
    auto* grid = app.add_subcommand("policy-grid", "optimal action per (b, m)");
    auto* est = app.add_subcommand("estimate", "Monte Carlo estimate for one policy");
    est->add_option("--policy", o.policy, "bf[:threshold=N] | if | ct | tabular[:tie=prefer-eh|prefer-id]");
    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("--suite", o.suite, "lemma1 | monotone | deviation | bmax | all");
    verify->add_option("--rollouts", o.rollouts, "rollouts per arm for the deviation suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command_line;
    for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

    try {
        if (*solve) return cmd_solve(o, command_line);
        if (*table1) {
            return cmd_table(o, command_line,
                             {"table1", "R2", {1, 2, 3, 4, 5}, [](double r2) { return harqeh::configs::table1(int(r2)); }});
        }
        if (*table2) {
            return cmd_table(o, command_line,
                             {"table2", "lambda", {0.1, 0.2, 0.3, 0.4, 0.5}, [](double l) { return harqeh::configs::table2(l); }});
        }
        if (*grid) return cmd_policy_grid(o, command_line);
        if (*est) return cmd_estimate(o, command_line);
        if (*verify) return cmd_verify(o);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

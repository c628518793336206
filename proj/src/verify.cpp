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

#include "harqeh/verify.hpp"

#include "harqeh/absorption.hpp"
#include "harqeh/policies.hpp"
#include "harqeh/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace harqeh {

bool SuiteReport::ok() const {
    return std::all_of(lines.begin(), lines.end(), [](const SuiteLine& l) { return l.ok; });
}

std::string SuiteReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    for (const SuiteLine& l : lines) {
        os << (l.ok ? "PASS" : "FAIL") << "  " << suite << "  " << l.config << "  margin=" << l.margin;
        if (!l.detail.empty()) os << "  " << l.detail;
        os << '\n';
    }
    os << suite << ": " << (ok() ? "all passed" : "FAILED") << " (" << lines.size() << " configs)\n";
    return os.str();
}

namespace configs {

LinkConfig table1(int r2) { return LinkConfig{0.5, 10.0, static_cast<double>(r2), 1, 5, 0}.validated(); }
LinkConfig table2(double lambda) { return LinkConfig{lambda, 10.0, 5.0, 2, 5, 0}.validated(); }
LinkConfig figure() { return LinkConfig{0.5, 5.0, 2.0, 2, 5, 0}.validated(); }
LinkConfig unit() { return LinkConfig{0.5, 1.0, 1.0, 1, 1, 0}.validated(); }

}  // namespace configs

namespace {

std::vector<LinkConfig> table_configs() {
    std::vector<LinkConfig> out;
    for (int r2 = 1; r2 <= 5; ++r2) out.push_back(configs::table1(r2));
    for (int l = 1; l <= 5; ++l) out.push_back(configs::table2(l / 10.0));
    return out;
}

}  // namespace

SuiteReport verify_lemma1(double tol) {
    SuiteReport report{"lemma1", {}};
    for (int e = 1; e <= 3; ++e) {
        for (int e_d = 1; e_d <= 6; ++e_d) {
            for (int l = 1; l <= 9; ++l) {
                const LinkConfig cfg = LinkConfig{l / 10.0, 5.0, 2.0, e, e_d, 0}.validated();
                const ValueTable vt = value_iteration_ssp(cfg);
                const AbsorptionTable chain = mean_absorption_times(*tabular_policy(vt, TieBreak::PreferEh), cfg);
                const int cap = vt.space.lattice().cap_index();
                double worst = 0.0;
                for (int b = 0; b < e_d; ++b) {
                    const double expected = lemma1_closed_form(b, cfg);
                    worst = std::max({worst, std::abs(vt.at({b, cap}) - expected),
                                      std::abs(chain.at({b, cap}) - expected)});
                }
                report.lines.push_back({cfg.to_string(), tol - worst, worst <= tol, ""});
            }
        }
    }
    return report;
}

SuiteReport verify_monotone() {
    SuiteReport report{"monotone", {}};
    std::vector<LinkConfig> cfgs = table_configs();
    cfgs.push_back(configs::figure());
    cfgs.push_back(configs::unit());
    for (const LinkConfig& cfg : cfgs) {
        const ValueTable vt = value_iteration_ssp(cfg);
        const int levels = vt.space.info_levels();
        // Slack is k(smaller coordinate) - k(larger coordinate), which must be >= 0.
        double worst = std::numeric_limits<double>::infinity();
        for (int b = 0; b <= cfg.b_max; ++b) {
            for (int m = 0; m < levels; ++m) {
                if (b + 1 <= cfg.b_max) worst = std::min(worst, vt.at({b, m}) - vt.at({b + 1, m}));
                if (m + 1 < levels) worst = std::min(worst, vt.at({b, m}) - vt.at({b, m + 1}));
            }
        }
        report.lines.push_back({cfg.to_string(), worst, worst >= -1e-12, ""});
    }
    return report;
}

SuiteReport verify_deviation(const LinkConfig& cfg, std::uint64_t rollouts, std::uint64_t seed, int lanes) {
    SuiteReport report{"deviation", {}};
    const LinkConfig c = cfg.validated();
    const std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const std::vector<DeviationCell> cells = deviation_sweep(c, if_policy(c), rhos, rollouts, seed, lanes);

    double worst_mc = std::numeric_limits<double>::infinity();
    double worst_exact = std::numeric_limits<double>::infinity();
    std::size_t mc_fail = 0;
    std::size_t bound_fail = 0;
    std::size_t equality_fail = 0;
    std::ostringstream where;
    for (const DeviationCell& cell : cells) {
        const double slack = cell.mc.gap + 3.0 * cell.mc.std_error;
        worst_mc = std::min(worst_mc, slack);
        worst_exact = std::min(worst_exact, cell.exact_gap);
        if (slack < 0.0) {
            if (mc_fail < 6) {
                where << " (" << cell.mc.state.b << "," << cell.mc.state.m << ";rho=" << cell.mc.rho
                      << ";gap=" << cell.mc.gap << ")";
            }
            ++mc_fail;
        }
        if (!cell.bound.bound_holds) ++bound_fail;
        if (!cell.bound.bound_equals_decode) ++equality_fail;
    }
    std::ostringstream detail;
    detail << "cells=" << cells.size() << " mc_negative=" << mc_fail << " min_exact_gap=" << worst_exact
           << " bound_violations=" << bound_fail << " bound_ne_decode=" << equality_fail;
    if (mc_fail > 0) detail << " first:" << where.str();
    report.lines.push_back({c.to_string() + " rollouts=" + std::to_string(rollouts), worst_mc,
                            mc_fail == 0 && bound_fail == 0 && equality_fail == 0, detail.str()});
    return report;
}

SuiteReport verify_bmax() {
    SuiteReport report{"bmax", {}};
    for (const LinkConfig& base : table_configs()) {
        LinkConfig wide = base;
        wide.b_max = base.e_d + 2 * base.e;
        const BmaxInvarianceReport r = check_bmax_invariance(wide, 2);
        report.lines.push_back({wide.to_string() + " vs b_max=" + std::to_string(r.b_max_extended),
                                r.bound - r.difference, r.ok, ""});
        LinkConfig tight = base;
        tight.b_max = base.e_d + base.e;
        const BmaxInvarianceReport t = check_bmax_invariance(tight, 1);
        report.lines.push_back({tight.to_string() + " vs b_max=" + std::to_string(t.b_max_extended),
                                t.bound - t.difference, t.ok, ""});
    }
    return report;
}

}  // namespace harqeh

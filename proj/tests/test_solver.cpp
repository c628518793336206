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

#include "harqeh/solver.hpp"

#include "harqeh/verify.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>

using namespace harqeh;
using Catch::Approx;

namespace {

// Plain asynchronous value iteration over a shuffled state order each sweep,
// built directly from step_ts. Independent of the solver's internals.
std::vector<double> shuffled_vi(const LinkConfig& cfg, std::uint64_t seed) {
    const StateSpace space(cfg);
    std::vector<double> k(space.size(), 0.0);
    std::vector<std::size_t> order(space.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 gen(seed);
    for (int sweep = 0; sweep < 200000; ++sweep) {
        std::shuffle(order.begin(), order.end(), gen);
        double change = 0.0;
        for (std::size_t i : order) {
            const LatticeState s = space.state(i);
            if (is_absorbing(s, cfg)) continue;
            auto expect = [&](TsAction a) {
                return 1.0 + cfg.lambda * k[space.index(step_ts(s, a, ChannelState::Good, cfg))] +
                       (1.0 - cfg.lambda) * k[space.index(step_ts(s, a, ChannelState::Bad, cfg))];
            };
            double best = expect(TsAction::Harvest);
            if (allowed_actions(s, cfg).decode) best = std::min(best, expect(TsAction::Decode));
            change = std::max(change, std::abs(best - k[i]));
            k[i] = best;
        }
        if (change < 1e-14) break;
    }
    return k;
}

// At lambda = 1 every transition is deterministic: shortest path by BFS.
int deterministic_shortest_path(const LinkConfig& cfg) {
    const StateSpace space(cfg);
    std::map<std::size_t, int> dist;
    std::deque<LatticeState> q{{0, 0}};
    dist[space.index({0, 0})] = 0;
    while (!q.empty()) {
        const LatticeState s = q.front();
        q.pop_front();
        const int d = dist[space.index(s)];
        if (is_absorbing(s, cfg)) return d;
        const ActionSet acts = allowed_actions(s, cfg);
        for (TsAction a : {TsAction::Harvest, TsAction::Decode}) {
            if (a == TsAction::Decode && !acts.decode) continue;
            const LatticeState n = step_ts(s, a, ChannelState::Good, cfg);
            if (dist.emplace(space.index(n), d + 1).second) q.push_back(n);
        }
    }
    return -1;
}

}  // namespace

TEST_CASE("hand-solved unit config", "[solver]") {
    const ValueTable vt = value_iteration_ssp(configs::unit());
    CHECK(vt.at({0, 0}) == Approx(5.0).margin(1e-11));
    CHECK(vt.at({1, 0}) == Approx(3.0).margin(1e-11));
    CHECK(vt.at({0, 1}) == Approx(2.0).margin(1e-11));
    CHECK(vt.at({1, 1}) == 0.0);
    CHECK(vt.residual <= kDefaultSolverTol);

    const QValues q = q_values(vt, {1, 0});
    CHECK(q.q_eh == Approx(3.0).margin(1e-11));
    REQUIRE(q.q_id);
    CHECK(*q.q_id == Approx(3.0).margin(1e-11));
    CHECK(vt.is_tie({1, 0}));
    CHECK_FALSE(q_values(vt, {0, 0}).q_id);
    CHECK_THROWS_AS(q_values(vt, {1, 1}), PreconditionError);
}

TEST_CASE("table reproduction within the published tolerance", "[solver]") {
    const double table1[] = {15.9910, 15.8103, 15.6235, 15.2490, 14.4992};
    for (int r2 = 1; r2 <= 5; ++r2) {
        CHECK(value_iteration_ssp(configs::table1(r2)).at({0, 0}) == Approx(table1[r2 - 1]).margin(0.05));
    }
    const double table2[] = {40.8904, 20.7979, 14.0320, 10.5985, 8.4989};
    for (int l = 1; l <= 5; ++l) {
        CHECK(value_iteration_ssp(configs::table2(l / 10.0)).at({0, 0}) == Approx(table2[l - 1]).margin(0.10));
    }
}

TEST_CASE("absorbing states have k = 0 and the Bellman residual is small", "[solver]") {
    for (const LinkConfig& cfg : {configs::figure(), configs::table1(3), configs::table2(0.1)}) {
        const ValueTable vt = value_iteration_ssp(cfg);
        CHECK(vt.residual <= kDefaultSolverTol);
        for (std::size_t i = 0; i < vt.space.size(); ++i) {
            if (vt.space.absorbing(i)) {
                CHECK(vt.k[i] == 0.0);
                continue;
            }
            const double best = std::isnan(vt.q_id[i]) ? vt.q_eh[i] : std::min(vt.q_eh[i], vt.q_id[i]);
            CHECK(vt.k[i] == Approx(best).margin(1e-11));
            CHECK(vt.k[i] >= 1.0);
        }
    }
}

TEST_CASE("fixed point does not depend on sweep order", "[solver]") {
    const LinkConfig cfgs[] = {configs::figure(), configs::table1(3), configs::table2(0.3),
                               LinkConfig{0.35, 7.0, 2.5, 3, 4, 0}.validated()};
    for (const LinkConfig& cfg : cfgs) {
        const ValueTable gs = value_iteration_ssp(cfg);
        const ValueTable jac = value_iteration_ssp_jacobi(cfg);
        const std::vector<double> shuffled = shuffled_vi(cfg, 99);
        for (std::size_t i = 0; i < gs.k.size(); ++i) {
            CHECK(gs.k[i] == Approx(jac.k[i]).margin(1e-9));
            CHECK(gs.k[i] == Approx(shuffled[i]).margin(1e-9));
        }
    }
}

TEST_CASE("k is monotone in battery and information", "[solver]") {
    CHECK(verify_monotone().ok());
}

TEST_CASE("deterministic channel matches shortest path", "[solver]") {
    for (int e = 1; e <= 3; ++e) {
        for (int e_d = 1; e_d <= 6; ++e_d) {
            for (double r2 : {1.0, 2.0, 5.0}) {
                const LinkConfig cfg = LinkConfig{1.0, 5.0, r2, e, e_d, 0}.validated();
                const int expected = deterministic_shortest_path(cfg);
                CHECK(value_iteration_ssp(cfg).at({0, 0}) == Approx(expected).margin(1e-12));
                // Harvest until one decode slot can be afforded on top of e_d.
                CHECK(expected == (e_d + 1 + e - 1) / e + 1);
            }
        }
    }
}

TEST_CASE("tie region of the policy-grid config", "[solver]") {
    const LinkConfig cfg = configs::figure();
    const ValueTable vt = value_iteration_ssp(cfg);
    const int cap = vt.space.lattice().cap_index();
    for (int b = 0; b <= cfg.b_max; ++b) {
        for (int m = 0; m <= cap; ++m) {
            const LatticeState s{b, m};
            if (is_absorbing(s, cfg)) continue;
            const QValues q = q_values(vt, s);
            INFO("b=" << b << " m=" << m);
            if (b == 0 || m == cap) {
                CHECK_FALSE(q.q_id);
            } else if (b <= cfg.e_d) {
                CHECK(std::abs(q.q_eh - *q.q_id) <= kDefaultTieTol);
                CHECK(vt.is_tie(s));
            } else {
                CHECK(q.q_eh - *q.q_id > kDefaultTieTol);
            }
        }
    }
}

TEST_CASE("extract_policy honours the tie-break", "[solver]") {
    const LinkConfig cfg = configs::figure();
    const ValueTable vt = value_iteration_ssp(cfg);
    const ActionGrid eh = extract_policy(vt, TieBreak::PreferEh);
    const ActionGrid id = extract_policy(vt, TieBreak::PreferId);
    const ActionGrid mark = extract_policy(vt, TieBreak::MarkTie);
    const int cap = vt.space.lattice().cap_index();
    for (const LatticeState& s : vt.space.states()) {
        INFO("b=" << s.b << " m=" << s.m);
        if (is_absorbing(s, cfg)) {
            CHECK(eh.at(s) == Cell::Absorb);
            continue;
        }
        const bool forced = s.b == 0 || s.m == cap;
        // BF with threshold e_d + 1.
        CHECK(eh.at(s) == (forced || s.b <= cfg.e_d ? Cell::Eh : Cell::Id));
        // IF.
        CHECK(id.at(s) == (forced ? Cell::Eh : Cell::Id));
        CHECK(mark.at(s) == (forced ? Cell::Eh : s.b <= cfg.e_d ? Cell::Tie : Cell::Id));
    }
}

TEST_CASE("discounted value iteration", "[solver]") {
    const LinkConfig cfg = configs::unit();
    SECTION("beta = 0 gives the one-step reward") {
        const ValueTable vt = value_iteration_discounted(cfg, 0.0);
        for (std::size_t i = 0; i < vt.space.size(); ++i) CHECK(vt.k[i] == (vt.space.absorbing(i) ? 0.0 : -1.0));
    }
    SECTION("beta close to 1 approaches the SSP value") {
        const ValueTable vt = value_iteration_discounted(cfg, 0.999999);
        CHECK(-vt.at({0, 0}) == Approx(5.0).margin(1e-4));
        CHECK(vt.at({1, 1}) == 0.0);
    }
    SECTION("monotone convergence as beta increases") {
        for (const LinkConfig& c : {cfg, configs::table1(1), configs::figure()}) {
            const double k = value_iteration_ssp(c).at({0, 0});
            double prev = 0.0;
            for (int p = 1; p <= 9; ++p) {
                const double beta = 1.0 - std::pow(10.0, -p);
                const double v = -value_iteration_discounted(c, beta).at({0, 0});
                CHECK(v > prev);
                CHECK(v <= k + 1e-9);
                prev = v;
            }
            CHECK(prev == Approx(k).margin(1e-6));
        }
    }
    SECTION("unrepresentable discount factors are rejected") {
        CHECK_THROWS_AS(value_iteration_discounted(cfg, 1.0 - 1e-17), std::invalid_argument);
        CHECK_THROWS_AS(value_iteration_discounted(cfg, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(value_iteration_discounted(cfg, -0.1), std::invalid_argument);
    }
}

TEST_CASE("b_max truncation does not change k(0,0)", "[solver]") {
    for (int r2 = 1; r2 <= 5; ++r2) {
        LinkConfig c = configs::table1(r2);
        c.b_max = c.e_d + 2 * c.e;
        const BmaxInvarianceReport r = check_bmax_invariance(c, 2);
        CHECK(r.b_max_extended == c.e_d + 4 * c.e);
        CHECK(r.ok);
        LinkConfig tight = configs::table1(r2);
        tight.b_max = tight.e_d + tight.e;
        CHECK(check_bmax_invariance(tight, 1).ok);
    }
    CHECK(verify_bmax().ok());
    CHECK_THROWS_AS(check_bmax_invariance(configs::unit(), 0), std::invalid_argument);
}

TEST_CASE("non-convergence is reported with the residual", "[solver]") {
    SolverOptions opts;
    opts.max_iter = 2;
    try {
        (void)value_iteration_ssp(configs::table2(0.1), opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
    }
}

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

#include "harqeh/absorption.hpp"

#include "harqeh/montecarlo.hpp"
#include "harqeh/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace harqeh {

namespace {

struct Transition {
    std::size_t to;
    double p;
};

// Outgoing transitions of transient state i under a harvest probability.
std::vector<Transition> transitions(const StateSpace& space, std::size_t i, double p_eh) {
    const LinkConfig& cfg = space.config();
    const InfoLattice& lattice = space.lattice();
    const LatticeState s = space.state(i);
    std::vector<Transition> out;
    if (p_eh > 0.0) {
        out.push_back({space.index({std::min(s.b + cfg.e, cfg.b_max), s.m}), p_eh * cfg.lambda});
        out.push_back({i, p_eh * (1.0 - cfg.lambda)});
    }
    if (p_eh < 1.0) {
        out.push_back({space.index({s.b - 1, lattice.cap_index()}), (1.0 - p_eh) * cfg.lambda});
        out.push_back({space.index({s.b - 1, lattice.add_bad(s.m)}), (1.0 - p_eh) * (1.0 - cfg.lambda)});
    }
    return out;
}

}  // namespace

AbsorptionTable mean_absorption_times(const Policy& policy, const LinkConfig& cfg) {
    AbsorptionTable table{StateSpace(cfg), {}, policy.spec(), 0.0};
    const StateSpace& space = table.space;
    const std::size_t n = space.size();

    std::vector<std::vector<Transition>> rows(n);
    std::vector<std::vector<std::size_t>> preds(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (space.absorbing(i)) continue;
        const auto p = policy.harvest_probability(space.state(i));
        if (!p) throw std::invalid_argument("mean_absorption_times: '" + policy.spec() + "' is not a stationary TS policy");
        if (*p < 1.0 && space.state(i).b < 1) {
            throw std::invalid_argument("mean_absorption_times: policy decodes with an empty battery");
        }
        rows[i] = transitions(space, i, *p);
        for (const Transition& t : rows[i]) {
            if (t.p > 0.0) preds[t.to].push_back(i);
        }
    }

    // States that can reach absorption with positive probability.
    std::vector<char> reaches(n, 0);
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (space.absorbing(i)) {
            reaches[i] = 1;
            frontier.push_back(i);
        }
    }
    while (!frontier.empty()) {
        const std::size_t j = frontier.front();
        frontier.pop_front();
        for (std::size_t i : preds[j]) {
            if (!reaches[i]) {
                reaches[i] = 1;
                frontier.push_back(i);
            }
        }
    }
    std::vector<LatticeState> trapped;
    for (std::size_t i = 0; i < n; ++i) {
        if (!reaches[i]) trapped.push_back(space.state(i));
    }
    if (!trapped.empty()) {
        std::ostringstream os;
        os << "policy '" << policy.spec() << "' never reaches absorption from " << trapped.size() << " state(s):";
        for (std::size_t t = 0; t < std::min<std::size_t>(trapped.size(), 8); ++t) {
            os << " (" << trapped[t].b << "," << trapped[t].m << ")";
        }
        throw TrappedStatesError(os.str(), std::move(trapped));
    }

    std::vector<std::ptrdiff_t> pos(n, -1);
    std::vector<std::size_t> transient;
    for (std::size_t i = 0; i < n; ++i) {
        if (!space.absorbing(i)) {
            pos[i] = static_cast<std::ptrdiff_t>(transient.size());
            transient.push_back(i);
        }
    }
    const auto t = static_cast<Eigen::Index>(transient.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(t, t);
    for (Eigen::Index r = 0; r < t; ++r) {
        for (const Transition& tr : rows[transient[static_cast<std::size_t>(r)]]) {
            if (pos[tr.to] >= 0) a(r, pos[tr.to]) -= tr.p;
        }
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(t);
    const Eigen::VectorXd k = a.partialPivLu().solve(ones);
    table.max_residual = (a * k - ones).cwiseAbs().maxCoeff();
    if (!(table.max_residual <= 1e-10)) {
        std::ostringstream os;
        os << "mean_absorption_times: residual " << table.max_residual << " exceeds 1e-10";
        throw std::runtime_error(os.str());
    }

    table.k.assign(n, 0.0);
    for (Eigen::Index r = 0; r < t; ++r) table.k[transient[static_cast<std::size_t>(r)]] = k(r);
    return table;
}

double lemma1_closed_form(double b, const LinkConfig& cfg) {
    const LinkConfig c = cfg.validated();
    if (!(b >= 0.0)) throw std::domain_error("lemma1_closed_form: battery must be non-negative");
    if (b >= c.e_d) throw std::domain_error("lemma1_closed_form: (b, r1) with b >= e_d is absorbing");
    const double i = std::ceil((c.e_d - b) / c.e);
    return i / c.lambda;
}

namespace {

// Exact mean time of a deterministic policy from real states, by memoized
// first-step analysis. Harvesting is a geometric wait for a GOOD slot.
class ExactEvaluator {
public:
    ExactEvaluator(const Policy& policy, const LinkConfig& cfg) : policy_(policy), cfg_(cfg) {}

    double operator()(const RealState& s) {
        if (is_absorbing(s, cfg_)) return 0.0;
        const Key key{s.b, s.m};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (!active_.insert(key).second) {
            throw std::runtime_error("one_step_mean_time: continuation cycles without progress");
        }
        StreamRng unused(0, 0);
        const double rho = policy_.decide(s, 1, unused);
        double k = 0.0;
        if (rho == 1.0) {
            const RealState up = step_ps(s, 1.0, ChannelState::Good, cfg_);
            if (up == s) throw std::runtime_error("one_step_mean_time: harvesting at a full battery forever");
            k = 1.0 / cfg_.lambda + (*this)(up);
        } else {
            k = 1.0 + cfg_.lambda * (*this)(step_ps(s, rho, ChannelState::Good, cfg_)) +
                (1.0 - cfg_.lambda) * (*this)(step_ps(s, rho, ChannelState::Bad, cfg_));
        }
        active_.erase(key);
        memo_.emplace(key, k);
        return k;
    }

private:
    using Key = std::pair<double, double>;
    const Policy& policy_;
    const LinkConfig& cfg_;
    std::map<Key, double> memo_;
    std::set<Key> active_;
};

}  // namespace

double one_step_mean_time(const RealState& s, double rho, const Policy& continuation, const LinkConfig& cfg) {
    const LinkConfig c = cfg.validated();
    if (is_absorbing(s, c)) return 0.0;
    ExactEvaluator k(continuation, c);
    return 1.0 + c.lambda * k(step_ps(s, rho, ChannelState::Good, c)) +
           (1.0 - c.lambda) * k(step_ps(s, rho, ChannelState::Bad, c));
}

DeviationGap one_step_deviation_gap(const LatticeState& s, double rho, PolicyPtr continuation,
                                    const LinkConfig& cfg, std::uint64_t rollouts, std::uint64_t seed, int lanes) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("one_step_deviation_gap: rho must lie in (0, 1)");
    if (rollouts < 1) throw std::invalid_argument("one_step_deviation_gap: rollouts must be >= 1");
    const LinkConfig c = cfg.validated();
    const InfoLattice lattice(c);
    if (s.b < 1 || s.m >= lattice.cap_index()) {
        throw PreconditionError("one_step_deviation_gap: state needs b >= 1 and m < r1");
    }
    const PolicyPtr split = split_once_policy(rho, continuation);
    const PolicyPtr decode = decode_once_policy(continuation);
    const RealState start = to_real(s, c);
    const auto n = static_cast<std::int64_t>(rollouts);

    IntegerMoments diff;
    IntegerMoments split_total;
    IntegerMoments decode_total;
#pragma omp parallel num_threads(resolve_lanes(lanes))
    {
        IntegerMoments d_local;
        IntegerMoments s_local;
        IntegerMoments k_local;
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            StreamRng rng_s(seed, static_cast<std::uint64_t>(r));
            StreamRng rng_d(seed, static_cast<std::uint64_t>(r));
            const auto ks = static_cast<std::int64_t>(run_episode(*split, c, rng_s, start));
            const auto kd = static_cast<std::int64_t>(run_episode(*decode, c, rng_d, start));
            d_local.add(ks - kd);
            s_local.add(ks);
            k_local.add(kd);
        }
#pragma omp critical(harqeh_deviation_merge)
        {
            diff.merge(d_local);
            split_total.merge(s_local);
            decode_total.merge(k_local);
        }
    }

    DeviationGap out;
    out.state = s;
    out.rho = rho;
    out.gap = diff.mean();
    out.std_error = diff.std_error();
    out.k_split = split_total.mean();
    out.k_decode = decode_total.mean();
    out.rollouts = rollouts;
    return out;
}

SplitBoundCheck split_bound_check(const LatticeState& s, double rho, const Policy& continuation,
                                  const AbsorptionTable& continuation_table, double tol) {
    const LinkConfig& c = continuation_table.space.config();
    const InfoLattice& lattice = continuation_table.space.lattice();
    const RealState start = to_real(s, c);
    const double after_split_battery = std::min(s.b - 1.0 + rho * c.e, static_cast<double>(c.b_max));
    const double full_info_term =
        after_split_battery >= c.e_d ? 0.0 : lemma1_closed_form(after_split_battery, c);

    SplitBoundCheck out;
    out.k_split = one_step_mean_time(start, rho, continuation, c);
    out.k_decode = 1.0 + c.lambda * continuation_table.at({s.b - 1, lattice.cap_index()}) +
                   (1.0 - c.lambda) * continuation_table.at({s.b - 1, lattice.add_bad(s.m)});
    out.lower_bound = 1.0 + c.lambda * full_info_term +
                      (1.0 - c.lambda) * continuation_table.at({s.b - 1, lattice.add_bad(s.m)});
    out.bound_holds = out.k_split >= out.lower_bound - tol;
    out.bound_equals_decode = std::abs(out.lower_bound - out.k_decode) <= tol;
    return out;
}

std::vector<DeviationCell> deviation_sweep(const LinkConfig& cfg, PolicyPtr continuation,
                                           const std::vector<double>& rhos, std::uint64_t rollouts,
                                           std::uint64_t master_seed, int lanes) {
    const LinkConfig c = cfg.validated();
    const StateSpace space(c);
    const AbsorptionTable table = mean_absorption_times(*continuation, c);
    std::vector<DeviationCell> cells;
    std::uint64_t cell_index = 0;
    for (const LatticeState& s : space.states()) {
        if (s.b < 1 || s.m >= space.lattice().cap_index()) continue;
        for (double rho : rhos) {
            DeviationCell cell;
            cell.mc = one_step_deviation_gap(s, rho, continuation, c, rollouts, derive_seed(master_seed, cell_index),
                                             lanes);
            cell.bound = split_bound_check(s, rho, *continuation, table);
            cell.exact_gap = cell.bound.k_split - cell.bound.k_decode;
            cells.push_back(cell);
            ++cell_index;
        }
    }
    return cells;
}

}  // namespace harqeh

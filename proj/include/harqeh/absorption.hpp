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

#pragma once

#include "harqeh/model.hpp"
#include "harqeh/policies.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace harqeh {

/// Mean slots to absorption of the chain induced by a fixed TS policy.
struct AbsorptionTable {
    StateSpace space;
    std::vector<double> k;  ///< 0 on absorbing states
    std::string policy_id;
    double max_residual = 0.0;  ///< max |((I - Q) k - 1)_s| over transient s

    [[nodiscard]] double at(const LatticeState& s) const { return k[space.index(s)]; }
};

/// The policy never reaches absorption from some states.
class TrappedStatesError : public std::runtime_error {
public:
    TrappedStatesError(const std::string& what, std::vector<LatticeState> trapped)
        : std::runtime_error(what), trapped_(std::move(trapped)) {}
    [[nodiscard]] const std::vector<LatticeState>& trapped() const { return trapped_; }

private:
    std::vector<LatticeState> trapped_;
};

/// Solves (I - Q) k = 1 over the transient lattice states, where Q mixes the
/// EH and ID rows by the policy's harvest probability. Throws
/// TrappedStatesError for improper policies and std::invalid_argument for
/// policies that are not stationary TS rules.
[[nodiscard]] AbsorptionTable mean_absorption_times(const Policy& policy, const LinkConfig& cfg);

/// Mean time to absorption from (b, r1): ceil((e_d - b) / e) / lambda.
/// Valid for any policy that harvests whenever m = r1. Accepts fractional
/// batteries. Throws std::domain_error for b >= e_d or b < 0.
[[nodiscard]] double lemma1_closed_form(double b, const LinkConfig& cfg);

/// Expected slots to absorption when the first slot uses split `rho` and
/// `continuation` decides afterwards, evaluated exactly by first-step
/// recursion over the (finite) set of real states the continuation visits.
/// `continuation` must be deterministic (BF, IF or tabular).
[[nodiscard]] double one_step_mean_time(const RealState& s, double rho, const Policy& continuation,
                                        const LinkConfig& cfg);

struct DeviationGap {
    LatticeState state;
    double rho = 0.0;
    double gap = 0.0;        ///< mean of k^S - k^D over matched rollouts
    double std_error = 0.0;  ///< of the paired difference
    double k_split = 0.0;
    double k_decode = 0.0;
    std::uint64_t rollouts = 0;
};

/// Monte Carlo estimate of k^S(s) - k^D(s): split at `rho` versus decode in
/// the current slot, both following `continuation` afterwards. Rollout r of
/// both arms uses StreamRng(seed, r), so the arms see the same channel.
[[nodiscard]] DeviationGap one_step_deviation_gap(const LatticeState& s, double rho, PolicyPtr continuation,
                                                  const LinkConfig& cfg, std::uint64_t rollouts,
                                                  std::uint64_t seed, int lanes = 0);

/// The split-versus-decode lower bound used to argue for time switching:
///   k^S >= 1 + lambda k(b-1+rho e, r1) + (1-lambda) k(b-1, m+r2)
/// with the first term from the closed form. The argument then needs the
/// bound to coincide with k^D.
struct SplitBoundCheck {
    double k_split = 0.0;      ///< exact, off-lattice
    double k_decode = 0.0;     ///< exact, on-lattice
    double lower_bound = 0.0;  ///< right-hand side above
    bool bound_holds = false;       ///< k_split >= lower_bound
    bool bound_equals_decode = false;  ///< lower_bound == k_decode
};

[[nodiscard]] SplitBoundCheck split_bound_check(const LatticeState& s, double rho, const Policy& continuation,
                                                const AbsorptionTable& continuation_table, double tol = 1e-10);

struct DeviationCell {
    DeviationGap mc;
    double exact_gap = 0.0;
    SplitBoundCheck bound;
};

/// Every transient state with b >= 1 and m < r1, crossed with `rhos`.
/// Cell c uses seed derive_seed(master_seed, c).
[[nodiscard]] std::vector<DeviationCell> deviation_sweep(const LinkConfig& cfg, PolicyPtr continuation,
                                                         const std::vector<double>& rhos,
                                                         std::uint64_t rollouts, std::uint64_t master_seed,
                                                         int lanes = 0);

}  // namespace harqeh

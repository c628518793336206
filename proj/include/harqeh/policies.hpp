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
#include "harqeh/rng.hpp"
#include "harqeh/solver.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace harqeh {

/// Decision rule mapping the observed state to a split ratio rho in [0, 1].
///
/// Implementations are immutable. Randomized rules draw only from the stream
/// passed to decide(), so a policy can be shared by concurrent episodes.
/// The forced-harvest guards (b < 1, m >= r1) are applied here, before the
/// concrete rule is consulted.
class Policy {
public:
    explicit Policy(const LinkConfig& cfg) : cfg_(cfg.validated()) {}
    virtual ~Policy() = default;

    Policy(const Policy&) = delete;
    Policy& operator=(const Policy&) = delete;

    /// `slot` counts decisions since the episode started (0 for the first).
    [[nodiscard]] double decide(const RealState& s, std::uint64_t slot, StreamRng& rng) const {
        if (forced_harvest(s)) return 1.0;
        return choose(s, slot, rng);
    }

    /// Probability of harvesting at a lattice state for stationary TS rules;
    /// nullopt for rules that split power or depend on the slot index.
    [[nodiscard]] std::optional<double> harvest_probability(const LatticeState& s) const {
        if (forced_harvest(to_real(s, cfg_))) return 1.0;
        return lattice_harvest_probability(s);
    }

    [[nodiscard]] bool forced_harvest(const RealState& s) const { return s.b < 1.0 || s.m >= cfg_.r1; }

    /// Short spec string, e.g. "bf:threshold=6".
    [[nodiscard]] virtual std::string spec() const = 0;
    [[nodiscard]] const LinkConfig& config() const { return cfg_; }

protected:
    virtual double choose(const RealState& s, std::uint64_t slot, StreamRng& rng) const = 0;
    virtual std::optional<double> lattice_harvest_probability(const LatticeState& s) const = 0;

    LinkConfig cfg_;
};

using PolicyPtr = std::shared_ptr<const Policy>;

/// Battery First: harvest until the battery reaches `threshold`, then decode.
[[nodiscard]] PolicyPtr bf_policy(const LinkConfig& cfg, std::optional<int> threshold = std::nullopt);

/// Information First: decode whenever the guards allow it.
[[nodiscard]] PolicyPtr if_policy(const LinkConfig& cfg);

/// Coin Toss: decode above e_d, fair coin for 1 <= b <= e_d.
[[nodiscard]] PolicyPtr ct_policy(const LinkConfig& cfg);

/// Lattice lookup into a VIA decision grid. Real states are floored onto the
/// lattice. `tie_break` must be PreferEh or PreferId.
[[nodiscard]] PolicyPtr tabular_policy(const ValueTable& vt, TieBreak tie_break);

/// Splits at `rho0` in the first slot of an episode, then follows
/// `continuation`. Requires 0 < rho0 < 1.
[[nodiscard]] PolicyPtr split_once_policy(double rho0, PolicyPtr continuation);

/// Decodes (rho = 0) in the first slot, then follows `continuation`.
[[nodiscard]] PolicyPtr decode_once_policy(PolicyPtr continuation);

/// Builds a policy from its spec string: "bf[:threshold=N]", "if", "ct",
/// "tabular[:tie=prefer-eh|prefer-id]". Tabular specs solve the MDP.
/// Throws std::invalid_argument on malformed specs.
[[nodiscard]] PolicyPtr make_policy(std::string_view spec, const LinkConfig& cfg);

[[nodiscard]] std::string_view to_string(TieBreak t);
[[nodiscard]] TieBreak parse_tie_break(std::string_view s);

}  // namespace harqeh

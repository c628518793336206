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
#include "harqeh/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace harqeh {

inline constexpr std::uint64_t kDefaultSlotCap = 10'000'000;

/// An episode hit the slot cap, or (from estimate) some episode did.
class ImproperPolicyError : public std::runtime_error {
public:
    ImproperPolicyError(const std::string& what, std::uint64_t episode)
        : std::runtime_error(what), episode_(episode) {}
    [[nodiscard]] std::uint64_t episode() const { return episode_; }

private:
    std::uint64_t episode_;
};

/// Thread count for an OpenMP region: `lanes` if positive, else the
/// runtime default.
[[nodiscard]] int resolve_lanes(int lanes);

struct EstimateResult {
    double mean = 0.0;
    double std_error = 0.0;  ///< sample std / sqrt(n); 0 when n = 1
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::uint64_t n_episodes = 0;
    std::uint64_t master_seed = 0;
    std::string policy_spec;

    friend bool operator==(const EstimateResult&, const EstimateResult&) = default;
};

struct EstimateOptions {
    RealState start{};
    int lanes = 0;  ///< OpenMP threads; 0 uses the runtime default
    std::uint64_t slot_cap = kDefaultSlotCap;
};

/// Slots until decode for one episode from `start`. Each slot draws the
/// channel first, then asks the policy, then applies step_ps. Returns 0 if
/// `start` is already decodable.
[[nodiscard]] std::uint64_t run_episode(const Policy& policy, const LinkConfig& cfg, StreamRng& rng,
                                        RealState start = {}, std::uint64_t slot_cap = kDefaultSlotCap);

/// Sample mean of n_episodes episodes. Episode i uses StreamRng(master_seed, i),
/// and counts are accumulated as exact integers, so the result is
/// bit-identical for any lane count.
[[nodiscard]] EstimateResult estimate(const Policy& policy, const LinkConfig& cfg, std::uint64_t n_episodes,
                                      std::uint64_t master_seed, const EstimateOptions& opts = {});

/// Single-threaded reference for estimate(); same result bit for bit.
[[nodiscard]] EstimateResult estimate_serial(const Policy& policy, const LinkConfig& cfg,
                                             std::uint64_t n_episodes, std::uint64_t master_seed,
                                             const EstimateOptions& opts = {});

__extension__ using Int128 = __int128;

/// Exact running sums of integer samples.
struct IntegerMoments {
    std::uint64_t n = 0;
    Int128 sum = 0;
    Int128 sum_sq = 0;

    void add(std::int64_t x) {
        ++n;
        sum += x;
        sum_sq += static_cast<Int128>(x) * x;
    }
    void merge(const IntegerMoments& o) {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
    [[nodiscard]] double mean() const;
    /// Standard error of the mean (sample variance with n - 1).
    [[nodiscard]] double std_error() const;
};

}  // namespace harqeh

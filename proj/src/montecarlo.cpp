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

#include "harqeh/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace harqeh {

int resolve_lanes(int lanes) {
    if (lanes > 0) return lanes;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double IntegerMoments::mean() const {
    return n == 0 ? 0.0 : static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(n));
}

double IntegerMoments::std_error() const {
    if (n < 2) return 0.0;
    const auto nn = static_cast<Int128>(n);
    // n * sum_sq - sum^2 = n (n - 1) s^2, exact in integers.
    const Int128 scaled = nn * sum_sq - sum * sum;
    const long double var = static_cast<long double>(scaled) / (static_cast<long double>(n) * (n - 1));
    return static_cast<double>(std::sqrt(var / static_cast<long double>(n)));
}

std::uint64_t run_episode(const Policy& policy, const LinkConfig& cfg, StreamRng& rng, RealState start,
                          std::uint64_t slot_cap) {
    const LinkConfig c = cfg.validated();
    RealState s = start;
    std::uint64_t slot = 0;
    while (!is_absorbing(s, c)) {
        if (slot >= slot_cap) {
            std::ostringstream os;
            os << "episode exceeded " << slot_cap << " slots under policy '" << policy.spec()
               << "' (improper policy?)";
            throw ImproperPolicyError(os.str(), 0);
        }
        const ChannelState g = rng.bernoulli(c.lambda) ? ChannelState::Good : ChannelState::Bad;
        const double rho = policy.decide(s, slot, rng);
        s = step_ps(s, rho, g, c);
        ++slot;
    }
    return slot;
}

namespace {

EstimateResult finish(const IntegerMoments& acc, const Policy& policy, std::uint64_t seed) {
    EstimateResult r;
    r.n_episodes = acc.n;
    r.master_seed = seed;
    r.policy_spec = policy.spec();
    r.mean = acc.mean();
    r.std_error = acc.std_error();
    r.ci95_low = r.mean - 1.96 * r.std_error;
    r.ci95_high = r.mean + 1.96 * r.std_error;
    return r;
}

[[noreturn]] void rethrow_with_episode(const ImproperPolicyError& e, std::uint64_t episode) {
    std::ostringstream os;
    os << e.what() << " at episode " << episode;
    throw ImproperPolicyError(os.str(), episode);
}

void check_count(std::uint64_t n) {
    if (n < 1) throw std::invalid_argument("estimate: n_episodes must be >= 1");
}

}  // namespace

EstimateResult estimate_serial(const Policy& policy, const LinkConfig& cfg, std::uint64_t n_episodes,
                               std::uint64_t master_seed, const EstimateOptions& opts) {
    check_count(n_episodes);
    const LinkConfig c = cfg.validated();
    IntegerMoments acc;
    for (std::uint64_t i = 0; i < n_episodes; ++i) {
        StreamRng rng(master_seed, i);
        try {
            acc.add(static_cast<std::int64_t>(run_episode(policy, c, rng, opts.start, opts.slot_cap)));
        } catch (const ImproperPolicyError& e) {
            rethrow_with_episode(e, i);
        }
    }
    return finish(acc, policy, master_seed);
}

EstimateResult estimate(const Policy& policy, const LinkConfig& cfg, std::uint64_t n_episodes,
                        std::uint64_t master_seed, const EstimateOptions& opts) {
    check_count(n_episodes);
    const LinkConfig c = cfg.validated();
    const auto n = static_cast<std::int64_t>(n_episodes);
    IntegerMoments total;
    std::uint64_t first_bad = std::numeric_limits<std::uint64_t>::max();
    std::string bad_what;

#pragma omp parallel num_threads(resolve_lanes(opts.lanes))
    {
        IntegerMoments local;
#pragma omp for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::uint64_t>(i);
            StreamRng rng(master_seed, idx);
            try {
                local.add(static_cast<std::int64_t>(run_episode(policy, c, rng, opts.start, opts.slot_cap)));
            } catch (const ImproperPolicyError& e) {
#pragma omp critical(harqeh_estimate_error)
                if (idx < first_bad) {
                    first_bad = idx;
                    bad_what = e.what();
                }
            }
        }
#pragma omp critical(harqeh_estimate_merge)
        total.merge(local);
    }

    if (first_bad != std::numeric_limits<std::uint64_t>::max()) {
        rethrow_with_episode(ImproperPolicyError(bad_what, first_bad), first_bad);
    }
    return finish(total, policy, master_seed);
}

}  // namespace harqeh

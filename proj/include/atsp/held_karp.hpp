#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "atsp/types.hpp"

namespace atsp {

inline constexpr int kHeldKarpMaxCities = 16;

/// Exact optimal tour cost by dynamic programming over subsets. Independent
/// of the assignment-based solver; used as a verification oracle.
inline Cost held_karp_oracle(const DistanceMatrix& d) {
    const int n = d.size();
    if (n > kHeldKarpMaxCities)
        throw std::invalid_argument("held_karp_oracle supports at most " + std::to_string(kHeldKarpMaxCities) +
                                    " cities, got " + std::to_string(n));
    if (n < 2) throw std::invalid_argument("held_karp_oracle needs at least 2 cities");

    // City 0 is the fixed start; masks range over cities 1..n-1.
    const int m = n - 1;
    const std::uint32_t full = (1u << m) - 1;
    constexpr Cost inf = kForbidden;
    std::vector<Cost> best(static_cast<std::size_t>(full + 1) * m, inf);
    auto at = [&](std::uint32_t mask, int last) -> Cost& { return best[static_cast<std::size_t>(mask) * m + last]; };

    for (int k = 0; k < m; ++k) at(1u << k, k) = d(0, k + 1);
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        for (int last = 0; last < m; ++last) {
            if (!(mask & (1u << last))) continue;
            const Cost here = at(mask, last);
            if (here >= inf) continue;
            for (int next = 0; next < m; ++next) {
                if (mask & (1u << next)) continue;
                Cost& slot = at(mask | (1u << next), next);
                slot = std::min(slot, saturating_add(here, d(last + 1, next + 1)));
            }
        }
    }
    Cost answer = inf;
    for (int last = 0; last < m; ++last) answer = std::min(answer, saturating_add(at(full, last), d(last + 1, 0)));
    return answer;
}

}  // namespace atsp

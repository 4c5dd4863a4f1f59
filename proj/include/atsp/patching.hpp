#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "atsp/assignment.hpp"
#include "atsp/types.hpp"

namespace atsp {

/// A Hamiltonian cycle, listed from city 0 in travel order.
struct Tour {
    std::vector<City> order;
    Cost cost = 0;

    friend bool operator==(const Tour&, const Tour&) = default;
};

inline Cost cycle_cost(const DistanceMatrix& d, const Cycle& c) {
    Cost total = 0;
    for (const Arc& a : c) total = saturating_add(total, d(a.from, a.to));
    return total;
}

inline City smallest_city(const Cycle& c) {
    City m = c.front().from;
    for (const Arc& a : c) m = std::min(m, a.from);
    return m;
}

/// Rotates a cycle so its first arc leaves its smallest city.
inline void canonicalize(Cycle& c) {
    const City m = smallest_city(c);
    const auto it = std::find_if(c.begin(), c.end(), [m](const Arc& a) { return a.from == m; });
    std::rotate(c.begin(), it, c.end());
}

inline Tour tour_from_cycle(const DistanceMatrix& d, const Cycle& c) {
    if (static_cast<int>(c.size()) != d.size()) throw std::invalid_argument("cycle does not visit every city");
    Tour t;
    Cycle canon = c;
    canonicalize(canon);
    for (const Arc& a : canon) t.order.push_back(a.from);
    t.cost = cycle_cost(d, canon);
    return t;
}

inline Tour tour_from_successors(const DistanceMatrix& d, const std::vector<City>& succ) {
    const auto cycles = extract_cycles(succ);
    if (cycles.size() != 1) throw std::invalid_argument("successor map is not a single cycle");
    return tour_from_cycle(d, cycles.front());
}

inline Cost tour_cost(const DistanceMatrix& d, const std::vector<City>& order) {
    Cost total = 0;
    for (std::size_t k = 0; k < order.size(); ++k)
        total = saturating_add(total, d(order[k], order[(k + 1) % order.size()]));
    return total;
}

/// Visits every city once, forms one cycle, and carries its true cost.
inline bool is_valid_tour(const DistanceMatrix& d, const Tour& t) {
    const int n = d.size();
    if (static_cast<int>(t.order.size()) != n) return false;
    std::vector<char> seen(n, 0);
    for (City c : t.order) {
        if (c < 0 || c >= n || seen[c]) return false;
        seen[c] = 1;
    }
    return tour_cost(d, t.order) == t.cost;
}

struct PatchResult {
    Cycle merged;
    Cost delta = 0;  // d_il + d_kj - d_ij - d_kl
    Arc removed_a;   // (i, j)
    Arc removed_b;   // (k, l)
};

/// Merges two disjoint cycles by swapping (i,j) in `a` and (k,l) in `b` for
/// (i,l) and (k,j), choosing the cheapest swap; ties go to the smallest (i, k).
inline PatchResult patch_once(const DistanceMatrix& d, const Cycle& a, const Cycle& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("cannot patch an empty cycle");
    std::size_t best_p = 0, best_q = 0;
    Cost best = 0;
    bool have = false;
    for (std::size_t p = 0; p < a.size(); ++p) {
        const auto [i, j] = a[p];
        for (std::size_t q = 0; q < b.size(); ++q) {
            const auto [k, l] = b[q];
            const Cost delta = d(i, l) + d(k, j) - d(i, j) - d(k, l);
            const bool better = !have || delta < best ||
                                (delta == best && std::pair(i, k) < std::pair(a[best_p].from, b[best_q].from));
            if (better) {
                have = true;
                best = delta;
                best_p = p;
                best_q = q;
            }
        }
    }

    PatchResult r;
    r.delta = best;
    r.removed_a = a[best_p];
    r.removed_b = b[best_q];
    const City i = r.removed_a.from, j = r.removed_a.to, k = r.removed_b.from, l = r.removed_b.to;
    // i -> l, around b back to k, k -> j, around a back to i.
    r.merged.reserve(a.size() + b.size());
    r.merged.push_back({i, l});
    for (std::size_t s = 1; s < b.size(); ++s) r.merged.push_back(b[(best_q + s) % b.size()]);
    r.merged.push_back({k, j});
    for (std::size_t s = 1; s < a.size(); ++s) r.merged.push_back(a[(best_p + s) % a.size()]);
    canonicalize(r.merged);
    return r;
}

/// Karp patching: merges the two cycles with fewest cities (ties by smallest
/// city) until one tour remains.
inline Tour patch_to_tour(const DistanceMatrix& d, std::vector<Cycle> cycles, int* patches = nullptr) {
    if (cycles.empty()) throw std::invalid_argument("no cycles to patch");
    auto order = [](const Cycle& x, const Cycle& y) {
        if (x.size() != y.size()) return x.size() < y.size();
        return smallest_city(x) < smallest_city(y);
    };
    int count = 0;
    while (cycles.size() > 1) {
        std::sort(cycles.begin(), cycles.end(), order);
        PatchResult r = patch_once(d, cycles[0], cycles[1]);
        cycles.erase(cycles.begin(), cycles.begin() + 2);
        cycles.push_back(std::move(r.merged));
        ++count;
    }
    if (patches) *patches = count;
    return tour_from_cycle(d, cycles.front());
}

inline Tour patch_to_tour(const DistanceMatrix& d, const Assignment& a, int* patches = nullptr) {
    return patch_to_tour(d, a.cycles, patches);
}

}  // namespace atsp

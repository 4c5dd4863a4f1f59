#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "atsp/assignment.hpp"
#include "atsp/patching.hpp"
#include "atsp/solver.hpp"
#include "atsp/types.hpp"

namespace atsp {

inline constexpr std::size_t kDefaultOptimaCap = 1'000'000;

struct OptimaCount {
    std::uint64_t count = 0;
    bool saturated = false;
};

struct BackboneReport {
    Cost optimal_cost = 0;
    Tour optimal_tour;
    std::vector<Arc> backbone_arcs;  // in optimal-tour order
    double fraction = 0;             // |backbone_arcs| / n
    std::optional<OptimaCount> optima;
    std::uint64_t solver_calls = 0;
    std::uint64_t ap_calls = 0;
};

/// All optimal tours (up to `cap`), found by branch-and-bound that prunes
/// only bounds strictly above the optimum.
inline OptimaSet enumerate_optimal_tours(const DistanceMatrix& d, std::size_t cap = kDefaultOptimaCap,
                                         bool keep_tours = false) {
    if (cap < 1) throw std::invalid_argument("optima cap must be >= 1");
    SolveOptions opts;
    opts.enumerate_all_optima = true;
    opts.optima_cap = cap;
    opts.keep_optimal_tours = keep_tours;
    SolveResult r = solve_atsp(d, opts);
    return std::move(*r.optima);
}

/// Backbone by exclusion tests, given the root relaxation and an optimal
/// solve that started from it: an arc of the optimal tour is in every optimal
/// tour iff forbidding it leaves no tour of the optimal cost. Each exclusion
/// solve re-optimises the root relaxation and only looks for a tour that
/// matches the optimum.
inline BackboneReport backbone_from(const DistanceMatrix& d, const Assignment& root, const SolveResult& best) {
    if (!best.found()) throw std::invalid_argument("backbone needs an optimal tour");
    const int n = d.size();
    BackboneReport rep;
    rep.solver_calls = 1;
    rep.ap_calls = best.metrics.ap_calls;
    rep.optimal_cost = best.cost;
    rep.optimal_tour = *best.tour;

    SolveOptions probe;
    probe.initial_upper_bound = rep.optimal_cost + 1;
    probe.target_cost = rep.optimal_cost;
    const auto& order = rep.optimal_tour.order;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Arc a{order[k], order[(k + 1) % order.size()]};
        ArcConstraints c;
        c.excluded.push_back(a);
        std::optional<SearchNode> start;
        if (auto relaxed = resolve_after_exclusion(d, root, c, a)) start = SearchNode{c, std::move(*relaxed), 0};
        const SolveResult alt = solve_atsp_from(d, std::move(start), probe);
        ++rep.solver_calls;
        rep.ap_calls += alt.metrics.ap_calls;
        if (!alt.found()) rep.backbone_arcs.push_back(a);
    }
    rep.fraction = static_cast<double>(rep.backbone_arcs.size()) / n;
    if (static_cast<int>(rep.backbone_arcs.size()) == n) rep.optima = OptimaCount{1, false};
    return rep;
}

/// Backbone of D with n + 1 solver calls. With `count_optima` the optimal
/// tours are also counted up to `cap`.
inline BackboneReport backbone_fraction(const DistanceMatrix& d, bool count_optima = false,
                                        std::size_t cap = kDefaultOptimaCap) {
    const Assignment root = solve_ap(d);
    const SolveResult best = solve_atsp_from(d, SearchNode{{}, root, 0}, SolveOptions{});
    BackboneReport rep = backbone_from(d, root, best);
    if (count_optima) {
        const OptimaSet all = enumerate_optimal_tours(d, cap);
        rep.optima = OptimaCount{all.count, all.saturated};
    }
    return rep;
}

/// Whether some Hamiltonian cycle uses only zero-cost arcs.
inline bool has_zero_cost_tour(const DistanceMatrix& d) {
    const int n = d.size();
    std::vector<char> zero_out(n, 0), zero_in(n, 0);
    for (City i = 0; i < n; ++i)
        for (City j = 0; j < n; ++j)
            if (i != j && d(i, j) == 0) zero_out[i] = zero_in[j] = 1;
    for (City i = 0; i < n; ++i)
        if (!zero_out[i] || !zero_in[i]) return false;
    SolveOptions opts;
    opts.initial_upper_bound = 1;
    opts.target_cost = 0;
    return solve_atsp(d, opts).found();
}

}  // namespace atsp

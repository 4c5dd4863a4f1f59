#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "atsp/assignment.hpp"
#include "atsp/patching.hpp"
#include "atsp/types.hpp"

namespace atsp {

/// A subproblem of the branch-and-bound tree and its assignment relaxation.
struct SearchNode {
    ArcConstraints constraints;
    Assignment relaxation;
    int depth = 0;

    [[nodiscard]] Cost bound() const noexcept { return relaxation.cost; }
};

/// A generated child; `pruned` marks an infeasible relaxation.
struct ChildNode {
    SearchNode node;
    bool pruned = false;
};

enum class NodeOrder { ascending_cost };

struct SolveOptions {
    /// Nodes whose bound is >= this are pruned. nullopt means infinity.
    std::optional<Cost> initial_upper_bound;
    bool use_patching = true;
    NodeOrder node_order = NodeOrder::ascending_cost;
    bool enumerate_all_optima = false;
    std::size_t optima_cap = 1'000'000;
    bool keep_optimal_tours = false;
    /// Stop as soon as a tour costing at most this is found.
    std::optional<Cost> target_cost;

    std::function<void(const SearchNode& parent, const std::vector<ChildNode>& children)> on_expand;
    std::function<void(Cost)> on_incumbent;
};

struct SolveMetrics {
    std::uint64_t ap_calls = 0;  // root solve plus every child re-solve
    std::uint64_t nodes_expanded = 0;
    std::uint64_t incumbent_updates = 0;
    double wall_ms = 0;
};

struct OptimaSet {
    std::uint64_t count = 0;
    bool saturated = false;  // stopped at the cap with more optima left
    std::vector<Tour> tours;
};

struct SolveResult {
    std::optional<Tour> tour;  // empty when nothing beat the initial bound
    Cost cost = kForbidden;
    Cost root_bound = kForbidden;
    SolveMetrics metrics;
    std::optional<OptimaSet> optima;

    [[nodiscard]] bool found() const noexcept { return tour.has_value(); }
};

/// Index of the cycle with the fewest arcs outside `included`; ties go to the
/// cycle holding the smallest city.
inline std::size_t select_branch_subtour(const std::vector<Cycle>& cycles, const std::vector<Arc>& included) {
    if (cycles.empty()) throw std::invalid_argument("no cycle to branch on");
    City max_city = 0;
    for (const Cycle& c : cycles)
        for (const Arc& a : c) max_city = std::max(max_city, a.from);
    std::vector<City> forced(static_cast<std::size_t>(max_city) + 1, -1);
    for (const Arc& a : included)
        if (a.from <= max_city) forced[a.from] = a.to;

    std::size_t best = 0;
    std::size_t best_free = 0;
    City best_city = 0;
    for (std::size_t k = 0; k < cycles.size(); ++k) {
        std::size_t free = 0;
        for (const Arc& a : cycles[k])
            if (forced[a.from] != a.to) ++free;
        const City sc = smallest_city(cycles[k]);
        if (k == 0 || free < best_free || (free == best_free && sc < best_city)) {
            best = k;
            best_free = free;
            best_city = sc;
        }
    }
    return best;
}

/// Arcs of `cycle` not in `included`, in cycle order from the arc leaving the
/// cycle's smallest city.
inline std::vector<Arc> free_arcs(Cycle cycle, const std::vector<Arc>& included) {
    canonicalize(cycle);
    std::vector<Arc> out;
    for (const Arc& a : cycle)
        if (std::find(included.begin(), included.end(), a) == included.end()) out.push_back(a);
    return out;
}

/// Carpaneto-Toth decomposition: child k excludes free arc e_k and includes
/// e_1..e_{k-1}. Each relaxation is re-optimised from the parent's; children
/// that are infeasible or whose bound would reach `cutoff` come back pruned.
inline std::vector<ChildNode> expand_ct(const DistanceMatrix& d, const SearchNode& node, const Cycle& chosen,
                                        Cost cutoff = detail::kUnreached) {
    const std::vector<Arc> arcs = free_arcs(chosen, node.constraints.included);
    std::vector<ChildNode> children;
    children.reserve(arcs.size());
    for (std::size_t k = 0; k < arcs.size(); ++k) {
        ChildNode child;
        child.node.depth = node.depth + 1;
        child.node.constraints.excluded = node.constraints.excluded;
        child.node.constraints.excluded.push_back(arcs[k]);
        child.node.constraints.included = node.constraints.included;
        child.node.constraints.included.insert(child.node.constraints.included.end(), arcs.begin(),
                                               arcs.begin() + static_cast<std::ptrdiff_t>(k));
        auto relaxed = resolve_after_exclusion(d, node.relaxation, child.node.constraints, arcs[k], cutoff);
        if (relaxed)
            child.node.relaxation = std::move(*relaxed);
        else
            child.pruned = true;
        children.push_back(std::move(child));
    }
    return children;
}

/// Whether `t` uses every included arc and no excluded arc.
inline bool honours(const Tour& t, const ArcConstraints& c) {
    if (c.empty()) return true;
    std::vector<City> succ(t.order.size());
    for (std::size_t k = 0; k < t.order.size(); ++k) succ[t.order[k]] = t.order[(k + 1) % t.order.size()];
    for (const Arc& a : c.excluded)
        if (succ[a.from] == a.to) return false;
    for (const Arc& a : c.included)
        if (succ[a.from] != a.to) return false;
    return true;
}

namespace detail {

class DepthFirstSearch {
public:
    DepthFirstSearch(const DistanceMatrix& d, const SolveOptions& opts, SolveResult& result)
        : d_(d), opts_(opts), r_(result) {
        alpha_ = opts.initial_upper_bound.value_or(kForbidden);
    }

    void run(std::optional<SearchNode> root) {
        if (!root) return;
        r_.root_bound = root->bound();
        root_constraints_ = root->constraints;
        if (root->relaxation.is_tour()) {
            offer(tour_from_cycle(d_, root->relaxation.cycles.front()));
            return;
        }
        if (opts_.use_patching) offer_patched(root->relaxation);

        std::vector<SearchNode> stack;
        stack.push_back(std::move(*root));
        while (!stack.empty() && !done()) {
            SearchNode node = std::move(stack.back());
            stack.pop_back();
            if (node.bound() >= alpha_) continue;

            const auto& cycles = node.relaxation.cycles;
            const Cycle& chosen = cycles[select_branch_subtour(cycles, node.constraints.included)];
            std::vector<ChildNode> children = expand_ct(d_, node, chosen, alpha_);
            r_.metrics.ap_calls += children.size();
            ++r_.metrics.nodes_expanded;
            if (opts_.on_expand) opts_.on_expand(node, children);

            std::vector<std::size_t> open;
            for (std::size_t k = 0; k < children.size(); ++k) {
                const ChildNode& c = children[k];
                if (c.pruned || c.node.bound() >= alpha_) continue;
                if (c.node.relaxation.is_tour()) {
                    offer(tour_from_cycle(d_, c.node.relaxation.cycles.front()));
                    continue;
                }
                open.push_back(k);
            }
            std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) {
                return children[a].node.bound() < children[b].node.bound();
            });
            if (opts_.use_patching && !open.empty()) offer_patched(children[open.front()].node.relaxation);
            for (auto it = open.rbegin(); it != open.rend(); ++it)
                if (children[*it].node.bound() < alpha_) stack.push_back(std::move(children[*it].node));
        }
    }

    [[nodiscard]] Cost alpha() const noexcept { return alpha_; }

private:
    // A patched tour is a valid upper bound only if it honours the root's own
    // constraints; node-level constraints do not matter.
    void offer_patched(const Assignment& a) {
        Tour t = patch_to_tour(d_, a);
        if (t.cost < alpha_ && honours(t, root_constraints_)) offer(std::move(t));
    }

    void offer(Tour t) {
        if (t.cost >= alpha_) return;
        alpha_ = t.cost;
        ++r_.metrics.incumbent_updates;
        if (opts_.on_incumbent) opts_.on_incumbent(alpha_);
        r_.cost = t.cost;
        r_.tour = std::move(t);
    }

    // The root bound is a lower bound for the whole tree.
    [[nodiscard]] bool done() const noexcept {
        if (!r_.tour) return false;
        if (r_.cost <= r_.root_bound) return true;
        return opts_.target_cost && r_.cost <= *opts_.target_cost;
    }

    const DistanceMatrix& d_;
    const SolveOptions& opts_;
    SolveResult& r_;
    Cost alpha_;
    ArcConstraints root_constraints_;
};

/// Collects every tour of cost `optimum` below `root`. A node whose
/// relaxation is itself an optimal tour is recorded and then branched on as
/// if that tour were a subtour, which flushes the remaining optima from its
/// subproblem without duplicates.
inline OptimaSet enumerate_optima(const DistanceMatrix& d, SearchNode root, Cost optimum, const SolveOptions& opts,
                                  SolveMetrics& metrics) {
    OptimaSet out;
    const std::size_t cap = std::max<std::size_t>(opts.optima_cap, 1);
    std::vector<SearchNode> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
        SearchNode node = std::move(stack.back());
        stack.pop_back();
        if (node.bound() > optimum) continue;

        const auto& cycles = node.relaxation.cycles;
        std::size_t chosen = 0;
        if (node.relaxation.is_tour()) {
            if (out.count == cap) {
                out.saturated = true;
                break;
            }
            ++out.count;
            if (opts.keep_optimal_tours) out.tours.push_back(tour_from_cycle(d, cycles.front()));
        } else {
            chosen = select_branch_subtour(cycles, node.constraints.included);
        }
        std::vector<ChildNode> children = expand_ct(d, node, cycles[chosen], saturating_add(optimum, 1));
        metrics.ap_calls += children.size();
        ++metrics.nodes_expanded;
        if (opts.on_expand) opts.on_expand(node, children);
        for (auto it = children.rbegin(); it != children.rend(); ++it)
            if (!it->pruned && it->node.bound() <= optimum) stack.push_back(std::move(it->node));
    }
    return out;
}

}  // namespace detail

/// Branch-and-bound from an already relaxed root subproblem.
inline SolveResult solve_atsp_from(const DistanceMatrix& d, std::optional<SearchNode> root, const SolveOptions& opts,
                                   std::uint64_t root_ap_calls = 1) {
    if (opts.enumerate_all_optima && opts.optima_cap < 1) throw std::invalid_argument("optima cap must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    SolveResult result;
    result.metrics.ap_calls = root_ap_calls;
    std::optional<SearchNode> keep;
    if (opts.enumerate_all_optima && root) keep = *root;
    detail::DepthFirstSearch search(d, opts, result);
    search.run(std::move(root));
    if (opts.enumerate_all_optima && result.found()) {
        result.optima = detail::enumerate_optima(d, std::move(*keep), result.cost, opts, result.metrics);
    }
    result.metrics.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
}

/// Optimal tour of D under root constraints `c` (which may be empty).
inline SolveResult solve_atsp(const DistanceMatrix& d, const ArcConstraints& c, const SolveOptions& opts = {}) {
    c.validate(d.size());
    std::optional<SearchNode> root;
    if (auto relaxed = solve_ap_constrained(d, c)) root = SearchNode{c, std::move(*relaxed), 0};
    return solve_atsp_from(d, std::move(root), opts);
}

inline SolveResult solve_atsp(const DistanceMatrix& d, const SolveOptions& opts = {}) {
    return solve_atsp(d, ArcConstraints{}, opts);
}

}  // namespace atsp

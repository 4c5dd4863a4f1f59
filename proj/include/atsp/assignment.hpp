#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atsp/types.hpp"

namespace atsp {

/// Excluded and included arc sets of a constrained assignment problem.
struct ArcConstraints {
    std::vector<Arc> excluded;
    std::vector<Arc> included;

    [[nodiscard]] bool empty() const noexcept { return excluded.empty() && included.empty(); }

    /// Throws std::invalid_argument unless the sets are disjoint, contain no
    /// loops, give every city at most one included arc in and out, and the
    /// included arcs close no cycle shorter than n.
    void validate(int n) const {
        auto in_range = [n](const Arc& a) { return a.from >= 0 && a.from < n && a.to >= 0 && a.to < n; };
        std::vector<City> out(n, -1), in(n, -1);
        for (const Arc& a : included) {
            if (!in_range(a) || a.from == a.to) throw std::invalid_argument("included arc is not a valid off-diagonal arc");
            if (out[a.from] != -1 || in[a.to] != -1)
                throw std::invalid_argument("included arcs share an endpoint");
            out[a.from] = a.to;
            in[a.to] = a.from;
        }
        for (const Arc& a : excluded) {
            if (!in_range(a) || a.from == a.to) throw std::invalid_argument("excluded arc is not a valid off-diagonal arc");
            if (out[a.from] == a.to) throw std::invalid_argument("arc is both included and excluded");
        }
        // A walk along included arcs that returns to its start is a cycle.
        std::vector<char> seen(n, 0);
        for (City s = 0; s < n; ++s) {
            if (seen[s] || out[s] == -1) continue;
            City c = s;
            int len = 0;
            while (c != -1 && !seen[c]) {
                seen[c] = 1;
                c = out[c];
                ++len;
            }
            if (c == s && len < n) throw std::invalid_argument("included arcs close a subtour");
        }
    }
};

/// Arc costs of D under a constraint set. Excluded arcs, loops, and every
/// alternative to an included arc are forbidden.
class ConstrainedCosts {
public:
    ConstrainedCosts(const DistanceMatrix& d, const ArcConstraints& c)
        : d_(&d), forced_out_(d.size(), -1), forced_in_(d.size(), -1), excluded_(d.size()) {
        for (const Arc& a : c.included) {
            forced_out_[a.from] = a.to;
            forced_in_[a.to] = a.from;
        }
        for (const Arc& a : c.excluded) excluded_[a.from].push_back(a.to);
    }

    void exclude(const Arc& a) { excluded_[a.from].push_back(a.to); }

    [[nodiscard]] int size() const noexcept { return d_->size(); }

    [[nodiscard]] bool usable(City i, City j) const noexcept {
        if (i == j) return false;
        if (forced_out_[i] != -1 && forced_out_[i] != j) return false;
        if (forced_in_[j] != -1 && forced_in_[j] != i) return false;
        for (City x : excluded_[i])
            if (x == j) return false;
        return true;
    }

    [[nodiscard]] Cost operator()(City i, City j) const noexcept { return usable(i, j) ? (*d_)(i, j) : kForbidden; }

    [[nodiscard]] Cost raw(City i, City j) const noexcept { return (*d_)(i, j); }
    [[nodiscard]] const Cost* row(City i) const noexcept { return d_->row(i); }
    [[nodiscard]] City forced_out(City i) const noexcept { return forced_out_[i]; }
    [[nodiscard]] City forced_in(City j) const noexcept { return forced_in_[j]; }
    [[nodiscard]] const std::vector<City>& excluded_from(City i) const noexcept { return excluded_[i]; }

private:
    const DistanceMatrix* d_;
    std::vector<City> forced_out_;
    std::vector<City> forced_in_;
    std::vector<std::vector<City>> excluded_;
};

using Cycle = std::vector<Arc>;

/// Cycle decomposition of a permutation. Each cycle starts at its smallest
/// city; cycles are ordered by (length, smallest city).
inline std::vector<Cycle> extract_cycles(const std::vector<City>& succ) {
    const int n = static_cast<int>(succ.size());
    std::vector<char> seen(n, 0);
    std::vector<Cycle> cycles;
    for (City s = 0; s < n; ++s) {
        if (seen[s]) continue;
        Cycle cyc;
        City c = s;
        while (!seen[c]) {
            seen[c] = 1;
            cyc.push_back({c, succ[c]});
            c = succ[c];
        }
        cycles.push_back(std::move(cyc));
    }
    // s ascends, so the first arc of each cycle leaves its smallest city.
    std::stable_sort(cycles.begin(), cycles.end(),
                     [](const Cycle& a, const Cycle& b) { return a.size() < b.size(); });
    return cycles;
}

/// Optimal solution of an (optionally constrained) assignment problem.
struct Assignment {
    std::vector<City> succ;
    Cost cost = 0;
    std::vector<Cost> row_dual;
    std::vector<Cost> col_dual;
    std::vector<Cycle> cycles;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(succ.size()); }
    [[nodiscard]] bool is_tour() const noexcept { return cycles.size() == 1; }
};

inline std::vector<Cycle> extract_cycles(const Assignment& a) { return extract_cycles(a.succ); }

namespace detail {

struct ApState {
    std::vector<City> row_to_col;
    std::vector<City> col_to_row;
    std::vector<Cost> u;
    std::vector<Cost> v;
};

inline constexpr Cost kUnreached = std::numeric_limits<Cost>::max();

enum class AugmentStatus { augmented, infeasible, cut_off };

/// One Dijkstra-style shortest augmenting path from the free row `root`.
/// Keeps u_i + v_j <= c_ij on usable arcs with equality on assigned ones.
/// The assignment cost grows by exactly the path length; when that length
/// would reach `cutoff` the search stops early. On any status other than
/// `augmented` the state is untouched.
inline AugmentStatus augment(const ConstrainedCosts& c, ApState& s, City root, Cost cutoff = kUnreached) {
    const int n = c.size();
    std::vector<Cost> dist(n, kUnreached);
    std::vector<City> pred(n, -1);
    std::vector<City> todo(n);  // unscanned columns
    for (City j = 0; j < n; ++j) todo[j] = j;
    std::vector<char> blocked(n, 0);
    std::vector<char> scanned(n, 0);
    std::vector<City> scanned_cols;
    std::vector<City> rows{root};

    City row = root;
    Cost base = 0;
    City sink = -1;
    for (;;) {
        const Cost* cost_row = c.row(row);
        const Cost ur = s.u[row];
        auto relax = [&](City j) {
            const Cost nd = base + (cost_row[j] - ur - s.v[j]);
            if (nd < dist[j]) {
                dist[j] = nd;
                pred[j] = row;
            }
        };
        if (const City only = c.forced_out(row); only != -1) {
            if (!scanned[only] && c.usable(row, only)) relax(only);
        } else {
            const auto& excl = c.excluded_from(row);
            for (City j : excl) blocked[j] = 1;
            blocked[row] = 1;
            for (City j : todo) {
                if (blocked[j]) continue;
                const City fi = c.forced_in(j);
                if (fi != -1 && fi != row) continue;
                relax(j);
            }
            for (City j : excl) blocked[j] = 0;
            blocked[row] = 0;
        }

        std::size_t best_pos = todo.size();
        for (std::size_t p = 0; p < todo.size(); ++p) {
            const City j = todo[p];
            if (dist[j] == kUnreached) continue;
            if (best_pos == todo.size() || dist[j] < dist[todo[best_pos]] ||
                (dist[j] == dist[todo[best_pos]] && j < todo[best_pos]))
                best_pos = p;
        }
        if (best_pos == todo.size()) return AugmentStatus::infeasible;
        const City best = todo[best_pos];
        if (dist[best] >= cutoff) return AugmentStatus::cut_off;
        todo[best_pos] = todo.back();
        todo.pop_back();
        scanned[best] = 1;
        scanned_cols.push_back(best);
        if (s.col_to_row[best] == -1) {
            sink = best;
            break;
        }
        row = s.col_to_row[best];
        rows.push_back(row);
        base = dist[best];
    }

    const Cost delta = dist[sink];
    for (City j : scanned_cols) s.v[j] += dist[j] - delta;

    for (City j = sink;;) {
        const City i = pred[j];
        const City prev = s.row_to_col[i];
        s.row_to_col[i] = j;
        s.col_to_row[j] = i;
        if (i == root) break;
        j = prev;
    }
    for (City i : rows) s.u[i] = c.raw(i, s.row_to_col[i]) - s.v[s.row_to_col[i]];
    return AugmentStatus::augmented;
}

inline Assignment finish(const ConstrainedCosts& c, ApState&& s) {
    Assignment a;
    a.cost = 0;
    for (City i = 0; i < c.size(); ++i) a.cost = saturating_add(a.cost, c.raw(i, s.row_to_col[i]));
    a.succ = std::move(s.row_to_col);
    a.row_dual = std::move(s.u);
    a.col_dual = std::move(s.v);
    a.cycles = extract_cycles(a.succ);
    return a;
}

inline std::optional<Assignment> solve(const ConstrainedCosts& c) {
    const int n = c.size();
    ApState s{std::vector<City>(n, -1), std::vector<City>(n, -1), std::vector<Cost>(n, 0), std::vector<Cost>(n, 0)};

    // Column reduction, then row reduction: a feasible starting dual.
    for (City j = 0; j < n; ++j) {
        Cost m = kUnreached;
        for (City i = 0; i < n; ++i)
            if (c.usable(i, j)) m = std::min(m, c.raw(i, j));
        if (m == kUnreached) return std::nullopt;
        s.v[j] = m;
    }
    for (City i = 0; i < n; ++i) {
        Cost m = kUnreached;
        City arg = -1;
        for (City j = 0; j < n; ++j) {
            if (!c.usable(i, j)) continue;
            const Cost r = c.raw(i, j) - s.v[j];
            if (r < m) {
                m = r;
                arg = j;
            }
        }
        if (arg == -1) return std::nullopt;
        s.u[i] = m;
        // Greedy start on tight arcs.
        for (City j = 0; j < n; ++j) {
            if (s.col_to_row[j] == -1 && c.usable(i, j) && c.raw(i, j) - s.v[j] == m) {
                s.row_to_col[i] = j;
                s.col_to_row[j] = i;
                break;
            }
        }
    }
    for (City i = 0; i < n; ++i)
        if (s.row_to_col[i] == -1 && augment(c, s, i) != AugmentStatus::augmented) return std::nullopt;
    return finish(c, std::move(s));
}

}  // namespace detail

/// Minimum-cost loop-free assignment of D. Always feasible for n >= 2.
inline Assignment solve_ap(const DistanceMatrix& d) {
    const ArcConstraints none;
    auto a = detail::solve(ConstrainedCosts(d, none));
    if (!a) throw std::logic_error("unconstrained assignment problem reported infeasible");
    return std::move(*a);
}

/// Minimum-cost assignment using every included arc and no excluded arc;
/// std::nullopt when none exists.
inline std::optional<Assignment> solve_ap_constrained(const DistanceMatrix& d, const ArcConstraints& c) {
    return detail::solve(ConstrainedCosts(d, c));
}

/// Re-optimises `parent` after forbidding one of its assigned arcs, in O(n^2).
///
/// `c` is the full constraint set of the new problem (with or without
/// `newly_excluded`; it is forbidden either way). The parent must be optimal
/// for a constraint set that `c` only tightens, and must satisfy `c` apart
/// from `newly_excluded`. If `newly_excluded` is not assigned in the parent
/// the parent is already optimal and is returned as is.
///
/// Returns std::nullopt when the problem is infeasible, or when its optimum
/// would be at least `cutoff` (the search for it is abandoned early).
inline std::optional<Assignment> resolve_after_exclusion(const DistanceMatrix& d, const Assignment& parent,
                                                         const ArcConstraints& c, const Arc& newly_excluded,
                                                         Cost cutoff = detail::kUnreached) {
    if (parent.succ[newly_excluded.from] != newly_excluded.to) return parent;

    ConstrainedCosts costs(d, c);
    costs.exclude(newly_excluded);
    const int n = d.size();
    detail::ApState s{parent.succ, std::vector<City>(n, -1), parent.row_dual, parent.col_dual};
    for (City i = 0; i < n; ++i) {
        if (i == newly_excluded.from) continue;
        if (!costs.usable(i, s.row_to_col[i]))
            throw std::invalid_argument("parent assignment violates the child constraints at row " + std::to_string(i));
        s.col_to_row[s.row_to_col[i]] = i;
    }
    s.row_to_col[newly_excluded.from] = -1;
    const Cost slack = cutoff == detail::kUnreached ? detail::kUnreached : cutoff - parent.cost;
    if (slack <= 0) return std::nullopt;
    if (detail::augment(costs, s, newly_excluded.from, slack) != detail::AugmentStatus::augmented) return std::nullopt;
    return detail::finish(costs, std::move(s));
}

/// True when `a` is a permutation honouring `c` whose duals are feasible
/// (u_i + v_j <= d_ij on usable arcs) and tight on every assigned arc, which
/// certifies optimality.
inline bool duals_certify(const DistanceMatrix& d, const ArcConstraints& c, const Assignment& a) {
    const int n = d.size();
    if (a.size() != n || static_cast<int>(a.row_dual.size()) != n || static_cast<int>(a.col_dual.size()) != n)
        return false;
    const ConstrainedCosts costs(d, c);
    std::vector<char> hit(n, 0);
    Cost total = 0;
    for (City i = 0; i < n; ++i) {
        const City j = a.succ[i];
        if (j < 0 || j >= n || hit[j] || !costs.usable(i, j)) return false;
        hit[j] = 1;
        if (a.row_dual[i] + a.col_dual[j] != d(i, j)) return false;
        total += d(i, j);
    }
    if (total != a.cost) return false;
    for (City i = 0; i < n; ++i)
        for (City j = 0; j < n; ++j)
            if (costs.usable(i, j) && a.row_dual[i] + a.col_dual[j] > d(i, j)) return false;
    return true;
}

}  // namespace atsp

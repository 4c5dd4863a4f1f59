#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "atsp/assignment.hpp"
#include "atsp/backbone.hpp"
#include "atsp/instances.hpp"
#include "atsp/solver.hpp"

namespace atsp {

// ---------------------------------------------------------------------------
// Measures

enum class Measure {
    rho,
    norm_ap_cost,
    norm_atsp_cost,
    ap_cost,
    atsp_cost,
    p_ap_eq_atsp,
    rel_ap_error,
    backbone_fraction,
    log_optima_count,
    zero_cost_tour_prob,
    ap_calls,
};

inline constexpr std::array kAllMeasures = {
    Measure::rho,          Measure::norm_ap_cost,      Measure::norm_atsp_cost,   Measure::ap_cost,
    Measure::atsp_cost,    Measure::p_ap_eq_atsp,      Measure::rel_ap_error,     Measure::backbone_fraction,
    Measure::log_optima_count, Measure::zero_cost_tour_prob, Measure::ap_calls,
};

inline const char* measure_name(Measure m) {
    switch (m) {
        case Measure::rho: return "rho";
        case Measure::norm_ap_cost: return "norm_ap_cost";
        case Measure::norm_atsp_cost: return "norm_atsp_cost";
        case Measure::ap_cost: return "ap_cost";
        case Measure::atsp_cost: return "atsp_cost";
        case Measure::p_ap_eq_atsp: return "p_ap_eq_atsp";
        case Measure::rel_ap_error: return "rel_ap_error";
        case Measure::backbone_fraction: return "backbone_fraction";
        case Measure::log_optima_count: return "log_optima_count";
        case Measure::zero_cost_tour_prob: return "zero_cost_tour_prob";
        case Measure::ap_calls: return "ap_calls";
    }
    return "?";
}

inline Measure parse_measure(const std::string& name) {
    for (Measure m : kAllMeasures)
        if (name == measure_name(m)) return m;
    throw std::invalid_argument("unknown measure '" + name + "'");
}

/// Comma-separated measure list, e.g. "rho,norm_atsp_cost".
inline std::vector<Measure> parse_measures(const std::string& list) {
    std::vector<Measure> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty entry in measure list '" + list + "'");
        const Measure m = parse_measure(item);
        if (std::find(out.begin(), out.end(), m) != out.end())
            throw std::invalid_argument("measure '" + item + "' listed twice");
        out.push_back(m);
    }
    if (!list.empty() && list.back() == ',') throw std::invalid_argument("empty entry in measure list '" + list + "'");
    if (out.empty()) throw std::invalid_argument("no measures given");
    return out;
}

// ---------------------------------------------------------------------------
// Digits grid

struct DigitsGrid {
    double start = 1.0;
    double stop = 1.0;
    double step = 0.1;

    void validate() const {
        if (!(step > 0.0)) throw std::invalid_argument("digits grid step must be positive");
        if (!(start > 0.0)) throw std::invalid_argument("digits grid must start above zero");
        if (stop < start) throw std::invalid_argument("digits grid stop lies below its start");
    }

    /// start, start + step, ...; includes stop when (stop - start) is a
    /// multiple of step within 1e-9. Values are rounded to 1e-9.
    [[nodiscard]] std::vector<double> values() const {
        validate();
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count));
        for (long k = 0; k < count; ++k) out.push_back(std::round((start + k * step) * 1e9) / 1e9);
        return out;
    }
};

/// Parses "A:B:S".
inline DigitsGrid parse_digits_grid(const std::string& text) {
    DigitsGrid g;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    std::string rest;
    if (!(is >> g.start >> c1 >> g.stop >> c2 >> g.step) || c1 != ':' || c2 != ':' || (is >> rest))
        throw std::invalid_argument("digits grid must look like A:B:S, got '" + text + "'");
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Per-instance observation

struct Observation {
    std::array<double, kAllMeasures.size()> value{};
    std::array<bool, kAllMeasures.size()> present{};
    bool optima_saturated = false;

    void set(Measure m, double v) {
        value[static_cast<std::size_t>(m)] = v;
        present[static_cast<std::size_t>(m)] = true;
    }
    [[nodiscard]] bool has(Measure m) const { return present[static_cast<std::size_t>(m)]; }
    [[nodiscard]] double get(Measure m) const { return value[static_cast<std::size_t>(m)]; }
};

inline bool wants(const std::vector<Measure>& ms, std::initializer_list<Measure> any) {
    for (Measure m : any)
        if (std::find(ms.begin(), ms.end(), m) != ms.end()) return true;
    return false;
}

/// Generates one instance and records every requested measure. A measure is
/// left absent when it is undefined (relative error with a zero optimum).
inline Observation observe_instance(const InstanceSpec& spec, const std::vector<Measure>& measures,
                                    std::size_t optima_cap = kDefaultOptimaCap) {
    Observation obs;
    const DistanceMatrix d = generate(spec);
    const auto scale = static_cast<double>(spec.range() - 1);
    auto normalized = [&](Cost c, double per) { return scale == 0.0 ? 0.0 : static_cast<double>(c) / (scale * per); };

    if (wants(measures, {Measure::rho})) obs.set(Measure::rho, empirical_distinct_fraction(d, spec.digits, 1.0).rho);

    const bool need_atsp = wants(measures, {Measure::norm_atsp_cost, Measure::atsp_cost, Measure::p_ap_eq_atsp,
                                            Measure::rel_ap_error, Measure::backbone_fraction, Measure::ap_calls,
                                            Measure::zero_cost_tour_prob});
    const bool need_ap = need_atsp || wants(measures, {Measure::norm_ap_cost, Measure::ap_cost});
    if (need_ap) {
        const Assignment root = solve_ap(d);
        obs.set(Measure::norm_ap_cost, normalized(root.cost, spec.n));
        obs.set(Measure::ap_cost, normalized(root.cost, 1));
        if (need_atsp) {
            const SolveResult best = solve_atsp_from(d, SearchNode{{}, root, 0}, SolveOptions{});
            obs.set(Measure::norm_atsp_cost, normalized(best.cost, spec.n));
            obs.set(Measure::atsp_cost, normalized(best.cost, 1));
            obs.set(Measure::p_ap_eq_atsp, root.cost == best.cost ? 1.0 : 0.0);
            if (best.cost > 0)
                obs.set(Measure::rel_ap_error,
                        static_cast<double>(best.cost - root.cost) / static_cast<double>(best.cost));
            obs.set(Measure::zero_cost_tour_prob, best.cost == 0 ? 1.0 : 0.0);
            obs.set(Measure::ap_calls, static_cast<double>(best.metrics.ap_calls));
            if (wants(measures, {Measure::backbone_fraction}))
                obs.set(Measure::backbone_fraction, backbone_from(d, root, best).fraction);
        }
    }
    if (wants(measures, {Measure::log_optima_count})) {
        const OptimaSet all = enumerate_optimal_tours(d, optima_cap);
        obs.set(Measure::log_optima_count, std::log10(static_cast<double>(all.count)));
        obs.optima_saturated = all.saturated;
    }
    return obs;
}

// ---------------------------------------------------------------------------
// Aggregation

struct MeasureStats {
    Measure measure = Measure::rho;
    std::uint64_t samples = 0;
    std::uint64_t excluded = 0;   // instances where the measure is undefined
    std::uint64_t saturated = 0;  // optima counts that hit the cap
    double mean = 0;
    double se = 0;
    double ci95 = 0;
};

struct AggregateRow {
    int n = 0;
    double b = 0;
    double beta = 0;
    std::uint64_t count = 0;
    std::vector<MeasureStats> stats;  // in requested measure order
    std::optional<double> x;          // set by rescale_table

    [[nodiscard]] const MeasureStats& stat(Measure m) const {
        for (const auto& s : stats)
            if (s.measure == m) return s;
        throw std::out_of_range(std::string("measure not in row: ") + measure_name(m));
    }
};

/// Normal-approximation summary; summation runs in the given order.
inline MeasureStats summarize(Measure m, const std::vector<double>& xs) {
    MeasureStats s;
    s.measure = m;
    s.samples = xs.size();
    if (xs.empty()) {
        s.mean = s.se = s.ci95 = std::nan("");
        return s;
    }
    double sum = 0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
    }
    s.ci95 = 1.96 * s.se;
    return s;
}

inline AggregateRow aggregate(int n, double b, const std::vector<Observation>& obs, const std::vector<Measure>& measures) {
    AggregateRow row;
    row.n = n;
    row.b = b;
    row.beta = effective_digits(b, n);
    row.count = obs.size();
    for (Measure m : measures) {
        std::vector<double> xs;
        xs.reserve(obs.size());
        std::uint64_t saturated = 0;
        for (const auto& o : obs) {
            if (o.has(m)) xs.push_back(o.get(m));
            if (m == Measure::log_optima_count && o.optima_saturated) ++saturated;
        }
        MeasureStats s = summarize(m, xs);
        s.excluded = obs.size() - xs.size();
        s.saturated = saturated;
        row.stats.push_back(s);
    }
    return row;
}

// ---------------------------------------------------------------------------
// Sweeps

inline int default_workers() {
    if (const char* env = std::getenv("ATSP_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

struct SweepConfig {
    std::vector<int> sizes;
    DigitsGrid digits;
    std::uint64_t instances_per_point = 1;
    std::uint64_t master_seed = 0;
    std::vector<Measure> measures;
    std::size_t optima_cap = kDefaultOptimaCap;
    int workers = 1;

    void validate() const {
        if (sizes.empty()) throw std::invalid_argument("sweep needs at least one size");
        for (int n : sizes)
            if (n < 2) throw std::invalid_argument("sweep sizes must be >= 2");
        digits.validate();
        if (instances_per_point < 1) throw std::invalid_argument("sweep needs at least one instance per point");
        if (measures.empty()) throw std::invalid_argument("sweep needs at least one measure");
        if (optima_cap < 1) throw std::invalid_argument("optima cap must be >= 1");
        if (workers < 1) throw std::invalid_argument("sweep needs at least one worker");
    }
};

using SweepProgress = std::function<void(const AggregateRow&)>;

/// One row per (n, b). Instance k of a point uses InstanceSpec{n, b,
/// master_seed, k}; results are reduced in index order, so the output does
/// not depend on the worker count.
inline std::vector<AggregateRow> run_sweep(const SweepConfig& cfg, const SweepProgress& progress = {}) {
    cfg.validate();
    const std::vector<double> grid = cfg.digits.values();
    for (int n : cfg.sizes)
        for (double b : grid) InstanceSpec{n, b, cfg.master_seed, 0}.validate();

    std::vector<AggregateRow> rows;
    for (int n : cfg.sizes) {
        for (double b : grid) {
            const std::uint64_t count = cfg.instances_per_point;
            std::vector<Observation> obs(count);
            std::atomic<std::uint64_t> next{0};
            std::mutex fail_mu;
            std::optional<std::uint64_t> failed_index;
            std::string failure;

            auto work = [&] {
                for (;;) {
                    const std::uint64_t k = next.fetch_add(1);
                    if (k >= count) return;
                    try {
                        obs[k] = observe_instance(InstanceSpec{n, b, cfg.master_seed, k}, cfg.measures, cfg.optima_cap);
                    } catch (const std::exception& e) {
                        std::lock_guard lock(fail_mu);
                        if (!failed_index || k < *failed_index) {
                            failed_index = k;
                            failure = e.what();
                        }
                        next.store(count);
                        return;
                    }
                }
            };
            const int threads = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.workers), count));
            if (threads <= 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                for (int t = 0; t < threads; ++t) pool.emplace_back(work);
                for (auto& th : pool) th.join();
            }
            if (failed_index) {
                std::ostringstream msg;
                msg << "instance failed at n=" << n << " b=" << b << " index=" << *failed_index << ": " << failure;
                throw std::runtime_error(msg.str());
            }
            rows.push_back(aggregate(n, b, obs, cfg.measures));
            if (progress) progress(rows.back());
        }
    }
    return rows;
}

/// Attaches x = (beta - beta_c) log10(n) to every row.
inline std::vector<AggregateRow> rescale_table(std::vector<AggregateRow> rows, double beta_c) {
    for (auto& r : rows) r.x = rescale(r.beta, r.n, beta_c);
    return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_g6(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    if (rows.empty()) return;
    os << "n,b,beta,count";
    for (const auto& s : rows.front().stats) {
        const std::string m = measure_name(s.measure);
        os << ',' << m << "_mean," << m << "_se," << m << "_ci95";
        if (s.measure == Measure::rel_ap_error) os << ",rel_ap_error_excluded";
        if (s.measure == Measure::log_optima_count) os << ",log_optima_count_saturated";
    }
    if (rows.front().x) os << ",x";
    os << '\n';
    for (const auto& r : rows) {
        os << r.n << ',' << format_g6(r.b) << ',' << format_g6(r.beta) << ',' << r.count;
        for (const auto& s : r.stats) {
            os << ',' << format_g6(s.mean) << ',' << format_g6(s.se) << ',' << format_g6(s.ci95);
            if (s.measure == Measure::rel_ap_error) os << ',' << s.excluded;
            if (s.measure == Measure::log_optima_count) os << ',' << s.saturated;
        }
        if (r.x) os << ',' << format_g6(*r.x);
        os << '\n';
    }
}

/// A CSV file as header names plus text cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw std::invalid_argument("CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }

    [[nodiscard]] double number(std::size_t row, std::size_t col) const {
        const std::string& cell = rows.at(row).at(col);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size())
            throw std::invalid_argument("CSV cell '" + cell + "' is not a number");
        return v;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline CsvTable read_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line) || line.empty()) throw std::invalid_argument("CSV is empty");
    t.header = split_csv_line(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw std::invalid_argument("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

inline void write_csv(std::ostream& os, const CsvTable& t) {
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
        os << '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
}

/// Appends (or overwrites) an `x` column computed from the `n` and `beta` columns.
inline CsvTable rescale_csv(CsvTable t, double beta_c) {
    const std::size_t cn = t.column("n"), cb = t.column("beta");
    std::size_t cx;
    const auto it = std::find(t.header.begin(), t.header.end(), "x");
    if (it == t.header.end()) {
        t.header.emplace_back("x");
        cx = t.header.size() - 1;
        for (auto& r : t.rows) r.emplace_back();
    } else {
        cx = static_cast<std::size_t>(it - t.header.begin());
    }
    for (std::size_t k = 0; k < t.rows.size(); ++k)
        t.rows[k][cx] = format_g6(rescale(t.number(k, cb), static_cast<int>(t.number(k, cn)), beta_c));
    return t;
}

// ---------------------------------------------------------------------------
// Transition analysis

using Series = std::vector<std::pair<double, double>>;  // (beta, value), ascending beta

/// Piecewise-linear interpolation; `beta` must lie inside the series' range.
inline double interpolate(const Series& s, double beta) {
    if (s.empty()) throw std::invalid_argument("cannot interpolate an empty series");
    if (beta <= s.front().first) return s.front().second;
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (beta <= s[k].first) {
            const auto [b0, v0] = s[k - 1];
            const auto [b1, v1] = s[k];
            if (b1 == b0) return v1;
            return v0 + (v1 - v0) * (beta - b0) / (b1 - b0);
        }
    }
    return s.back().second;
}

/// First beta where the interpolated series reaches `level`.
inline std::optional<double> level_crossing(const Series& s, double level) {
    for (std::size_t k = 1; k < s.size(); ++k) {
        const auto [b0, v0] = s[k - 1];
        const auto [b1, v1] = s[k];
        if (v0 == level) return b0;
        if ((v0 - level) * (v1 - level) < 0) return b0 + (b1 - b0) * (level - v0) / (v1 - v0);
    }
    if (!s.empty() && s.back().second == level) return s.back().first;
    return std::nullopt;
}

struct PairCrossing {
    int n_small = 0;
    int n_large = 0;
    std::optional<double> beta;  // empty: the curves do not cross in range
};

struct CrossoverEstimate {
    double beta_c = std::nan("");
    double spread = 0;         // half the range of the pairwise estimates
    bool degenerate = false;   // curves coincide; beta_c is the range midpoint
    std::vector<PairCrossing> pairs;
};

/// Crossover point of finite-size transition curves. For each pair of sizes
/// the difference of the interpolated curves is scanned for sign changes; of
/// several crossings the one whose value lies closest to the middle of the
/// curves' range is kept.
inline CrossoverEstimate estimate_crossover(const std::map<int, Series>& curves) {
    if (curves.size() < 2) throw std::invalid_argument("crossover needs curves for at least two sizes");
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& [n, s] : curves) {
        if (s.size() < 2) throw std::invalid_argument("crossover needs at least two points per curve");
        for (const auto& p : s) {
            lo = std::min(lo, p.second);
            hi = std::max(hi, p.second);
        }
    }
    const double mid = 0.5 * (lo + hi);

    CrossoverEstimate est;
    std::vector<double> found;
    bool all_identical = true;
    double range_lo = INFINITY, range_hi = -INFINITY;
    for (auto a = curves.begin(); a != curves.end(); ++a) {
        for (auto b = std::next(a); b != curves.end(); ++b) {
            const Series& sa = a->second;
            const Series& sb = b->second;
            const double from = std::max(sa.front().first, sb.front().first);
            const double to = std::min(sa.back().first, sb.back().first);
            PairCrossing pc{a->first, b->first, std::nullopt};
            if (from > to) {
                est.pairs.push_back(pc);
                all_identical = false;
                continue;
            }
            range_lo = std::min(range_lo, from);
            range_hi = std::max(range_hi, to);
            std::vector<double> xs;
            for (const auto* s : {&sa, &sb})
                for (const auto& p : *s)
                    if (p.first >= from && p.first <= to) xs.push_back(p.first);
            std::sort(xs.begin(), xs.end());
            xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

            std::vector<double> g;
            for (double x : xs) g.push_back(interpolate(sa, x) - interpolate(sb, x));
            const bool identical = std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; });
            if (identical) {
                est.pairs.push_back(pc);
                continue;
            }
            all_identical = false;

            std::optional<double> best;
            double best_gap = INFINITY;
            auto consider = [&](double x) {
                const double gap = std::abs(0.5 * (interpolate(sa, x) + interpolate(sb, x)) - mid);
                if (gap < best_gap) {
                    best_gap = gap;
                    best = x;
                }
            };
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (g[k] == 0.0) {
                    consider(xs[k]);
                } else if (k + 1 < xs.size() && g[k] * g[k + 1] < 0) {
                    consider(xs[k] + (xs[k + 1] - xs[k]) * g[k] / (g[k] - g[k + 1]));
                }
            }
            pc.beta = best;
            if (best) found.push_back(*best);
            est.pairs.push_back(pc);
        }
    }
    if (all_identical && range_lo <= range_hi) {
        est.degenerate = true;
        est.beta_c = 0.5 * (range_lo + range_hi);
        est.spread = range_hi - range_lo;
        return est;
    }
    if (!found.empty()) {
        double sum = 0;
        for (double f : found) sum += f;
        est.beta_c = sum / static_cast<double>(found.size());
        const auto [mn, mx] = std::minmax_element(found.begin(), found.end());
        est.spread = 0.5 * (*mx - *mn);
    }
    return est;
}

/// Min-max maps a series onto [0, 1]; a constant series maps to zeros.
inline std::vector<double> normalize_complexity(const std::vector<double>& series) {
    if (series.empty()) throw std::invalid_argument("cannot normalise an empty series");
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    std::vector<double> out(series.size(), 0.0);
    if (*mx == *mn) return out;
    for (std::size_t k = 0; k < series.size(); ++k) out[k] = (series[k] - *mn) / (*mx - *mn);
    return out;
}

/// (beta, mean) series of one measure for one size, from sweep rows.
inline Series series_of(const std::vector<AggregateRow>& rows, int n, Measure m) {
    Series s;
    for (const auto& r : rows)
        if (r.n == n) s.emplace_back(r.beta, r.stat(m).mean);
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace atsp

#pragma once

// Command-line front end: gen, solve, ap, backbone, sweep, rescale, crossover.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atsp/assignment.hpp"
#include "atsp/backbone.hpp"
#include "atsp/experiments.hpp"
#include "atsp/instances.hpp"
#include "atsp/solver.hpp"

namespace atsp::cli {

inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRuntime = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline InstanceFile load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file '" + path + "'");
    return read_instance(in);
}

inline CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file '" + path + "'");
    return read_csv(in);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

inline std::vector<int> parse_sizes(const std::string& list) {
    std::vector<int> sizes;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int n = 0;
        try {
            n = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty()) throw UsageError("bad size '" + item + "' in --sizes");
        if (n < 2) throw UsageError("sizes must be >= 2");
        sizes.push_back(n);
    }
    if (sizes.empty()) throw UsageError("--sizes is empty");
    return sizes;
}

inline std::string join_cities(const std::vector<City>& cities) {
    std::string s;
    for (std::size_t k = 0; k < cities.size(); ++k) s += (k ? " " : "") + std::to_string(cities[k]);
    return s;
}

inline nlohmann::ordered_json solve_json(const InstanceFile& f, const Assignment& root, const SolveResult& r) {
    nlohmann::ordered_json j;
    j["n"] = f.n;
    j["R"] = f.range;
    j["b"] = f.digits;
    j["cost"] = r.cost;
    j["tour"] = r.tour->order;
    j["ap_cost"] = root.cost;
    j["ap_calls"] = r.metrics.ap_calls;
    j["nodes_expanded"] = r.metrics.nodes_expanded;
    j["wall_ms"] = r.metrics.wall_ms;
    return j;
}

}  // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact asymmetric TSP solver and phase-transition experiment harness", "atsp"};
    app.require_subcommand(1);

    // gen
    int gen_n = 0;
    double gen_digits = 0;
    std::uint64_t gen_seed = 0, gen_index = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate a random instance file");
    gen->add_option("--n", gen_n, "Number of cities")->required();
    gen->add_option("--digits", gen_digits, "Digits b; distances are uniform on [0, round(10^b) - 1]")->required();
    gen->add_option("--seed", gen_seed, "Master seed")->required();
    gen->add_option("--index", gen_index, "Instance index within the ensemble");
    gen->add_option("--out", gen_out, "Output path")->required();

    // solve
    std::string solve_in;
    bool solve_json = false;
    auto* solve = app.add_subcommand("solve", "Solve an instance to optimality");
    solve->add_option("--in", solve_in, "Instance file")->required();
    solve->add_flag("--json", solve_json, "Print a JSON result");

    // ap
    std::string ap_in;
    auto* ap = app.add_subcommand("ap", "Solve the assignment relaxation");
    ap->add_option("--in", ap_in, "Instance file")->required();

    // backbone
    std::string bb_in;
    bool bb_enumerate = false;
    std::size_t bb_cap = kDefaultOptimaCap;
    auto* bb = app.add_subcommand("backbone", "Backbone of an instance");
    bb->add_option("--in", bb_in, "Instance file")->required();
    bb->add_flag("--enumerate", bb_enumerate, "Also count optimal tours");
    bb->add_option("--cap", bb_cap, "Optimal-tour count limit")->check(CLI::PositiveNumber);

    // sweep
    std::string sw_sizes, sw_digits, sw_measures, sw_out;
    std::uint64_t sw_instances = 0, sw_seed = 0;
    int sw_workers = default_workers();
    std::size_t sw_cap = kDefaultOptimaCap;
    auto* sweep = app.add_subcommand("sweep", "Run an (n, b) ensemble sweep and write aggregate CSV");
    sweep->add_option("--sizes", sw_sizes, "Comma-separated city counts")->required();
    sweep->add_option("--digits", sw_digits, "Digits grid A:B:S")->required();
    sweep->add_option("--instances", sw_instances, "Instances per grid point")->required();
    sweep->add_option("--seed", sw_seed, "Master seed")->required();
    sweep->add_option("--measures", sw_measures, "Comma-separated measures")->required();
    sweep->add_option("--out", sw_out, "Output CSV")->required();
    sweep->add_option("--workers", sw_workers, "Worker threads (default: $ATSP_WORKERS or all cores)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--optima-cap", sw_cap, "Optimal-tour count limit for log_optima_count")
        ->check(CLI::PositiveNumber);

    // rescale
    std::string rs_in, rs_out;
    double rs_beta_c = 0;
    auto* rescale_cmd = app.add_subcommand("rescale", "Append x = (beta - beta_c) log10(n) to a sweep CSV");
    rescale_cmd->add_option("--in", rs_in, "Sweep CSV")->required();
    rescale_cmd->add_option("--beta-c", rs_beta_c, "Critical point")->required();
    rescale_cmd->add_option("--out", rs_out, "Output CSV")->required();

    // crossover
    std::string cx_in, cx_measure;
    auto* crossover = app.add_subcommand("crossover", "Estimate the crossover point of one measure");
    crossover->add_option("--in", cx_in, "Sweep CSV")->required();
    crossover->add_option("--measure", cx_measure, "Measure name")->required();

    std::vector<std::string> argv_store{"atsp"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "atsp: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*gen) {
            InstanceSpec spec{gen_n, gen_digits, gen_seed, gen_index};
            try {
                spec.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            auto os = detail::open_out(gen_out);
            write_instance(os, make_instance_file(spec));
            if (!os) throw std::runtime_error("failed writing '" + gen_out + "'");
        } else if (*solve) {
            const InstanceFile f = detail::load_instance(solve_in);
            const Assignment root = solve_ap(f.matrix);
            const SolveResult r = solve_atsp_from(f.matrix, SearchNode{{}, root, 0}, SolveOptions{});
            if (solve_json) {
                out << detail::solve_json(f, root, r).dump() << '\n';
            } else {
                out << "cost " << r.cost << '\n';
                out << "tour " << detail::join_cities(r.tour->order) << '\n';
                out << "ap_calls " << r.metrics.ap_calls << '\n';
                out << "nodes " << r.metrics.nodes_expanded << '\n';
            }
        } else if (*ap) {
            const InstanceFile f = detail::load_instance(ap_in);
            const Assignment a = solve_ap(f.matrix);
            out << "ap_cost " << a.cost << '\n';
            out << "cycles " << a.cycles.size() << '\n';
            for (const Cycle& c : a.cycles) {
                std::vector<City> cities;
                for (const Arc& arc : c) cities.push_back(arc.from);
                out << "cycle " << detail::join_cities(cities) << '\n';
            }
        } else if (*bb) {
            const InstanceFile f = detail::load_instance(bb_in);
            const BackboneReport rep = backbone_fraction(f.matrix, bb_enumerate, bb_cap);
            out << "optimal_cost " << rep.optimal_cost << '\n';
            out << "backbone_arcs " << rep.backbone_arcs.size() << '\n';
            out << "fraction " << format_g6(rep.fraction) << '\n';
            for (const Arc& a : rep.backbone_arcs) out << "arc " << a.from << ' ' << a.to << '\n';
            if (rep.optima)
                out << "optima_count " << rep.optima->count << (rep.optima->saturated ? " saturated" : "") << '\n';
            else
                out << "optima_count unknown\n";
        } else if (*sweep) {
            SweepConfig cfg;
            try {
                cfg.sizes = detail::parse_sizes(sw_sizes);
                cfg.digits = parse_digits_grid(sw_digits);
                cfg.measures = parse_measures(sw_measures);
                cfg.instances_per_point = sw_instances;
                cfg.master_seed = sw_seed;
                cfg.optima_cap = sw_cap;
                cfg.workers = sw_workers;
                cfg.validate();
                for (int n : cfg.sizes)
                    for (double b : cfg.digits.values()) InstanceSpec{n, b, cfg.master_seed, 0}.validate();
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const auto rows = run_sweep(cfg);
            auto os = detail::open_out(sw_out);
            write_sweep_csv(os, rows);
            if (!os) throw std::runtime_error("failed writing '" + sw_out + "'");
        } else if (*rescale_cmd) {
            const CsvTable t = rescale_csv(detail::load_csv(rs_in), rs_beta_c);
            auto os = detail::open_out(rs_out);
            write_csv(os, t);
            if (!os) throw std::runtime_error("failed writing '" + rs_out + "'");
        } else if (*crossover) {
            Measure m;
            try {
                m = parse_measure(cx_measure);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            const CsvTable t = detail::load_csv(cx_in);
            const std::size_t cn = t.column("n"), cb = t.column("beta"),
                              cm = t.column(std::string(measure_name(m)) + "_mean");
            std::map<int, Series> curves;
            for (std::size_t k = 0; k < t.rows.size(); ++k)
                curves[static_cast<int>(t.number(k, cn))].emplace_back(t.number(k, cb), t.number(k, cm));
            for (auto& [n, s] : curves) std::sort(s.begin(), s.end());
            const CrossoverEstimate est = estimate_crossover(curves);
            out << "beta_c " << format_g6(est.beta_c) << '\n';
            out << "spread " << format_g6(est.spread) << '\n';
            if (est.degenerate) out << "degenerate identical curves\n";
            for (const auto& p : est.pairs)
                out << "pair " << p.n_small << ' ' << p.n_large << ' ' << (p.beta ? format_g6(*p.beta) : "none") << '\n';
        }
    } catch (const UsageError& e) {
        err << "atsp: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "atsp: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}

}  // namespace atsp::cli

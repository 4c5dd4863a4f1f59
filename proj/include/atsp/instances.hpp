#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "atsp/rng.hpp"
#include "atsp/types.hpp"

namespace atsp {

/// Distance range for a (possibly fractional) number of digits, round-half-up.
inline std::int64_t range_for_digits(double digits) {
    const double r = std::floor(std::pow(10.0, digits) + 0.5);
    if (!(r >= 1.0) || r > 9.0e18) throw std::invalid_argument("digits out of range: " + std::to_string(digits));
    return static_cast<std::int64_t>(r);
}

/// Effective number of digits b / log10(n).
inline double effective_digits(double digits, int n) { return digits / std::log10(static_cast<double>(n)); }

/// (beta - beta_c) * log10(n).
inline double rescale(double beta, int n, double beta_c) { return (beta - beta_c) * std::log10(static_cast<double>(n)); }

/// Digits for which (beta - 2) log10(n) equals `offset` (2.1 in the asymptotic cost runs).
inline double asymptotic_digits(int n, double offset = 2.1) { return 2.0 * std::log10(static_cast<double>(n)) + offset; }

struct InstanceSpec {
    int n = 2;
    double digits = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t index = 0;

    [[nodiscard]] std::int64_t range() const { return range_for_digits(digits); }
    [[nodiscard]] double beta() const { return effective_digits(digits, n); }

    void validate() const {
        if (n < 2) throw std::invalid_argument("instance needs n >= 2, got n=" + std::to_string(n));
        if (!(digits > 0.0) || !std::isfinite(digits))
            throw std::invalid_argument("instance needs digits > 0, got b=" + std::to_string(digits));
        const std::int64_t r = range();
        if ((r - 1) > (kForbidden - 1) / n)
            throw std::invalid_argument("tour costs for n=" + std::to_string(n) + ", b=" + std::to_string(digits) +
                                        " would reach the forbidden sentinel");
    }
};

/// Fills every off-diagonal entry with an independent uniform draw from [0, R-1],
/// row-major, from the instance's own counter stream.
inline DistanceMatrix generate(const InstanceSpec& spec) {
    spec.validate();
    const auto range = static_cast<std::uint64_t>(spec.range());
    CounterRng rng(CounterRng::derive_key(spec.seed, static_cast<std::uint64_t>(spec.n), spec.digits, spec.index));
    DistanceMatrix d(spec.n);
    for (City i = 0; i < spec.n; ++i)
        for (City j = 0; j < spec.n; ++j)
            if (i != j) d.set(i, j, static_cast<Cost>(rng.uniform(range)));
    return d;
}

/// Number of off-diagonal entries, n^2 - n.
inline double offdiagonal_count(int n) { return static_cast<double>(n) * static_cast<double>(n) - n; }

/// Expected fraction of distinct values when M = n^2 - n entries are drawn
/// uniformly from R values: R (1 - (1 - 1/R)^M) / M.
inline double expected_distinct_fraction(int n, std::int64_t range) {
    if (n < 2 || range < 1) throw std::invalid_argument("expected_distinct_fraction needs n >= 2 and R >= 1");
    const double m = offdiagonal_count(n);
    const auto r = static_cast<double>(range);
    const double empty_prob_log = m * std::log1p(-1.0 / r);  // -inf when R == 1
    return r * -std::expm1(empty_prob_log) / m;
}

/// Large-n limit 10^x (1 - exp(-10^-x)) of the distinct fraction.
inline double asymptotic_distinct_fraction(double x) {
    const double y = std::pow(10.0, -x);
    if (y == 0.0) return 1.0;
    if (std::isinf(y)) return 0.0;
    return -std::expm1(-y) / y;
}

struct PrecisionStats {
    double m = 0;     // off-diagonal entry count
    double rho = 0;   // distinct fraction
    double beta = 0;  // effective digits
    double x = 0;     // rescaled coordinate
};

inline std::size_t distinct_offdiagonal_values(const DistanceMatrix& d) {
    const int n = d.size();
    std::vector<Cost> values;
    values.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
    for (City i = 0; i < n; ++i)
        for (City j = 0; j < n; ++j)
            if (i != j) values.push_back(d(i, j));
    std::sort(values.begin(), values.end());
    return static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
}

inline PrecisionStats empirical_distinct_fraction(const DistanceMatrix& d, double digits, double beta_c) {
    PrecisionStats s;
    s.m = offdiagonal_count(d.size());
    s.rho = static_cast<double>(distinct_offdiagonal_values(d)) / s.m;
    s.beta = effective_digits(digits, d.size());
    s.x = rescale(s.beta, d.size(), beta_c);
    return s;
}

// ---------------------------------------------------------------------------
// Instance files
//
//   ATSP <n> <R> <seed> <b>
//   <n rows of n integers, diagonal written as -1>

struct InstanceFile {
    int n = 0;
    std::int64_t range = 0;
    std::uint64_t seed = 0;
    double digits = 0;
    DistanceMatrix matrix;
};

inline InstanceFile make_instance_file(const InstanceSpec& spec) {
    return InstanceFile{spec.n, spec.range(), spec.seed, spec.digits, generate(spec)};
}

/// Shortest decimal string that parses back to the same double.
inline std::string format_double_exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline void write_instance(std::ostream& os, const InstanceFile& f) {
    os << "ATSP " << f.n << ' ' << f.range << ' ' << f.seed << ' ' << format_double_exact(f.digits) << '\n';
    for (City i = 0; i < f.n; ++i) {
        for (City j = 0; j < f.n; ++j) {
            if (j) os << ' ';
            if (i == j)
                os << "-1";
            else
                os << f.matrix(i, j);
        }
        os << '\n';
    }
}

inline InstanceFile read_instance(std::istream& is) {
    auto fail = [](const std::string& what) { throw std::runtime_error("malformed instance file: " + what); };
    std::string line;
    if (!std::getline(is, line)) fail("missing header");
    std::istringstream header(line);
    std::string magic, digits_text;
    InstanceFile f;
    if (!(header >> magic >> f.n >> f.range >> f.seed >> digits_text) || magic != "ATSP")
        fail("header must be 'ATSP <n> <R> <seed> <b>'");
    std::string extra;
    if (header >> extra) fail("trailing header tokens");
    const auto [ptr, ec] = std::from_chars(digits_text.data(), digits_text.data() + digits_text.size(), f.digits);
    if (ec != std::errc{} || ptr != digits_text.data() + digits_text.size()) fail("bad digits '" + digits_text + "'");
    if (f.n < 2) fail("n must be >= 2");
    if (f.range < 1) fail("R must be >= 1");

    f.matrix = DistanceMatrix(f.n);
    for (City i = 0; i < f.n; ++i) {
        if (!std::getline(is, line)) fail("expected " + std::to_string(f.n) + " rows, got " + std::to_string(i));
        std::istringstream row(line);
        for (City j = 0; j < f.n; ++j) {
            long long v = 0;
            if (!(row >> v)) fail("row " + std::to_string(i) + " is short");
            if (i == j) {
                if (v != -1) fail("diagonal entry at row " + std::to_string(i) + " must be -1");
            } else {
                if (v < 0 || v >= f.range)
                    fail("entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside [0, R-1]");
                f.matrix.set(i, j, v);
            }
        }
        if (row >> extra) fail("row " + std::to_string(i) + " is long");
    }
    while (std::getline(is, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) fail("trailing content after matrix");
    return f;
}

}  // namespace atsp

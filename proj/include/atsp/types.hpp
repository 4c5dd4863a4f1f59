#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace atsp {

using Cost = std::int64_t;
using City = int;

/// Reserved price of a forbidden arc. Every achievable tour cost is strictly
/// below it and cost arithmetic saturates here instead of overflowing.
inline constexpr Cost kForbidden = Cost{1} << 60;

inline constexpr Cost saturating_add(Cost a, Cost b) noexcept {
    if (a >= kForbidden || b >= kForbidden) return kForbidden;
    const Cost s = a + b;
    return s >= kForbidden ? kForbidden : s;
}

/// A directed arc `from -> to`.
struct Arc {
    City from = 0;
    City to = 0;

    friend constexpr auto operator<=>(const Arc&, const Arc&) = default;
};

/// Dense n x n integer cost matrix with a forbidden diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    explicit DistanceMatrix(int n) : n_(n) {
        if (n < 2) throw std::invalid_argument("distance matrix needs at least 2 cities, got " + std::to_string(n));
        data_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) data_[index(i, i)] = kForbidden;
    }

    /// Builds from row-major rows; diagonal values in `rows` are ignored.
    static DistanceMatrix from_rows(const std::vector<std::vector<Cost>>& rows) {
        DistanceMatrix d(static_cast<int>(rows.size()));
        for (int i = 0; i < d.n_; ++i) {
            if (static_cast<int>(rows[i].size()) != d.n_)
                throw std::invalid_argument("distance matrix row " + std::to_string(i) + " has wrong length");
            for (int j = 0; j < d.n_; ++j)
                if (i != j) d.set(i, j, rows[i][j]);
        }
        return d;
    }

    [[nodiscard]] int size() const noexcept { return n_; }

    [[nodiscard]] Cost operator()(City i, City j) const noexcept { return data_[index(i, j)]; }
    [[nodiscard]] const Cost* row(City i) const noexcept { return data_.data() + index(i, 0); }

    void set(City i, City j, Cost c) {
        if (i == j) throw std::invalid_argument("diagonal entries are reserved");
        if (c < 0 || c >= kForbidden) throw std::invalid_argument("arc cost out of range: " + std::to_string(c));
        data_[index(i, j)] = c;
    }

    /// Largest off-diagonal entry.
    [[nodiscard]] Cost max_entry() const noexcept {
        Cost m = 0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (i != j) m = std::max(m, (*this)(i, j));
        return m;
    }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    [[nodiscard]] std::size_t index(City i, City j) const noexcept {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j);
    }

    int n_ = 0;
    std::vector<Cost> data_;
};

}  // namespace atsp

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sadp {

/// Discretization of the truncated backlog space: K grid points per server
/// at spacing delta, so index z represents backlog z*delta and the largest
/// representable backlog is (K-1)*delta.
struct GridSpec {
    int m = 1;
    int K = 1;
    double delta = 0.25;

    double max_backlog() const { return (K - 1) * delta; }
    bool operator==(const GridSpec&) const = default;
};

/// Nondecreasing m-tuple of grid indices, 0 <= z_1 <= ... <= z_m <= K-1.
/// Server exchangeability makes these the canonical representatives of the
/// full K^m grid.
struct SortedState {
    std::vector<int> z;

    int dim() const { return static_cast<int>(z.size()); }
    bool operator==(const SortedState&) const = default;
};

/// Number of sorted states: K(K+1)...(K+m-1)/m!. Throws on 64-bit overflow.
std::int64_t state_count(int K, int m);

/// Symmetry-reduced state space with precomputed binomial coefficients so
/// that rank() is O(m). Values are stored in a flat array of length
/// state_count(), indexed by rank; the dense K^m grid is never allocated.
class StateSpace {
  public:
    explicit StateSpace(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    std::int64_t size() const { return count_; }

    /// Colexicographic rank of a sorted state: sum_q C(z_q + q, q + 1)
    /// over 0-based positions q. Bijection onto {0, ..., size()-1}.
    std::int64_t rank(const SortedState& s) const;
    SortedState unrank(std::int64_t idx) const;

    /// Sort a raw index tuple; returns the sorted state and the stable
    /// permutation p with sorted[k] = raw[p[k]].
    std::pair<SortedState, std::vector<int>> canonicalize(const std::vector<int>& raw) const;

    /// Add j grid steps of work to the server at sorted position i (1-based),
    /// clamp at K-1 and re-sort.
    SortedState add_job(const SortedState& s, int i, int j) const;

    /// Age every server by j grid steps, clamping at zero.
    static SortedState advance(const SortedState& s, int j);

    /// Binomial C(n, k) from the precomputed (K+m) x (m+1) table.
    std::int64_t binom(int n, int k) const { return binom_[static_cast<size_t>(n) * (spec_.m + 1) + k]; }

    void validate(const SortedState& s) const;

  private:
    GridSpec spec_;
    std::int64_t count_ = 0;
    std::vector<std::int64_t> binom_;  // row-major (K+m) x (m+1)
};

/// In-place colex successor of a sorted tuple; the enumeration visits states
/// in increasing rank order starting from the all-zero state. Returns false
/// after the last state.
bool next_sorted_state(std::vector<int>& z, int K);

}  // namespace sadp

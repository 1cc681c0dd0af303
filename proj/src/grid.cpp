#include "sadp/grid.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sadp {

std::int64_t state_count(int K, int m) {
    if (K < 1 || m < 1) throw std::invalid_argument("state_count: K and m must be >= 1");
    // K(K+1)...(K+m-1)/m! computed with an overflow-checked 128-bit product.
    __int128 num = 1;
    for (int i = 0; i < m; ++i) {
        num *= (K + i);
        if (num > (__int128)std::numeric_limits<std::int64_t>::max() * 1000000) {
            throw std::overflow_error("state_count: overflow for K=" + std::to_string(K) +
                                      " m=" + std::to_string(m));
        }
    }
    for (int i = 2; i <= m; ++i) num /= i;
    if (num > std::numeric_limits<std::int64_t>::max())
        throw std::overflow_error("state_count: result exceeds 64 bits");
    return static_cast<std::int64_t>(num);
}

StateSpace::StateSpace(GridSpec spec) : spec_(spec) {
    if (spec_.m < 1 || spec_.K < 1) throw std::invalid_argument("StateSpace: invalid GridSpec");
    if (!(spec_.delta > 0.0)) throw std::invalid_argument("StateSpace: delta must be > 0");
    count_ = state_count(spec_.K, spec_.m);
    const int rows = spec_.K + spec_.m;
    const int cols = spec_.m + 1;
    binom_.assign(static_cast<size_t>(rows) * cols, 0);
    for (int n = 0; n < rows; ++n) {
        binom_[static_cast<size_t>(n) * cols] = 1;
        for (int k = 1; k <= std::min(n, spec_.m); ++k) {
            binom_[static_cast<size_t>(n) * cols + k] =
                binom_[static_cast<size_t>(n - 1) * cols + k - 1] +
                (n - 1 >= k ? binom_[static_cast<size_t>(n - 1) * cols + k] : 0);
        }
    }
}

void StateSpace::validate(const SortedState& s) const {
    if (s.dim() != spec_.m) throw std::invalid_argument("SortedState: wrong dimension");
    int prev = 0;
    for (int v : s.z) {
        if (v < prev || v >= spec_.K)
            throw std::invalid_argument("SortedState: unsorted or out-of-range coordinate");
        prev = v;
    }
}

std::int64_t StateSpace::rank(const SortedState& s) const {
    validate(s);
    std::int64_t r = 0;
    for (int q = 0; q < spec_.m; ++q) r += binom(s.z[q] + q, q + 1);
    return r;
}

SortedState StateSpace::unrank(std::int64_t idx) const {
    if (idx < 0 || idx >= count_) throw std::out_of_range("unrank: index out of range");
    SortedState s;
    s.z.assign(spec_.m, 0);
    // Greedy from the most significant (largest) coordinate down.
    std::int64_t rem = idx;
    for (int q = spec_.m - 1; q >= 0; --q) {
        int lo = 0, hi = spec_.K - 1, best = 0;
        while (lo <= hi) {
            int mid = (lo + hi) / 2;
            if (binom(mid + q, q + 1) <= rem) {
                best = mid;
                lo = mid + 1;
            } else {
                hi = mid - 1;
            }
        }
        s.z[q] = best;
        rem -= binom(best + q, q + 1);
    }
    return s;
}

std::pair<SortedState, std::vector<int>> StateSpace::canonicalize(const std::vector<int>& raw) const {
    if (static_cast<int>(raw.size()) != spec_.m)
        throw std::invalid_argument("canonicalize: wrong dimension");
    for (int v : raw)
        if (v < 0 || v >= spec_.K) throw std::invalid_argument("canonicalize: coordinate out of range");
    std::vector<int> perm(raw.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return raw[a] < raw[b]; });
    SortedState s;
    s.z.resize(raw.size());
    for (size_t k = 0; k < raw.size(); ++k) s.z[k] = raw[perm[k]];
    return {std::move(s), std::move(perm)};
}

SortedState StateSpace::add_job(const SortedState& s, int i, int j) const {
    validate(s);
    if (i < 1 || i > spec_.m) throw std::invalid_argument("add_job: position out of range");
    if (j < 0) throw std::invalid_argument("add_job: negative size");
    SortedState out = s;
    long v = static_cast<long>(out.z[i - 1]) + j;
    out.z[i - 1] = static_cast<int>(std::min<long>(v, spec_.K - 1));
    std::sort(out.z.begin(), out.z.end());
    return out;
}

SortedState StateSpace::advance(const SortedState& s, int j) {
    if (j < 0) throw std::invalid_argument("advance: negative step");
    SortedState out = s;
    for (int& v : out.z) v = std::max(0, v - j);
    return out;
}

bool next_sorted_state(std::vector<int>& z, int K) {
    const int m = static_cast<int>(z.size());
    for (int q = 0; q < m; ++q) {
        const int bound = (q + 1 < m) ? z[q + 1] : K - 1;
        if (z[q] + 1 <= bound) {
            ++z[q];
            for (int k = 0; k < q; ++k) z[k] = 0;
            return true;
        }
    }
    return false;
}

}  // namespace sadp

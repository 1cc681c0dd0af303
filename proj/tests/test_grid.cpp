#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "sadp/grid.hpp"

using namespace sadp;

namespace {

// Independent enumeration oracle: all nondecreasing m-tuples over
// {0..K-1} in colex order (last coordinate most significant).
void enumerate_sorted(int K, int m, std::vector<std::vector<int>>& out) {
    // generate all K^m tuples, keep the sorted ones, order them colex
    out.clear();
    std::vector<int> t(m, 0);
    while (true) {
        if (std::is_sorted(t.begin(), t.end())) out.push_back(t);
        int i = 0;
        while (i < m && t[i] == K - 1) t[i++] = 0;
        if (i == m) break;
        ++t[i];
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        for (int q = static_cast<int>(a.size()) - 1; q >= 0; --q)
            if (a[q] != b[q]) return a[q] < b[q];
        return false;
    });
}

}  // namespace

TEST_CASE("state_count formula and trivial cases") {
    CHECK(state_count(1, 1) == 1);
    CHECK(state_count(1, 4) == 1);
    CHECK(state_count(2, 2) == 3);  // {(0,0),(0,1),(1,1)}
    CHECK(state_count(200, 3) == 1353400);
    CHECK(state_count(200, 2) == 20100);
    CHECK_THROWS(state_count(0, 1));
    CHECK_THROWS_AS(state_count(2000000000, 4), std::overflow_error);
}

TEST_CASE("state_count matches brute-force enumeration, K<=15 m<=4") {
    for (int m = 1; m <= 4; ++m) {
        for (int K = 1; K <= 15; ++K) {
            std::vector<std::vector<int>> all;
            enumerate_sorted(K, m, all);
            CHECK(state_count(K, m) == static_cast<std::int64_t>(all.size()));
        }
    }
}

TEST_CASE("rank examples") {
    StateSpace s2({2, 8, 0.25});
    CHECK(s2.rank({{0, 0}}) == 0);
    CHECK(s2.rank({{1, 1}}) == 2);
    StateSpace s3({3, 8, 0.25});
    CHECK(s3.rank({{0, 1, 2}}) == 5);
    CHECK_THROWS(s2.rank({{1, 0}}));      // unsorted
    CHECK_THROWS(s2.rank({{0, 99}}));     // out of range
    CHECK_THROWS(s2.rank({{0, 1, 2}}));   // wrong dimension
}

TEST_CASE("rank/unrank bijection vs enumeration oracle, K<=15 m<=4") {
    for (int m = 1; m <= 4; ++m) {
        for (int K = 1; K <= 15; ++K) {
            StateSpace sp({m, K, 0.25});
            std::vector<std::vector<int>> all;
            enumerate_sorted(K, m, all);
            REQUIRE(sp.size() == static_cast<std::int64_t>(all.size()));
            for (std::int64_t idx = 0; idx < sp.size(); ++idx) {
                const SortedState st{all[idx]};
                CHECK(sp.rank(st) == idx);
                CHECK(sp.unrank(idx) == st);
            }
        }
    }
}

TEST_CASE("unrank examples and range errors") {
    StateSpace s2({2, 8, 0.25});
    CHECK(s2.unrank(0) == SortedState{{0, 0}});
    CHECK(s2.unrank(2) == SortedState{{1, 1}});
    StateSpace s3({3, 8, 0.25});
    CHECK(s3.unrank(5) == SortedState{{0, 1, 2}});
    CHECK_THROWS(s2.unrank(-1));
    CHECK_THROWS(s2.unrank(s2.size()));
}

TEST_CASE("canonicalize sorts stably and reports the permutation") {
    StateSpace sp({2, 8, 0.25});
    auto [s, p] = sp.canonicalize({5, 2});
    CHECK(s == SortedState{{2, 5}});
    CHECK(p == std::vector<int>{1, 0});
    auto [s2, p2] = sp.canonicalize({3, 3});
    CHECK(s2 == SortedState{{3, 3}});
    CHECK(p2 == std::vector<int>{0, 1});  // ties keep original order
    StateSpace sp3({3, 8, 0.25});
    auto [s3, p3] = sp3.canonicalize({7, 0, 7});
    CHECK(s3 == SortedState{{0, 7, 7}});
    CHECK(p3 == std::vector<int>{1, 0, 2});
    CHECK_THROWS(sp.canonicalize({-1, 0}));
    CHECK_THROWS(sp.canonicalize({0, 8}));
}

TEST_CASE("add_job clamps and re-sorts") {
    StateSpace sp({2, 8, 0.25});
    CHECK(sp.add_job({{0, 1}}, 2, 3) == SortedState{{0, 4}});
    CHECK(sp.add_job({{0, 7}}, 2, 3) == SortedState{{0, 7}});
    StateSpace sp3({3, 8, 0.25});
    CHECK(sp3.add_job({{2, 2, 5}}, 1, 4) == SortedState{{2, 5, 6}});
}

TEST_CASE("advance clamps at zero and preserves order") {
    CHECK(StateSpace::advance({{0, 1, 3}}, 2) == SortedState{{0, 0, 1}});
    CHECK(StateSpace::advance({{4, 4}}, 0) == SortedState{{4, 4}});
    CHECK(StateSpace::advance({{1, 5}}, 9) == SortedState{{0, 0}});
}

TEST_CASE("advance strictly decreases rank away from the origin") {
    for (int m = 1; m <= 3; ++m) {
        StateSpace sp({m, 9, 0.25});
        for (std::int64_t idx = 1; idx < sp.size(); ++idx) {
            const SortedState s = sp.unrank(idx);
            for (int j = 1; j <= 3; ++j) CHECK(sp.rank(StateSpace::advance(s, j)) < idx);
        }
    }
}

TEST_CASE("add_job + canonicalize is permutation invariant") {
    StateSpace sp({3, 10, 0.25});
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> raw(3);
        for (int& v : raw) v = static_cast<int>(rng() % 10);
        const int j = static_cast<int>(rng() % 6);
        auto [base, bp] = sp.canonicalize(raw);
        // adding to the same physical server, however raw is permuted,
        // must land on the same canonical state
        std::vector<int> perm{0, 1, 2};
        std::sort(perm.begin(), perm.end());
        std::vector<SortedState> results;
        do {
            std::vector<int> shuffled(3);
            for (int k = 0; k < 3; ++k) shuffled[k] = raw[perm[k]];
            auto [s, p] = sp.canonicalize(shuffled);
            // position of physical server raw[0] in sorted order
            int pos = -1;
            for (int k = 0; k < 3; ++k)
                if (perm[p[k]] == 0) pos = k + 1;
            REQUIRE(pos >= 1);
            results.push_back(sp.add_job(s, pos, j));
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (const auto& r : results) CHECK(r == results.front());
    }
}

TEST_CASE("next_sorted_state enumerates in rank order") {
    StateSpace sp({3, 7, 0.25});
    std::vector<int> z(3, 0);
    std::int64_t idx = 0;
    do {
        CHECK(sp.rank({z}) == idx);
        ++idx;
    } while (next_sorted_state(z, 7));
    CHECK(idx == sp.size());
}

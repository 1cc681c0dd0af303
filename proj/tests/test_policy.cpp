#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "sadp/policy.hpp"

using namespace sadp;

namespace {

std::shared_ptr<ValueTable> rnd_table(int m, double lambda, double mu, int K = 40,
                                      double delta = 0.25) {
    const GridSpec spec{m, K, delta};
    const SystemParams params(m, lambda, mu);
    return std::make_shared<ValueTable>(init_table(spec, params, InitMode::Rnd));
}

}  // namespace

TEST_CASE("interpolation is exact on grid points") {
    auto t = rnd_table(2, 1.6, 1.0);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    StateSpace sp(t->spec);
    for (int z1 : {0, 3, 17, 39}) {
        for (int z2 : {0, 5, 39}) {
            const std::array<double, 2> u{z1 * 0.25, z2 * 0.25};
            const double expect = t->values[sp.rank(sp.canonicalize({z1, z2}).first)];
            CHECK(vf.value(u) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("interpolation reproduces the separable quadratic off-grid") {
    // rnd init is sum of per-coordinate quadratics; multilinear interpolation
    // of a coordinate-wise quadratic has error (delta/2)^2 * a per axis.
    auto t = rnd_table(2, 1.6, 1.0);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    const double a = 0.8 / (2.0 * 0.2);  // lambda' / (2 (1 - rho'))
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u01(0.0, 9.0);
    for (int k = 0; k < 200; ++k) {
        const std::array<double, 2> u{u01(rng), u01(rng)};
        const double exact = a * (u[0] * u[0] + u[1] * u[1]);
        CHECK(std::abs(vf.value(u) - exact) <= 2.0 * a * (0.25 / 2) * (0.25 / 2) + 1e-12);
    }
}

TEST_CASE("interpolation clamps beyond the grid") {
    auto t = rnd_table(2, 1.6, 1.0, 20);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    const double edge = 19 * 0.25;
    const std::array<double, 2> at_edge{edge, edge}, beyond{edge + 5.0, edge + 9.0};
    CHECK(vf.value(beyond) == doctest::Approx(vf.value(at_edge)).epsilon(1e-12));
}

TEST_CASE("interpolation is symmetric in the coordinates") {
    auto t = rnd_table(3, 2.4, 1.0, 16);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 3.5);
    for (int k = 0; k < 100; ++k) {
        std::array<double, 3> u{u01(rng), u01(rng), u01(rng)};
        const double base = vf.value(u);
        std::sort(u.begin(), u.end());
        do {
            CHECK(vf.value(u) == doctest::Approx(base).epsilon(1e-12));
        } while (std::next_permutation(u.begin(), u.end()));
    }
}

TEST_CASE("action on a flat table reduces to least-work-left") {
    const GridSpec spec{3, 12, 0.25};
    const SystemParams params(3, 1.5, 1.0);
    auto t = std::make_shared<ValueTable>(init_table(spec, params, InitMode::Zero));
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u01(0.0, 2.5);
    for (int k = 0; k < 200; ++k) {
        const std::array<double, 3> u{u01(rng), u01(rng), u01(rng)};
        const int got = vf.action(u, 1.0);
        const int lwl = static_cast<int>(std::min_element(u.begin(), u.end()) - u.begin());
        CHECK(u[got] == doctest::Approx(u[lwl]).epsilon(1e-12));
    }
}

TEST_CASE("action ties break to the smaller backlog then smaller index") {
    const GridSpec spec{2, 12, 0.25};
    const SystemParams params(2, 1.0, 1.0);
    auto t = std::make_shared<ValueTable>(init_table(spec, params, InitMode::Zero));
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    // zero table, waiting-time cost: server cost is u_i, equal backlogs tie
    CHECK(vf.action(std::array<double, 2>{1.0, 1.0}, 0.5) == 0);
    CHECK(vf.action(std::array<double, 2>{1.5, 1.0}, 0.5) == 1);
}

TEST_CASE("action reports when a candidate leaves the grid") {
    auto t = rnd_table(2, 1.6, 1.0, 20);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    bool hit = false;
    vf.action(std::array<double, 2>{0.5, 1.0}, 0.5, hit);
    CHECK_FALSE(hit);
    vf.action(std::array<double, 2>{4.5, 4.5}, 2.0, hit);
    CHECK(hit);
}

TEST_CASE("extract_action is permutation-equivariant") {
    auto t = rnd_table(3, 2.4, 1.0, 16);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u01(0.0, 3.0);
    for (int k = 0; k < 50; ++k) {
        std::array<double, 3> u{u01(rng), u01(rng), u01(rng)};
        const int a = extract_action(*t, u, 0.7);
        std::array<int, 3> perm{1, 2, 0};
        std::array<double, 3> pu{u[perm[0]], u[perm[1]], u[perm[2]]};
        const int pa = extract_action(*t, pu, 0.7);
        // same physical server modulo the relabeling (ties may pick either
        // member of an equal-backlog pair, which is still the same backlog)
        CHECK(pu[pa] == doctest::Approx(u[a]).epsilon(1e-12));
    }
}

TEST_CASE("action_map_slice shape and boundary flags") {
    auto t = rnd_table(2, 1.6, 1.0, 20);
    const ActionMap map = action_map_slice(*t, {}, 1.0, 12);
    CHECK(map.n == 12);
    CHECK(map.choice.size() == 144);
    CHECK(map.boundary.size() == 144);
    // on the diagonal the choice must be a valid server
    for (int i = 0; i < 12; ++i) CHECK(map.choice[i * 12 + i] < 2);
    // rnd table is symmetric and strictly convex, so the shorter queue wins;
    // entry (row, col) has u_a = col * delta and u_b = row * delta
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 12; ++c)
            if (r != c) CHECK(map.choice[r * 12 + c] == (r > c ? 0 : 1));
    CHECK_THROWS(action_map_slice(*t, {{0, 1.0}}, 1.0, 8));  // m=2 wants 0 fixed
}

TEST_CASE("action_map_slice with a fixed coordinate (m=3)") {
    auto t = rnd_table(3, 2.4, 1.0, 16);
    const ActionMap map = action_map_slice(*t, {{2, 1.5}}, 0.5, 8);
    CHECK(map.n == 8);
    CHECK(map.fixed.size() == 1);
    for (auto ch : map.choice) CHECK(ch < 3);
}

TEST_CASE("export_cut diagonal matches direct evaluation") {
    auto t = rnd_table(2, 1.6, 1.0, 20);
    ValueFunction vf(std::static_pointer_cast<const ValueTable>(t));
    const CutSeries cut = export_cut(*t, {Cut::Kind::Diagonal, 0, 0.0});
    REQUIRE(cut.abscissa.size() == cut.value.size());
    REQUIRE(cut.abscissa.size() > 2);
    for (size_t i = 0; i < cut.abscissa.size(); ++i) {
        const double u = cut.abscissa[i];
        CHECK(cut.value[i] ==
              doctest::Approx(vf.value(std::array<double, 2>{u, u})).epsilon(1e-12));
    }
}

TEST_CASE("export_cut fixed-total is symmetric about zero for a symmetric table") {
    auto t = rnd_table(2, 1.6, 1.0, 20);
    const CutSeries cut = export_cut(*t, {Cut::Kind::FixedTotal, 0, 4.0});
    REQUIRE(!cut.abscissa.empty());
    // abscissa is the difference u2 - u1 at constant u1 + u2
    for (size_t i = 0; i < cut.abscissa.size(); ++i) {
        const double d = cut.abscissa[i];
        const auto it = std::min_element(
            cut.abscissa.begin(), cut.abscissa.end(),
            [&](double a, double b) { return std::abs(a + d) < std::abs(b + d); });
        CHECK(cut.value[i] ==
              doctest::Approx(cut.value[it - cut.abscissa.begin()]).epsilon(1e-9));
    }
}

TEST_CASE("fit_diagonal_quadratic recovers the rnd closed form") {
    // rnd init on the diagonal: v(u,u) = 2 lambda' u^2 / (2 (1 - rho'))
    auto t = rnd_table(2, 1.6, 1.0, 40);
    const double a = fit_diagonal_quadratic(*t, 6.0);
    CHECK(a == doctest::Approx(1.6 / (2.0 * 0.2)).epsilon(1e-3));
    CHECK_THROWS(fit_diagonal_quadratic(*t, 0.1));  // too few sample points
}

TEST_CASE("heuristic actions") {
    std::mt19937_64 rng(1);
    int cursor = -1;
    const std::array<double, 3> backlog{2.0, 0.5, 1.25};
    const std::array<int, 3> counts{3, 2, 1};

    CHECK(heuristic_action(PolicyKind::Lwl, backlog, counts, cursor, rng) == 1);
    CHECK(heuristic_action(PolicyKind::Jsq, backlog, counts, cursor, rng) == 2);
    // JSQ count tie breaks to the smaller backlog
    const std::array<int, 3> tied{2, 1, 1};
    CHECK(heuristic_action(PolicyKind::Jsq, backlog, tied, cursor, rng) == 1);

    cursor = -1;
    for (int expect : {0, 1, 2, 0, 1}) {
        CHECK(heuristic_action(PolicyKind::RoundRobin, backlog, counts, cursor, rng) == expect);
    }

    // RND covers every server and is uniform to within loose counting error
    std::array<int, 3> hits{0, 0, 0};
    for (int k = 0; k < 3000; ++k)
        ++hits[heuristic_action(PolicyKind::Rnd, backlog, counts, cursor, rng)];
    for (int h : hits) CHECK(h > 800);
}

#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sadp/grid.hpp"
#include "sadp/viter.hpp"

namespace sadp {

enum class PolicyKind { Rnd, Lwl, Jsq, RoundRobin, ValueBased };

struct DispatchPolicy {
    PolicyKind kind = PolicyKind::Lwl;
    std::shared_ptr<const ValueTable> table;  // ValueBased only

    static DispatchPolicy rnd() { return {PolicyKind::Rnd, nullptr}; }
    static DispatchPolicy lwl() { return {PolicyKind::Lwl, nullptr}; }
    static DispatchPolicy jsq() { return {PolicyKind::Jsq, nullptr}; }
    static DispatchPolicy round_robin() { return {PolicyKind::RoundRobin, nullptr}; }
    static DispatchPolicy value_based(std::shared_ptr<const ValueTable> t) {
        return {PolicyKind::ValueBased, std::move(t)};
    }
};

/// Action map over a 2-D slice of the backlog space at grid resolution:
/// entry (row, col) is the 0-based server chosen for a job of size x when
/// the two free coordinates are (col * delta, row * delta).
struct ActionMap {
    int free_a = 0, free_b = 1;                       // varying coordinate indices
    std::vector<std::pair<int, double>> fixed;        // (coordinate, backlog) for the rest
    double x = 1.0;
    double delta = 0.25;
    int n = 0;                                        // points per free axis
    std::vector<std::uint8_t> choice;                 // n*n, row-major
    std::vector<std::uint8_t> boundary;               // 1 when a candidate left the grid
};

struct CutSeries {
    std::string kind;
    std::vector<double> abscissa;
    std::vector<double> value;
};

/// Continuous read access to a value table: multilinear interpolation over
/// the 2^m corners of the containing cell, each corner canonicalized and
/// ranked. Queries beyond the grid clamp to the boundary value.
class ValueFunction {
  public:
    explicit ValueFunction(std::shared_ptr<const ValueTable> table);

    const ValueTable& table() const { return *table_; }

    double value(std::span<const double> u) const;

    /// argmin_i { c(u_i, x) + v(u + x e_i) }; ties go to the smaller backlog,
    /// then the smaller index. Returns the 0-based raw server position.
    int action(std::span<const double> u, double x) const;
    int action(std::span<const double> u, double x, bool& hit_boundary) const;

  private:
    std::shared_ptr<const ValueTable> table_;
    StateSpace space_;
};

double interpolate_value(const ValueTable& v, std::span<const double> u);
int extract_action(const ValueTable& v, std::span<const double> u, double x);

ActionMap action_map_slice(const ValueTable& v, const std::vector<std::pair<int, double>>& fixed,
                           double x, int n_points);

struct Cut {
    enum class Kind { Diagonal, FixedCoordinate, FixedTotal } kind = Kind::Diagonal;
    int coord = 0;       // FixedCoordinate
    double value = 0.0;  // FixedCoordinate: pinned backlog; FixedTotal: u_1 + u_2
};

CutSeries export_cut(const ValueTable& v, const Cut& cut);

/// Least-squares coefficient a of v(u,...,u) - v(0) ~ a u^2 over [0, u_max].
double fit_diagonal_quadratic(const ValueTable& v, double u_max);

/// Heuristic dispatch decision; rr_cursor is the last server used by
/// RoundRobin (-1 initially) and is advanced in place.
int heuristic_action(PolicyKind kind, std::span<const double> backlogs,
                     std::span<const int> counts, int& rr_cursor, std::mt19937_64& rng);

}  // namespace sadp

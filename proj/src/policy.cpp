#include "sadp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sadp {

ValueFunction::ValueFunction(std::shared_ptr<const ValueTable> table)
    : table_(std::move(table)), space_(table_->spec) {
    if (static_cast<std::int64_t>(table_->values.size()) != space_.size())
        throw std::invalid_argument("ValueFunction: table length does not match grid");
}

double ValueFunction::value(std::span<const double> u) const {
    const GridSpec& g = table_->spec;
    const int m = g.m;
    if (static_cast<int>(u.size()) != m) throw std::invalid_argument("value: wrong dimension");
    std::vector<int> base(m);
    std::vector<double> frac(m);
    for (int i = 0; i < m; ++i) {
        if (u[i] < 0.0) throw std::domain_error("value: negative backlog");
        double pos = u[i] / g.delta;
        const double maxp = g.K - 1;
        if (pos >= maxp) {  // clamp beyond-grid queries to the boundary
            base[i] = g.K - 1;
            frac[i] = 0.0;
        } else {
            const double fl = std::floor(pos);
            base[i] = static_cast<int>(fl);
            frac[i] = pos - fl;
        }
    }
    // Multilinear blend over the 2^m cell corners.
    double acc = 0.0;
    std::vector<int> corner(m);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        double wgt = 1.0;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                if (frac[i] == 0.0) { wgt = 0.0; break; }
                wgt *= frac[i];
                corner[i] = base[i] + 1;
            } else {
                wgt *= 1.0 - frac[i];
                corner[i] = base[i];
            }
        }
        if (wgt == 0.0) continue;
        auto [sorted, perm] = space_.canonicalize(corner);
        acc += wgt * table_->values[space_.rank(sorted)];
    }
    return acc;
}

int ValueFunction::action(std::span<const double> u, double x, bool& hit_boundary) const {
    const int m = table_->spec.m;
    if (static_cast<int>(u.size()) != m) throw std::invalid_argument("action: wrong dimension");
    if (!(x > 0.0)) throw std::invalid_argument("action: job size must be > 0");
    hit_boundary = false;
    const double edge = table_->spec.max_backlog();
    std::vector<double> cand(u.begin(), u.end());
    int best = 0;
    double best_val = 0.0;
    for (int i = 0; i < m; ++i) {
        cand[i] = u[i] + x;
        if (cand[i] > edge) hit_boundary = true;
        const double val = table_->params.cost(u[i], x) + value(cand);
        cand[i] = u[i];
        const bool better =
            i == 0 || val < best_val ||
            (val == best_val && (u[i] < u[best] || (u[i] == u[best] && i < best)));
        if (better) {
            best = i;
            best_val = val;
        }
    }
    return best;
}

int ValueFunction::action(std::span<const double> u, double x) const {
    bool dummy;
    return action(u, x, dummy);
}

double interpolate_value(const ValueTable& v, std::span<const double> u) {
    ValueFunction vf(std::make_shared<ValueTable>(v));
    return vf.value(u);
}

int extract_action(const ValueTable& v, std::span<const double> u, double x) {
    ValueFunction vf(std::make_shared<ValueTable>(v));
    return vf.action(u, x);
}

ActionMap action_map_slice(const ValueTable& v, const std::vector<std::pair<int, double>>& fixed,
                           double x, int n_points) {
    const int m = v.spec.m;
    if (static_cast<int>(fixed.size()) != m - 2)
        throw std::invalid_argument("action_map_slice: exactly two coordinates must stay free");
    std::vector<bool> is_fixed(m, false);
    for (auto [k, val] : fixed) {
        if (k < 0 || k >= m || is_fixed[k])
            throw std::invalid_argument("action_map_slice: bad fixed coordinate");
        is_fixed[k] = true;
    }
    ActionMap map;
    map.fixed = fixed;
    map.x = x;
    map.delta = v.spec.delta;
    map.n = n_points > 0 ? n_points : v.spec.K;
    int free_idx[2], nf = 0;
    for (int i = 0; i < m; ++i)
        if (!is_fixed[i]) free_idx[nf++] = i;
    map.free_a = free_idx[0];
    map.free_b = free_idx[1];
    map.choice.resize(static_cast<size_t>(map.n) * map.n);
    map.boundary.resize(map.choice.size());

    ValueFunction vf(std::make_shared<ValueTable>(v));
    std::vector<double> u(m, 0.0);
    for (auto [k, val] : fixed) u[k] = val;
    for (int row = 0; row < map.n; ++row) {
        u[map.free_b] = row * map.delta;
        for (int col = 0; col < map.n; ++col) {
            u[map.free_a] = col * map.delta;
            bool hit = false;
            const int a = vf.action(u, x, hit);
            map.choice[static_cast<size_t>(row) * map.n + col] = static_cast<std::uint8_t>(a);
            map.boundary[static_cast<size_t>(row) * map.n + col] = hit ? 1 : 0;
        }
    }
    return map;
}

CutSeries export_cut(const ValueTable& v, const Cut& cut) {
    const GridSpec& g = v.spec;
    StateSpace space(g);
    CutSeries out;
    switch (cut.kind) {
        case Cut::Kind::Diagonal: {
            out.kind = "diagonal";
            SortedState s;
            s.z.assign(g.m, 0);
            for (int k = 0; k < g.K; ++k) {
                std::fill(s.z.begin(), s.z.end(), k);
                out.abscissa.push_back(k * g.delta);
                out.value.push_back(v.values[space.rank(s)]);
            }
            break;
        }
        case Cut::Kind::FixedCoordinate: {
            out.kind = "fixed_coordinate";
            const double pos = cut.value / g.delta;
            const int zk = static_cast<int>(std::llround(pos));
            if (std::abs(pos - zk) > 1e-9 || zk < 0 || zk >= g.K)
                throw std::invalid_argument("export_cut: fixed value must be a grid multiple");
            // Vary one coordinate; all remaining coordinates sit at the
            // pinned value (for m=2 this is the usual fixed-u_2 cut).
            std::vector<int> raw(g.m, zk);
            for (int k = 0; k < g.K; ++k) {
                raw[0] = k;
                auto [sorted, perm] = space.canonicalize(raw);
                out.abscissa.push_back(k * g.delta);
                out.value.push_back(v.values[space.rank(sorted)]);
            }
            break;
        }
        case Cut::Kind::FixedTotal: {
            out.kind = "fixed_total";
            if (g.m != 2) throw std::invalid_argument("export_cut: fixed_total requires m = 2");
            const double pos = cut.value / g.delta;
            const int ztot = static_cast<int>(std::llround(pos));
            if (std::abs(pos - ztot) > 1e-9 || ztot < 0 || ztot > 2 * (g.K - 1))
                throw std::invalid_argument("export_cut: total must be a grid multiple in range");
            for (int z1 = std::max(0, ztot - (g.K - 1)); z1 <= std::min(ztot, g.K - 1); ++z1) {
                const int z2 = ztot - z1;
                if (z2 < 0 || z2 >= g.K) continue;
                auto [sorted, perm] = space.canonicalize({z1, z2});
                out.abscissa.push_back((z2 - z1) * g.delta);
                out.value.push_back(v.values[space.rank(sorted)]);
            }
            break;
        }
    }
    return out;
}

double fit_diagonal_quadratic(const ValueTable& v, double u_max) {
    const GridSpec& g = v.spec;
    if (u_max > g.max_backlog())
        throw std::invalid_argument("fit_diagonal_quadratic: u_max beyond grid");
    CutSeries diag = export_cut(v, {Cut::Kind::Diagonal, 0, 0.0});
    const double v0 = diag.value[0];
    double num = 0.0, den = 0.0;
    int n = 0;
    for (size_t k = 0; k < diag.abscissa.size(); ++k) {
        const double u = diag.abscissa[k];
        if (u > u_max) break;
        const double u2 = u * u;
        num += (diag.value[k] - v0) * u2;
        den += u2 * u2;
        ++n;
    }
    if (n < 5 || den == 0.0)
        throw std::invalid_argument("fit_diagonal_quadratic: degenerate sample");
    return num / den;
}

int heuristic_action(PolicyKind kind, std::span<const double> backlogs,
                     std::span<const int> counts, int& rr_cursor, std::mt19937_64& rng) {
    const int m = static_cast<int>(backlogs.size());
    switch (kind) {
        case PolicyKind::Rnd: {
            // 64-bit rejection-free scaling; bias is negligible for small m.
            return static_cast<int>(rng() % static_cast<std::uint64_t>(m));
        }
        case PolicyKind::Lwl: {
            int best = 0;
            for (int i = 1; i < m; ++i)
                if (backlogs[i] < backlogs[best]) best = i;
            return best;
        }
        case PolicyKind::Jsq: {
            if (counts.size() != backlogs.size())
                throw std::invalid_argument("heuristic_action: JSQ needs job counts");
            int best = 0;
            for (int i = 1; i < m; ++i) {
                if (counts[i] < counts[best] ||
                    (counts[i] == counts[best] && backlogs[i] < backlogs[best]))
                    best = i;
            }
            return best;
        }
        case PolicyKind::RoundRobin:
            rr_cursor = (rr_cursor + 1) % m;
            return rr_cursor;
        case PolicyKind::ValueBased:
            throw std::invalid_argument("heuristic_action: ValueBased is not a heuristic");
    }
    return 0;
}

}  // namespace sadp

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sadp/model.hpp"
#include "sadp/policy.hpp"
#include "sadp/sim.hpp"
#include "sadp/table_io.hpp"
#include "sadp/viter.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct SolveOpts {
    int servers = 2;
    double lambda = 1.8;
    double mu = 1.0;
    int grid = 200;
    double delta = 0.25;
    std::string init = "rnd";
    std::string variant = "a2";
    int max_rounds = 2000;
    int warmup = 100;
    double e_tol = 1e-8;
    int w0_window = 0;
    std::string out;
    std::string history_out;
    bool quiet = false;
};

sadp::SweepVariant parse_variant(const std::string& s) {
    if (s == "basic") return sadp::SweepVariant::Basic;
    if (s == "a0") return sadp::SweepVariant::RecursiveA0;
    if (s == "a1") return sadp::SweepVariant::RecursiveA1;
    if (s == "a2") return sadp::SweepVariant::RecursiveA2;
    throw CLI::ValidationError("--variant", "expected basic|a0|a1|a2");
}

int cmd_solve(const SolveOpts& o) {
    sadp::SystemParams params(o.servers, o.lambda, o.mu);
    if (params.offered_load() >= 1.0)
        std::cerr << "warning: offered load " << params.offered_load() << " >= 1\n";
    sadp::GridSpec spec{o.servers, o.grid, o.delta};

    sadp::ValueTable table;
    if (o.init.rfind("file:", 0) == 0) {
        const sadp::ValueTable src = sadp::load_table(o.init.substr(5));
        table = sadp::init_table(spec, params, sadp::InitMode::FromTable, &src);
    } else if (o.init == "zero") {
        table = sadp::init_table(spec, params, sadp::InitMode::Zero);
    } else if (o.init == "rnd") {
        table = sadp::init_table(spec, params, sadp::InitMode::Rnd);
    } else {
        throw CLI::ValidationError("--init", "expected zero|rnd|file:PATH");
    }

    const sadp::StoppingRule rule{o.warmup, o.max_rounds, o.e_tol, o.w0_window};
    std::vector<sadp::ProgressRecord> history;
    sadp::ProgressFn progress = [&](const sadp::ProgressRecord& r) {
        history.push_back(r);
        if (!o.quiet) {
            nlohmann::json line = {
                {"round", r.round}, {"w0", r.w0}, {"E", r.E}, {"seconds", r.seconds}};
            std::cout << line.dump() << "\n";
        }
    };
    sadp::RunResult res = sadp::run(std::move(table), rule, parse_variant(o.variant), progress);
    if (!o.out.empty()) sadp::save_table(res.table, o.out);
    if (!o.history_out.empty()) sadp::export_history_csv(history, o.history_out);
    if (res.status == sadp::RunStatus::Diverged) {
        std::cerr << "solve diverged: " << res.diagnostic << "\n";
        return kExitNumeric;
    }
    std::cerr << "solve " << (res.status == sadp::RunStatus::Converged ? "converged" : "stopped")
              << " after " << res.table.iterations << " rounds, w0=" << res.table.w0 << "\n";
    return kExitOk;
}

struct SimulateOpts {
    std::string policy = "lwl";
    int servers = 2;
    double lambda = 1.8;
    double mu = 1.0;
    long long jobs = 1000000;
    long long warmup_jobs = -1;
    unsigned long long seed = 1;
    std::vector<double> bins;
    std::string out;
    std::string records_out;
};

int cmd_simulate(const SimulateOpts& o) {
    sadp::SimConfig cfg;
    std::shared_ptr<sadp::ValueTable> table;
    if (o.policy.rfind("value:", 0) == 0) {
        table = std::make_shared<sadp::ValueTable>(sadp::load_table(o.policy.substr(6)));
        if (o.servers != table->params.m)
            throw std::runtime_error("--servers " + std::to_string(o.servers) +
                                     " does not match the table (m=" +
                                     std::to_string(table->params.m) + ")");
        cfg.params = sadp::SystemParams(table->params.m, o.lambda, o.mu);
        cfg.policy = sadp::DispatchPolicy::value_based(table);
    } else {
        cfg.params = sadp::SystemParams(o.servers, o.lambda, o.mu);
        if (o.policy == "rnd") cfg.policy = sadp::DispatchPolicy::rnd();
        else if (o.policy == "lwl") cfg.policy = sadp::DispatchPolicy::lwl();
        else if (o.policy == "jsq") cfg.policy = sadp::DispatchPolicy::jsq();
        else if (o.policy == "rr") cfg.policy = sadp::DispatchPolicy::round_robin();
        else throw CLI::ValidationError("--policy", "expected rnd|lwl|jsq|rr|value:PATH");
    }
    cfg.n_jobs = o.jobs;
    cfg.warmup_jobs = o.warmup_jobs;
    cfg.seed = o.seed;
    cfg.size_bins = o.bins;
    if (cfg.params.offered_load() >= 1.0)
        std::cerr << "warning: offered load " << cfg.params.offered_load() << " >= 1, unstable\n";

    std::unique_ptr<std::FILE, int (*)(std::FILE*)> rec(nullptr, &std::fclose);
    std::function<void(const sadp::JobRecord&)> sink;
    if (!o.records_out.empty()) {
        rec.reset(std::fopen(o.records_out.c_str(), "w"));
        if (!rec) throw sadp::IoError("cannot open " + o.records_out);
        std::fprintf(rec.get(), "size,wait,rank\n");
        sink = [&rec](const sadp::JobRecord& r) {
            std::fprintf(rec.get(), "%.17g,%.17g,%d\n", r.size, r.wait, r.rank);
        };
    }

    const sadp::SimStats stats = sadp::run_sim(cfg, sink);
    nlohmann::json summary = {{"mean_wait", stats.mean_wait},
                              {"ci_half_width", stats.ci_half_width},
                              {"jobs_counted", stats.jobs_counted},
                              {"work_conservation_error", stats.work_conservation_error},
                              {"unstable", stats.unstable}};
    std::cout << summary.dump() << "\n";
    if (!o.out.empty()) {
        if (o.out.size() > 5 && o.out.substr(o.out.size() - 5) == ".json") {
            nlohmann::json j = summary;
            j["bins"] = nlohmann::json::array();
            for (const auto& b : stats.bins) {
                j["bins"].push_back({{"lo", b.lo},
                                     {"hi", b.hi},
                                     {"count", b.count},
                                     {"mean_wait", b.mean_wait},
                                     {"rank_fractions", b.rank_fractions}});
            }
            std::ofstream out(o.out, std::ios::trunc);
            if (!out) throw sadp::IoError("cannot open " + o.out);
            out << j.dump(2) << "\n";
        } else {
            sadp::export_csv(stats, o.out);
        }
    }
    return kExitOk;
}

std::pair<int, double> parse_coord_assignment(const std::string& s, const char* flag) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError(flag, "expected coord=value");
    return {std::stoi(s.substr(0, eq)) - 1, std::stod(s.substr(eq + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Size-aware dispatching: value-iteration solver and simulator"};
    app.require_subcommand(1);

    SolveOpts so;
    auto* solve = app.add_subcommand("solve", "Run value iteration and write a table");
    solve->add_option("--servers", so.servers)->check(CLI::PositiveNumber)->required();
    solve->add_option("--lambda", so.lambda)->check(CLI::PositiveNumber)->required();
    solve->add_option("--mu", so.mu)->check(CLI::PositiveNumber)->required();
    solve->add_option("--grid", so.grid)->check(CLI::PositiveNumber)->required();
    solve->add_option("--delta", so.delta)->check(CLI::PositiveNumber);
    solve->add_option("--init", so.init, "zero | rnd | file:PATH");
    solve->add_option("--variant", so.variant, "basic | a0 | a1 | a2");
    solve->add_option("--max-rounds", so.max_rounds);
    solve->add_option("--warmup", so.warmup);
    solve->add_option("--e-tol", so.e_tol);
    solve->add_option("--w0-window", so.w0_window);
    solve->add_option("--out", so.out);
    solve->add_option("--history-out", so.history_out, "write round,w0,E,seconds CSV");
    solve->add_flag("--quiet", so.quiet, "suppress per-round progress JSON");

    SimulateOpts mo;
    auto* simulate = app.add_subcommand("simulate", "Simulate a dispatching policy");
    simulate->add_option("--policy", mo.policy, "rnd | lwl | jsq | rr | value:PATH");
    simulate->add_option("--servers", mo.servers);
    simulate->add_option("--lambda", mo.lambda);
    simulate->add_option("--mu", mo.mu);
    simulate->add_option("--jobs", mo.jobs)->check(CLI::PositiveNumber);
    simulate->add_option("--warmup-jobs", mo.warmup_jobs);
    simulate->add_option("--seed", mo.seed);
    simulate->add_option("--bins", mo.bins, "size bin edges")->delimiter(',');
    simulate->add_option("--out", mo.out, "stats CSV (or .json)");
    simulate->add_option("--records", mo.records_out, "raw size,wait,rank CSV");

    std::string map_table, map_out;
    double map_size = 1.0;
    int map_points = 0;
    std::vector<std::string> map_fix;
    auto* pmap = app.add_subcommand("policy-map", "Export a 2-D action map");
    pmap->add_option("--table", map_table)->required();
    pmap->add_option("--size", map_size)->required();
    pmap->add_option("--fix", map_fix, "coord=value, repeatable (1-based coordinate)");
    pmap->add_option("--points", map_points, "points per axis (default: grid length)");
    pmap->add_option("--out", map_out)->required();

    std::string cut_table, cut_spec, cut_out;
    auto* cut = app.add_subcommand("export-cut", "Export a value-function cut");
    cut->add_option("--table", cut_table)->required();
    cut->add_option("--cut", cut_spec, "diag | coord:k=v | total:u")->required();
    cut->add_option("--out", cut_out)->required();

    std::string fit_table;
    double fit_umax = 10.0;
    auto* fit = app.add_subcommand("fit-diag", "Fit a*u^2 to the diagonal cut");
    fit->add_option("--table", fit_table)->required();
    fit->add_option("--umax", fit_umax);

    std::string info_table;
    auto* info = app.add_subcommand("info", "Print table metadata");
    info->add_option("--table", info_table)->required();

    std::vector<std::string> cmp_tables;
    auto* cmp = app.add_subcommand("compare", "Compare two tables");
    cmp->add_option("--tables", cmp_tables, "A,B")->delimiter(',')->expected(2)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*solve) return cmd_solve(so);
        if (*simulate) return cmd_simulate(mo);
        if (*pmap) {
            const sadp::ValueTable t = sadp::load_table(map_table);
            std::vector<std::pair<int, double>> fixed;
            for (const auto& s : map_fix) fixed.push_back(parse_coord_assignment(s, "--fix"));
            sadp::export_csv(sadp::action_map_slice(t, fixed, map_size, map_points), map_out);
            return kExitOk;
        }
        if (*cut) {
            const sadp::ValueTable t = sadp::load_table(cut_table);
            sadp::Cut c;
            if (cut_spec == "diag") {
                c.kind = sadp::Cut::Kind::Diagonal;
            } else if (cut_spec.rfind("coord:", 0) == 0) {
                c.kind = sadp::Cut::Kind::FixedCoordinate;
                auto [k, v] = parse_coord_assignment(cut_spec.substr(6), "--cut");
                c.coord = k;
                c.value = v;
            } else if (cut_spec.rfind("total:", 0) == 0) {
                c.kind = sadp::Cut::Kind::FixedTotal;
                c.value = std::stod(cut_spec.substr(6));
            } else {
                throw CLI::ValidationError("--cut", "expected diag|coord:k=v|total:u");
            }
            sadp::export_csv(sadp::export_cut(t, c), cut_out);
            return kExitOk;
        }
        if (*fit) {
            const sadp::ValueTable t = sadp::load_table(fit_table);
            std::printf("%.17g\n", sadp::fit_diagonal_quadratic(t, fit_umax));
            return kExitOk;
        }
        if (*info) {
            const sadp::ValueTable t = sadp::load_table(info_table);
            nlohmann::json j = {{"m", t.spec.m},
                                {"K", t.spec.K},
                                {"delta", t.spec.delta},
                                {"lambda", t.params.lambda},
                                {"mu", t.params.job_size.rate},
                                {"rho", t.params.offered_load()},
                                {"iterations", t.iterations},
                                {"w0", t.w0},
                                {"variant", sadp::variant_name(t.variant)},
                                {"state_count", sadp::state_count(t.spec.K, t.spec.m)}};
            std::cout << j.dump(2) << "\n";
            return kExitOk;
        }
        if (*cmp) {
            const sadp::ValueTable a = sadp::load_table(cmp_tables[0]);
            const sadp::ValueTable b = sadp::load_table(cmp_tables[1]);
            if (!(a.spec == b.spec)) {
                std::cerr << "compare: grid mismatch\n";
                return kExitUsage;
            }
            double max_abs = 0.0, sum_abs = 0.0;
            for (size_t i = 0; i < a.values.size(); ++i) {
                const double d = std::abs(a.values[i] - b.values[i]);
                max_abs = std::max(max_abs, d);
                sum_abs += d;
            }
            nlohmann::json j = {{"max_abs_diff", max_abs},
                                {"mean_abs_diff", sum_abs / a.values.size()},
                                {"metric_E", sadp::metric_E(a, b)}};
            std::cout << j.dump() << "\n";
            return kExitOk;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const sadp::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}

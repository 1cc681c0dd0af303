#include "sadp/table_io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace sadp {

namespace {

// Header fields are written explicitly little-endian so the format is
// stable across hosts.
void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}
std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}
std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
    return v;
}
double get_f64(const char* p) {
    const std::uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void save_table(const ValueTable& v, const std::string& path) {
    for (size_t i = 0; i < v.values.size(); ++i)
        if (std::isnan(v.values[i]))
            throw IoError("save_table: NaN payload at rank " + std::to_string(i));
    std::string header;
    header.reserve(kTableHeaderSize);
    header.append(kTableMagic, 8);
    put_u32(header, static_cast<std::uint32_t>(v.spec.m));
    put_u32(header, static_cast<std::uint32_t>(v.spec.K));
    put_f64(header, v.spec.delta);
    put_f64(header, v.params.lambda);
    put_f64(header, v.params.job_size.rate);
    put_u64(header, v.iterations);
    put_f64(header, v.w0);
    put_u32(header, static_cast<std::uint32_t>(v.variant));
    header.resize(kTableHeaderSize, '\0');

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_table: cannot open " + path);
    out.write(header.data(), header.size());
    std::string payload;
    payload.reserve(v.values.size() * 8);
    for (double val : v.values) put_f64(payload, val);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("save_table: write failed for " + path);
    out.close();

    nlohmann::json meta;
    meta["m"] = v.spec.m;
    meta["K"] = v.spec.K;
    meta["delta"] = v.spec.delta;
    meta["lambda"] = v.params.lambda;
    meta["mu"] = v.params.job_size.rate;
    meta["iterations"] = v.iterations;
    meta["w0"] = v.w0;
    meta["variant"] = variant_name(v.variant);
    meta["w0_history"] = v.w0_history;
    meta["e_history"] = v.e_history;
    std::ofstream ms(path + ".meta.json", std::ios::trunc);
    if (!ms) throw IoError("save_table: cannot open " + path + ".meta.json");
    ms << meta.dump(2) << "\n";
}

ValueTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_table: cannot open " + path);
    char header[kTableHeaderSize];
    in.read(header, kTableHeaderSize);
    if (in.gcount() != kTableHeaderSize) throw IoError("load_table: truncated header in " + path);
    if (std::memcmp(header, kTableMagic, 8) != 0)
        throw IoError("load_table: bad magic in " + path);

    ValueTable v;
    const int m = static_cast<int>(get_u32(header + 8));
    const int K = static_cast<int>(get_u32(header + 12));
    v.spec = GridSpec{m, K, get_f64(header + 16)};
    const double lambda = get_f64(header + 24);
    const double mu = get_f64(header + 32);
    v.params = SystemParams(m, lambda, mu);
    v.iterations = get_u64(header + 40);
    v.w0 = get_f64(header + 48);
    const std::uint32_t variant = get_u32(header + 56);
    if (variant > 3) throw IoError("load_table: unknown variant code in " + path);
    v.variant = static_cast<SweepVariant>(variant);

    const std::int64_t n = state_count(K, m);
    v.values.resize(n);
    std::string payload(static_cast<size_t>(n) * 8, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (in.gcount() != static_cast<std::streamsize>(payload.size()))
        throw IoError("load_table: truncated payload in " + path + ": expected " +
                      std::to_string(kTableHeaderSize + 8 * n) + " bytes, got " +
                      std::to_string(kTableHeaderSize + in.gcount()));
    for (std::int64_t i = 0; i < n; ++i) {
        v.values[i] = get_f64(payload.data() + 8 * i);
        if (std::isnan(v.values[i]))
            throw IoError("load_table: NaN payload at rank " + std::to_string(i) + " in " + path);
    }

    const std::string meta_path = path + ".meta.json";
    if (std::filesystem::exists(meta_path)) {
        std::ifstream ms(meta_path);
        nlohmann::json meta = nlohmann::json::parse(ms, nullptr, true, true);
        v.w0_history = meta.value("w0_history", std::vector<double>{});
        v.e_history = meta.value("e_history", std::vector<double>{});
    }
    return v;
}

void export_csv(const CutSeries& cut, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("export_csv: cannot open " + path);
    out << (cut.kind == "fixed_total" ? "delta_u" : "u") << ",value\n";
    for (size_t k = 0; k < cut.abscissa.size(); ++k)
        out << fmt17(cut.abscissa[k]) << "," << fmt17(cut.value[k]) << "\n";
    if (!out) throw IoError("export_csv: write failed for " + path);
}

void export_csv(const ActionMap& map, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("export_csv: cannot open " + path);
    out << "u" << map.free_a + 1 << ",u" << map.free_b + 1 << ",server,boundary\n";
    for (int row = 0; row < map.n; ++row) {
        for (int col = 0; col < map.n; ++col) {
            const size_t k = static_cast<size_t>(row) * map.n + col;
            out << fmt17(col * map.delta) << "," << fmt17(row * map.delta) << ","
                << int(map.choice[k]) + 1 << "," << int(map.boundary[k]) << "\n";
        }
    }
    if (!out) throw IoError("export_csv: write failed for " + path);
}

void export_csv(const SimStats& stats, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("export_csv: cannot open " + path);
    out << "bin_lo,bin_hi,count,mean_wait";
    const int m = stats.bins.empty() ? 0 : static_cast<int>(stats.bins[0].rank_fractions.size());
    for (int r = 1; r <= m; ++r) out << ",rank" << r << "_fraction";
    out << "\n";
    for (const auto& b : stats.bins) {
        out << fmt17(b.lo) << "," << fmt17(b.hi) << "," << b.count << "," << fmt17(b.mean_wait);
        for (double f : b.rank_fractions) out << "," << fmt17(f);
        out << "\n";
    }
    if (!out) throw IoError("export_csv: write failed for " + path);
}

void export_history_csv(const std::vector<ProgressRecord>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("export_history_csv: cannot open " + path);
    out << "round,w0,E,seconds\n";
    for (const auto& r : history)
        out << r.round << "," << fmt17(r.w0) << "," << fmt17(r.E) << "," << fmt17(r.seconds)
            << "\n";
    if (!out) throw IoError("export_history_csv: write failed for " + path);
}

}  // namespace sadp

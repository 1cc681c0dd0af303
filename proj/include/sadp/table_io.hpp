#pragma once

#include <stdexcept>
#include <string>

#include "sadp/policy.hpp"
#include "sadp/sim.hpp"
#include "sadp/viter.hpp"

namespace sadp {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Binary table format: an 80-byte little-endian header followed by
/// state_count doubles in rank order.
///   offset  0  magic   "SAVF0001"
///   offset  8  m       u32
///   offset 12  K       u32
///   offset 16  delta   f64
///   offset 24  lambda  f64
///   offset 32  mu      f64
///   offset 40  iterations u64
///   offset 48  w0      f64
///   offset 56  variant u32 (0 basic, 1 a0, 2 a1, 3 a2)
///   offset 60  reserved, zero
/// Histories live in a JSON sidecar at path + ".meta.json".
inline constexpr int kTableHeaderSize = 80;
inline constexpr char kTableMagic[9] = "SAVF0001";

void save_table(const ValueTable& v, const std::string& path);
ValueTable load_table(const std::string& path);

void export_csv(const CutSeries& cut, const std::string& path);
void export_csv(const ActionMap& map, const std::string& path);
void export_csv(const SimStats& stats, const std::string& path);
/// Convergence history: columns round, w0, E, seconds.
void export_history_csv(const std::vector<ProgressRecord>& history, const std::string& path);

}  // namespace sadp

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "addax/optimizers.hpp"
#include "addax/partition.hpp"

namespace addax {

// Shortest decimal representation that round-trips a double; keeps CSV
// output byte-stable across runs.
std::string format_double(double v);

// Writes via a temporary file plus rename so readers never see partial
// output.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// Schema: step,loss,grad_norm_sq,err_sq,peak_mem_bytes. err_sq is empty when
// the problem has no known minimizer.
std::string trajectory_csv(const std::vector<TrajectoryRecord>& records);

// Two columns: bin_upper_edge,count.
std::string length_stats_csv(const LengthStats& stats);

// Flat binary dump of the final parameters: 16-byte header (magic "ADXV",
// u32 version, u64 dim), then dim little-endian doubles.
void write_theta_dump(const std::filesystem::path& path,
                      const ParamVector& theta);
std::vector<double> read_theta_dump(const std::filesystem::path& path);

}  // namespace addax

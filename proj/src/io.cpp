#include "addax/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "addax/errors.hpp"

namespace addax {

std::string format_double(double v) {
  // %.17g round-trips every double; trim to the shortest form that does.
  for (int precision = 1; precision <= 17; ++precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
      return buf;
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw config_error("cannot write file: " + tmp.string());
    }
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream out;
  out << "step,loss,grad_norm_sq,err_sq,peak_mem_bytes\n";
  for (const auto& rec : records) {
    out << rec.step << ',' << format_double(rec.loss) << ','
        << format_double(rec.grad_norm_sq) << ',';
    if (rec.err_sq) {
      out << format_double(*rec.err_sq);
    }
    out << ',' << rec.peak_mem << '\n';
  }
  return out.str();
}

std::string length_stats_csv(const LengthStats& stats) {
  std::ostringstream out;
  out << "bin_upper_edge,count\n";
  for (std::size_t b = 0; b < stats.counts.size(); ++b) {
    out << format_double(stats.bin_upper_edges[b]) << ',' << stats.counts[b]
        << '\n';
  }
  return out.str();
}

namespace {

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint64_t get_u64_le(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

void write_theta_dump(const std::filesystem::path& path,
                      const ParamVector& theta) {
  std::string out;
  out.reserve(16 + theta.dim() * 8);
  out += "ADXV";
  put_u32_le(out, 1);
  put_u64_le(out, theta.dim());
  for (double v : theta.flatten()) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  }
  write_file_atomic(path, out);
}

std::vector<double> read_theta_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw config_error("cannot open theta dump: " + path.string());
  }
  std::array<char, 16> header{};
  in.read(header.data(), header.size());
  if (!in || std::memcmp(header.data(), "ADXV", 4) != 0) {
    throw config_error("bad theta dump header: " + path.string());
  }
  const std::uint64_t d = get_u64_le(header.data() + 8);
  std::vector<double> values(d);
  std::vector<char> raw(d * 8);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!in) {
    throw config_error("truncated theta dump: " + path.string());
  }
  for (std::uint64_t i = 0; i < d; ++i) {
    values[i] = std::bit_cast<double>(get_u64_le(raw.data() + i * 8));
  }
  return values;
}

}  // namespace addax

#include "mubinn/delay_model.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mubinn {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("calibration key '" + std::string(key) +
                                "': bad number '" + std::string(text) + "'");
  }
  return v;
}

std::int64_t parse_int(std::string_view key, std::string_view text) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("calibration key '" + std::string(key) +
                                "': bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::int64_t ceil_log2(std::int64_t n) {
  std::int64_t k = 0;
  while ((std::int64_t{1} << k) < n) ++k;
  return k;
}

}  // namespace

BitLevel parse_bit_level(std::string_view text) {
  if (text == "fp" || text == "FP") return BitLevel::fp();
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 1 ||
      v > 255) {
    throw std::invalid_argument("bad bit level '" + std::string(text) +
                                "' (expected 1..255 or fp)");
  }
  return BitLevel::levels(v);
}

std::string to_string(BitLevel level) {
  return level.is_fp() ? "FP" : std::to_string(level.value);
}

void GateDelayParams::validate() const {
  const std::pair<const char*, double> reals[] = {
      {"t_xnor", t_xnor},       {"t_full_adder", t_full_adder},
      {"t_mult_fp", t_mult_fp}, {"t_add_fp", t_add_fp},
      {"t_lut", t_lut},         {"t_scale_mult", t_scale_mult}};
  for (const auto& [name, v] : reals) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(name) + " must be positive");
    }
  }
  if (vector_len <= 0) throw std::invalid_argument("vector_len must be positive");
  if (hidden <= 0) throw std::invalid_argument("hidden must be positive");
}

GateDelayParams parse_calibration(std::string_view text) {
  GateDelayParams p;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("calibration line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "t_xnor") {
      p.t_xnor = parse_double(key, value);
    } else if (key == "t_full_adder") {
      p.t_full_adder = parse_double(key, value);
    } else if (key == "t_mult_fp") {
      p.t_mult_fp = parse_double(key, value);
    } else if (key == "t_add_fp") {
      p.t_add_fp = parse_double(key, value);
    } else if (key == "t_lut") {
      p.t_lut = parse_double(key, value);
    } else if (key == "t_scale_mult") {
      p.t_scale_mult = parse_double(key, value);
    } else if (key == "vector_len") {
      p.vector_len = parse_int(key, value);
    } else if (key == "hidden") {
      p.hidden = parse_int(key, value);
    } else {
      throw std::invalid_argument("unknown calibration key '" +
                                  std::string(key) + "' on line " +
                                  std::to_string(line_no));
    }
  }
  p.validate();
  return p;
}

GateDelayParams load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_calibration(buf.str());
}

double estimate_delay(BitLevel a, BitLevel w, const GateDelayParams& p) {
  p.validate();
  if (a.value < 0 || w.value < 0) {
    throw std::invalid_argument("bit levels must be >= 1 or FP");
  }
  if (a.is_fp() || w.is_fp()) {
    const double macs = static_cast<double>(p.vector_len + p.hidden);
    return macs * (p.t_mult_fp + p.t_add_fp) + p.t_add_fp + p.t_lut;
  }
  const double pairs = static_cast<double>(a.value) * w.value;
  return p.t_xnor +
         static_cast<double>(ceil_log2(p.vector_len)) * p.t_full_adder +
         pairs * p.t_scale_mult + (pairs - 1.0) * p.t_add_fp + p.t_add_fp +
         p.t_lut;
}

DelayReference::DelayReference(const Grid& grid) : grid_(grid) {
  for (std::size_t r = 0; r < kSize; ++r) {
    for (std::size_t c = 0; c < kSize; ++c) {
      if (!(grid_[r][c] > 0.0)) {
        throw std::invalid_argument("delay table entry (" + std::to_string(r) +
                                    "," + std::to_string(c) +
                                    ") is not positive");
      }
      if (c > 0 && !(grid_[r][c] > grid_[r][c - 1])) {
        throw std::invalid_argument("delay table row " + std::to_string(r) +
                                    " not increasing at column " +
                                    std::to_string(c));
      }
      if (r > 0 && !(grid_[r][c] > grid_[r - 1][c])) {
        throw std::invalid_argument("delay table column " + std::to_string(c) +
                                    " not increasing at row " +
                                    std::to_string(r));
      }
    }
  }
}

DelayReference DelayReference::bundled() {
  // Rows: activation levels 1..5, FP. Columns: weight levels 1..5, FP.
  static constexpr Grid kTable = {{
      {0.042, 0.066, 0.089, 0.120, 0.160, 4.262},
      {0.054, 0.067, 0.090, 0.121, 0.161, 4.263},
      {0.059, 0.072, 0.091, 0.122, 0.162, 4.264},
      {0.066, 0.079, 0.098, 0.123, 0.163, 4.265},
      {0.075, 0.088, 0.107, 0.132, 0.164, 4.266},
      {1.065, 1.079, 1.098, 1.123, 1.154, 4.294},
  }};
  return DelayReference(kTable);
}

std::size_t DelayReference::index_of(BitLevel level) {
  if (level.is_fp()) return kSize - 1;
  if (level.value < 1 || level.value > static_cast<int>(kSize - 1)) {
    throw std::out_of_range("bit level " + to_string(level) +
                            " is outside the reference table (1..5, FP)");
  }
  return static_cast<std::size_t>(level.value - 1);
}

double DelayReference::at(BitLevel a, BitLevel w) const {
  return grid_[index_of(a)][index_of(w)];
}

double table_speedup(const DelayReference& ref, BitLevel a, BitLevel w) {
  return ref.at(BitLevel::fp(), BitLevel::fp()) / ref.at(a, w);
}

double table_speedup_row_fp(const DelayReference& ref, BitLevel a,
                            BitLevel w) {
  return ref.at(a, BitLevel::fp()) / ref.at(a, w);
}

OpsCount ops_count(BitLevel a, BitLevel w, const CellDims& dims,
                   bool pointwise_binarized) {
  if (dims.input <= 0 || dims.hidden <= 0) {
    throw std::invalid_argument("ops_count: dims must be positive");
  }
  const std::int64_t n = dims.input;
  const std::int64_t h = dims.hidden;
  OpsCount c;
  if (a.is_fp() || w.is_fp()) {
    c.fp_mults = 4 * h * (n + h);
    c.pointwise_mults = 3 * h;
    return c;
  }
  const std::int64_t pairs = std::int64_t{a.value} * w.value;
  const std::int64_t pw = pointwise_binarized ? 2 * h * a.value * a.value : 0;
  c.xnor_ops = 8 * h * pairs + pw;
  c.popcount_bits = 4 * h * pairs * (n + h) + pw;
  c.scale_mults = 8 * h * pairs + pw;
  c.fp_mults = 0;
  c.pointwise_mults = pointwise_binarized ? h : 3 * h;
  return c;
}

}  // namespace mubinn

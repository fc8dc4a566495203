#include "mubinn/model_io.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace mubinn {
namespace {

constexpr char kMagic[4] = {'M', 'U', 'B', 'N'};
constexpr std::uint8_t kDtypeReal = 0;
constexpr std::uint8_t kDtypeMlb = 1;
constexpr std::uint8_t kTagFp = 0;
constexpr std::uint8_t kTagMask = 0x0F;
constexpr std::uint8_t kFlagPow2 = 0x10;
constexpr std::uint8_t kFlagUnit = 0x20;

using Kind = ModelFormatError::Kind;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(le(1, what)); }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(le(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  std::uint64_t u64(const char* what) { return le(8, what); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  // Like need(count * width) without overflowing on hostile dims.
  void need_elements(std::size_t count, std::size_t width,
                     const char* what) const {
    if (count > (data_.size() - pos_) / width) {
      throw ModelFormatError(Kind::kTruncated, pos_,
                             std::string("file truncated while reading ") +
                                 what + " (need " + std::to_string(count) +
                                 " x " + std::to_string(width) + " bytes, " +
                                 std::to_string(data_.size() - pos_) + " left)");
    }
  }
  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw ModelFormatError(Kind::kTruncated, pos_,
                             std::string("file truncated while reading ") +
                                 what + " (need " + std::to_string(n) +
                                 " bytes, " +
                                 std::to_string(data_.size() - pos_) + " left)");
    }
  }

 private:
  std::uint64_t le(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v) {
  if (v > 0xFFFFFFFFu) throw std::invalid_argument("dimension too large for u32");
  return static_cast<std::uint32_t>(v);
}

void write_header(Writer& w, std::size_t input, std::size_t hidden,
                  std::size_t classes, std::uint8_t tag, std::size_t a,
                  std::size_t wl) {
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kModelFormatVersion);
  w.u32(checked_u32(input));
  w.u32(checked_u32(hidden));
  w.u32(checked_u32(classes));
  w.u8(tag);
  w.u8(static_cast<std::uint8_t>(a));
  w.u8(static_cast<std::uint8_t>(wl));
}

void write_name(Writer& w, const std::string& name, std::uint8_t dtype,
                std::initializer_list<std::size_t> dims) {
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.bytes(name);
  w.u8(dtype);
  w.u8(static_cast<std::uint8_t>(dims.size()));
  for (std::size_t d : dims) w.u32(checked_u32(d));
}

void write_real(Writer& w, const std::string& name, const RealMatrix& m) {
  write_name(w, name, kDtypeReal, {m.rows(), m.cols()});
  for (double v : m.flat()) w.f64(v);
}

void write_real(Writer& w, const std::string& name, const RealVector& v) {
  write_name(w, name, kDtypeReal, {v.size()});
  for (double x : v) w.f64(x);
}

void write_mlb(Writer& w, const std::string& name, const QuantizedMatrix& m) {
  write_name(w, name, kDtypeMlb, {m.rows(), m.cols()});
  w.u8(static_cast<std::uint8_t>(m.num_levels()));
  for (std::size_t l = 0; l < m.num_levels(); ++l) {
    w.f64(m.scales()[l]);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::uint64_t word : m.plane(l, r).words()) w.u64(word);
    }
  }
}

void write_mlb(Writer& w, const std::string& name, const MLBTensor& t) {
  write_name(w, name, kDtypeMlb, {t.numel()});
  w.u8(static_cast<std::uint8_t>(t.num_levels()));
  for (std::size_t l = 0; l < t.num_levels(); ++l) {
    w.f64(t.scales[l]);
    for (std::uint64_t word : t.levels[l].words()) w.u64(word);
  }
}

std::string tensor_name(std::string_view prefix, Gate g) {
  return std::string(prefix) + "_" + std::string(gate_suffix(g));
}

std::vector<std::string> required_names() {
  std::vector<std::string> names;
  for (Gate g : kGates) {
    names.push_back(tensor_name("wx", g));
    names.push_back(tensor_name("wh", g));
    names.push_back(tensor_name("b", g));
  }
  names.push_back("dense_w");
  names.push_back("dense_b");
  return names;
}

struct Record {
  std::string name;
  std::size_t offset = 0;
  std::uint8_t dtype = 0;
  std::vector<std::size_t> dims;
  std::vector<double> reals;
  std::vector<double> scales;
  // planes[level][row]; rank-1 tensors have a single row.
  std::vector<std::vector<BinaryPlane>> planes;
};

void expect_dims(const Record& rec, std::vector<std::size_t> want);

Record read_record(Reader& r, const std::string& expected,
                   const std::vector<std::string>& all_names,
                   const std::vector<std::size_t>& want_dims) {
  Record rec;
  rec.offset = r.offset();
  if (r.at_end()) {
    throw ModelFormatError(Kind::kMissingTensor, r.offset(),
                           "missing tensor '" + expected + "'");
  }
  const std::uint16_t name_len = r.u16("tensor name length");
  rec.name = r.str(name_len, "tensor name");
  if (rec.name != expected) {
    const bool known = std::find(all_names.begin(), all_names.end(),
                                 rec.name) != all_names.end();
    throw ModelFormatError(
        known ? Kind::kMissingTensor : Kind::kUnexpectedTensor, rec.offset,
        known ? "missing tensor '" + expected + "' (found '" + rec.name + "')"
              : "unexpected tensor '" + rec.name + "' where '" + expected +
                    "' belongs");
  }
  const std::size_t dtype_offset = r.offset();
  rec.dtype = r.u8("dtype");
  if (rec.dtype != kDtypeReal && rec.dtype != kDtypeMlb) {
    throw ModelFormatError(Kind::kInvalidValue, dtype_offset,
                           "tensor '" + rec.name + "' has unknown dtype " +
                               std::to_string(rec.dtype));
  }
  const std::size_t rank_offset = r.offset();
  const std::uint8_t rank = r.u8("rank");
  if (rank != 1 && rank != 2) {
    throw ModelFormatError(Kind::kInvalidValue, rank_offset,
                           "tensor '" + rec.name + "' has rank " +
                               std::to_string(rank) + ", expected 1 or 2");
  }
  for (std::uint8_t i = 0; i < rank; ++i) rec.dims.push_back(r.u32("dim"));
  expect_dims(rec, want_dims);
  const std::size_t rows = rank == 2 ? rec.dims[0] : 1;
  const std::size_t cols = rank == 2 ? rec.dims[1] : rec.dims[0];

  if (rec.dtype == kDtypeReal) {
    const std::size_t count = rows * cols;
    r.need_elements(count, 8, "real64 payload");
    rec.reals.reserve(count);
    for (std::size_t i = 0; i < count; ++i) rec.reals.push_back(r.f64("real64"));
    return rec;
  }
  const std::size_t levels_offset = r.offset();
  const std::uint8_t levels = r.u8("level count");
  if (levels == 0) {
    throw ModelFormatError(Kind::kInvalidValue, levels_offset,
                           "tensor '" + rec.name + "' has zero levels");
  }
  const std::size_t words_per_row = BinaryPlane::words_for(cols);
  r.need_elements(rows * words_per_row + 1, 8 * levels, "mlb payload");
  for (std::uint8_t l = 0; l < levels; ++l) {
    const std::size_t scale_offset = r.offset();
    const double scale = r.f64("scale");
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw ModelFormatError(Kind::kInvalidValue, scale_offset,
                             "tensor '" + rec.name +
                                 "' has a non-positive scale");
    }
    rec.scales.push_back(scale);
    std::vector<BinaryPlane> row_planes;
    row_planes.reserve(rows);
    for (std::size_t row = 0; row < rows; ++row) {
      const std::size_t plane_offset = r.offset();
      std::vector<std::uint64_t> words(words_per_row);
      for (auto& word : words) word = r.u64("plane word");
      try {
        row_planes.emplace_back(cols, std::move(words));
      } catch (const std::invalid_argument& e) {
        throw ModelFormatError(Kind::kInvalidValue, plane_offset,
                               "tensor '" + rec.name + "': " + e.what());
      }
    }
    rec.planes.push_back(std::move(row_planes));
  }
  return rec;
}

void expect_dims(const Record& rec, std::vector<std::size_t> want) {
  if (rec.dims != want) {
    std::string got;
    for (std::size_t d : rec.dims) got += (got.empty() ? "" : "x") + std::to_string(d);
    std::string exp;
    for (std::size_t d : want) exp += (exp.empty() ? "" : "x") + std::to_string(d);
    throw ModelFormatError(Kind::kSizeMismatch, rec.offset,
                           "tensor '" + rec.name + "' has dims [" + got +
                               "], header implies [" + exp + "]");
  }
}

void expect_dtype(const Record& rec, std::uint8_t dtype) {
  if (rec.dtype != dtype) {
    throw ModelFormatError(Kind::kInvalidValue, rec.offset,
                           "tensor '" + rec.name + "' has dtype " +
                               std::to_string(rec.dtype) + ", expected " +
                               std::to_string(dtype));
  }
}

void expect_levels(const Record& rec, std::size_t levels) {
  if (rec.scales.size() != levels) {
    throw ModelFormatError(Kind::kSizeMismatch, rec.offset,
                           "tensor '" + rec.name + "' has " +
                               std::to_string(rec.scales.size()) +
                               " levels, header says " + std::to_string(levels));
  }
}

RealMatrix to_matrix(const Record& rec) {
  return RealMatrix(rec.dims[0], rec.dims[1], rec.reals);
}

RealVector to_vector(const Record& rec) { return RealVector(rec.reals); }

QuantizedMatrix to_quantized(const Record& rec) {
  return QuantizedMatrix(rec.dims[0], rec.dims[1], rec.planes, rec.scales);
}

MLBTensor to_mlb_vector(const Record& rec) {
  MLBTensor t;
  t.shape = {rec.dims[0]};
  t.scales = rec.scales;
  for (const auto& level : rec.planes) t.levels.push_back(level.front());
  return t;
}

}  // namespace

ModelFormatError::ModelFormatError(Kind kind, std::size_t offset,
                                   const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)),
      kind_(kind),
      offset_(offset) {}

std::vector<std::uint8_t> serialize_model(const FpModel& m) {
  m.lstm.validate();
  m.head.validate(m.lstm.hidden_size);
  Writer w;
  write_header(w, m.lstm.input_size, m.lstm.hidden_size, m.head.num_classes(),
               kTagFp, 0, 0);
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    write_real(w, tensor_name("wx", g), m.lstm.wx[k]);
    write_real(w, tensor_name("wh", g), m.lstm.wh[k]);
    write_real(w, tensor_name("b", g), m.lstm.b[k]);
  }
  write_real(w, "dense_w", m.head.w);
  write_real(w, "dense_b", m.head.b);
  return w.take();
}

std::vector<std::uint8_t> serialize_model(const QuantizedModel& m) {
  const QuantConfig& cfg = m.config();
  std::uint8_t tag = 0;
  switch (cfg.mode) {
    case QuantMode::kBLstm: tag = 1; break;
    case QuantMode::kMubinn1: tag = 2; break;
    case QuantMode::kMubinn2: tag = 3; break;
  }
  // mubinn1 implies pow2 unless unit scales override it.
  const bool implied_pow2 = cfg.mode == QuantMode::kMubinn1 && !cfg.unit_scales;
  if (cfg.mode != QuantMode::kBLstm && cfg.pow2_scales && !implied_pow2) {
    tag |= kFlagPow2;
  }
  if (cfg.mode != QuantMode::kBLstm && cfg.unit_scales) tag |= kFlagUnit;

  Writer w;
  write_header(w, m.input_size(), m.hidden_size(), m.head().num_classes(), tag,
               cfg.act_levels, cfg.weight_levels);
  for (Gate g : kGates) {
    write_mlb(w, tensor_name("wx", g), m.wx(g));
    if (cfg.binarize_recurrent) {
      write_mlb(w, tensor_name("wh", g), m.wh_q(g));
    } else {
      write_real(w, tensor_name("wh", g), m.wh_fp(g));
    }
    if (cfg.bias_policy == BiasPolicy::kMlbStored) {
      write_mlb(w, tensor_name("b", g), *m.bias_mlb(g));
    } else {
      write_real(w, tensor_name("b", g), m.bias_fp(g));
    }
  }
  write_real(w, "dense_w", m.head().w);
  write_real(w, "dense_b", m.head().b);
  return w.take();
}

AnyModel parse_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ModelFormatError(Kind::kBadMagic, 0,
                           "bad magic (expected \"MUBN\")");
  }
  r.str(4, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kModelFormatVersion) {
    throw ModelFormatError(Kind::kUnsupportedVersion, 4,
                           "unsupported format version " +
                               std::to_string(version));
  }
  const std::size_t input = r.u32("input_size");
  const std::size_t hidden = r.u32("hidden_size");
  const std::size_t classes = r.u32("num_classes");
  if (input == 0 || hidden == 0 || classes == 0) {
    throw ModelFormatError(Kind::kInvalidValue, 8,
                           "header sizes must be positive");
  }
  const std::size_t tag_offset = r.offset();
  const std::uint8_t tag_byte = r.u8("mode tag");
  const std::size_t a = r.u8("A");
  const std::size_t wl = r.u8("W");
  const std::uint8_t tag = tag_byte & kTagMask;
  const std::uint8_t flags = tag_byte & ~kTagMask;
  if (tag > 3 || (flags & ~(kFlagPow2 | kFlagUnit)) != 0 ||
      (tag == kTagFp && flags != 0)) {
    throw ModelFormatError(Kind::kInvalidValue, tag_offset,
                           "bad mode tag " + std::to_string(tag_byte));
  }
  if ((tag == kTagFp) != (a == 0 && wl == 0) || (tag != kTagFp && (a == 0 || wl == 0))) {
    throw ModelFormatError(Kind::kInvalidValue, tag_offset + 1,
                           "levels A=" + std::to_string(a) +
                               " W=" + std::to_string(wl) +
                               " inconsistent with mode tag " +
                               std::to_string(tag));
  }

  const std::vector<std::string> names = required_names();
  std::vector<Record> recs;
  recs.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::vector<std::size_t> dims;
    if (i == 12) {
      dims = {classes, hidden};
    } else if (i == 13) {
      dims = {classes};
    } else if (i % 3 == 0) {
      dims = {hidden, input};
    } else if (i % 3 == 1) {
      dims = {hidden, hidden};
    } else {
      dims = {hidden};
    }
    recs.push_back(read_record(r, names[i], names, dims));
  }
  if (!r.at_end()) {
    throw ModelFormatError(Kind::kTrailingBytes, r.offset(),
                           std::to_string(bytes.size() - r.offset()) +
                               " trailing bytes after the last tensor");
  }

  const Record& dense_w = recs[12];
  const Record& dense_b = recs[13];
  expect_dtype(dense_w, kDtypeReal);
  expect_dims(dense_w, {classes, hidden});
  expect_dtype(dense_b, kDtypeReal);
  expect_dims(dense_b, {classes});
  DenseHead head{to_matrix(dense_w), to_vector(dense_b)};

  if (tag == kTagFp) {
    FpModel m;
    m.lstm.input_size = input;
    m.lstm.hidden_size = hidden;
    for (Gate g : kGates) {
      const std::size_t k = gate_index(g);
      const Record& wx = recs[3 * k];
      const Record& wh = recs[3 * k + 1];
      const Record& b = recs[3 * k + 2];
      for (const Record* rec : {&wx, &wh, &b}) expect_dtype(*rec, kDtypeReal);
      expect_dims(wx, {hidden, input});
      expect_dims(wh, {hidden, hidden});
      expect_dims(b, {hidden});
      m.lstm.wx[k] = to_matrix(wx);
      m.lstm.wh[k] = to_matrix(wh);
      m.lstm.b[k] = to_vector(b);
    }
    m.head = std::move(head);
    return m;
  }

  QuantConfig cfg;
  cfg.mode = tag == 1 ? QuantMode::kBLstm
                      : (tag == 2 ? QuantMode::kMubinn1 : QuantMode::kMubinn2);
  cfg.act_levels = a;
  cfg.weight_levels = wl;
  cfg.unit_scales = cfg.mode == QuantMode::kBLstm || (flags & kFlagUnit) != 0;
  cfg.pow2_scales = (cfg.mode == QuantMode::kMubinn1 && !cfg.unit_scales) ||
                    (flags & kFlagPow2) != 0;
  cfg.binarize_recurrent = recs[1].dtype == kDtypeMlb;
  cfg.bias_policy = recs[2].dtype == kDtypeMlb ? BiasPolicy::kMlbStored
                                               : BiasPolicy::kFullPrecision;

  std::array<QuantizedMatrix, 4> wx_q;
  std::array<QuantizedMatrix, 4> wh_q;
  std::array<RealMatrix, 4> wh_fp;
  std::array<RealVector, 4> bias_fp;
  std::array<std::optional<MLBTensor>, 4> bias_mlb;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    const Record& wx = recs[3 * k];
    const Record& wh = recs[3 * k + 1];
    const Record& b = recs[3 * k + 2];
    expect_dtype(wx, kDtypeMlb);
    expect_dims(wx, {hidden, input});
    expect_levels(wx, wl);
    wx_q[k] = to_quantized(wx);
    expect_dims(wh, {hidden, hidden});
    if (cfg.binarize_recurrent) {
      expect_dtype(wh, kDtypeMlb);
      expect_levels(wh, wl);
      wh_q[k] = to_quantized(wh);
    } else {
      expect_dtype(wh, kDtypeReal);
      wh_fp[k] = to_matrix(wh);
    }
    expect_dims(b, {hidden});
    if (cfg.bias_policy == BiasPolicy::kMlbStored) {
      expect_dtype(b, kDtypeMlb);
      expect_levels(b, wl);
      bias_mlb[k] = to_mlb_vector(b);
    } else {
      expect_dtype(b, kDtypeReal);
      bias_fp[k] = to_vector(b);
    }
  }
  try {
    return QuantizedModel(cfg, input, hidden, std::move(wx_q), std::move(wh_q),
                          std::move(wh_fp), std::move(bias_fp),
                          std::move(bias_mlb), std::move(head));
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(Kind::kInvalidValue, tag_offset, e.what());
  }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelFormatError(Kind::kIo, 0, "cannot open '" + path + "'");
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::string& path,
                       std::span<const std::uint8_t> bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw std::runtime_error("write failed for '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path +
                             "': " + ec.message());
  }
}

void save_model(const FpModel& m, const std::string& path) {
  write_file_atomic(path, serialize_model(m));
}

void save_model(const QuantizedModel& m, const std::string& path) {
  write_file_atomic(path, serialize_model(m));
}

AnyModel load_model(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_model(bytes);
}

FpModel load_fp_model(const std::string& path) {
  AnyModel m = load_model(path);
  if (auto* fp = std::get_if<FpModel>(&m)) return std::move(*fp);
  throw ModelFormatError(Kind::kInvalidValue, 20,
                         "'" + path + "' holds a quantized model, expected fp");
}

QuantizedModel load_quantized_model(const std::string& path) {
  AnyModel m = load_model(path);
  if (auto* q = std::get_if<QuantizedModel>(&m)) return std::move(*q);
  throw ModelFormatError(Kind::kInvalidValue, 20,
                         "'" + path + "' holds an fp model, expected quantized");
}

Classification predict(const AnyModel& m, const Sequence& seq) {
  return std::visit([&seq](const auto& model) { return model.predict(seq); }, m);
}

std::size_t input_size(const AnyModel& m) {
  if (const auto* fp = std::get_if<FpModel>(&m)) return fp->lstm.input_size;
  return std::get<QuantizedModel>(m).input_size();
}

std::size_t hidden_size(const AnyModel& m) {
  if (const auto* fp = std::get_if<FpModel>(&m)) return fp->lstm.hidden_size;
  return std::get<QuantizedModel>(m).hidden_size();
}

std::size_t num_classes(const AnyModel& m) {
  if (const auto* fp = std::get_if<FpModel>(&m)) return fp->head.num_classes();
  return std::get<QuantizedModel>(m).head().num_classes();
}

// ---------------------------------------------------------------------------
// Dataset CSV

std::string format_dataset(const Dataset& d) {
  std::string out = std::to_string(d.timesteps) + "," +
                    std::to_string(d.features) + "\n";
  char buf[32];
  for (const Sample& s : d.samples) {
    out += std::to_string(s.label);
    for (const RealVector& x : s.seq) {
      for (double v : x) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

namespace {

std::size_t parse_size_field(std::string_view field, std::size_t line,
                             std::size_t col, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw std::invalid_argument("line " + std::to_string(line) + ", column " +
                                std::to_string(col) + ": bad " + what + " '" +
                                std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos
                                         ? std::string_view::npos
                                         : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset parse_dataset(std::string_view text,
                      std::optional<std::size_t> num_classes) {
  Dataset d;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::vector<std::string_view> fields = split_commas(line);
    if (!have_header) {
      if (fields.size() != 2) {
        throw std::invalid_argument("line 1: header must be 'T,F'");
      }
      d.timesteps = parse_size_field(fields[0], line_no, 1, "T");
      d.features = parse_size_field(fields[1], line_no, 2, "F");
      if (d.timesteps == 0 || d.features == 0) {
        throw std::invalid_argument("line 1: T and F must be positive");
      }
      have_header = true;
      continue;
    }
    const std::size_t want = 1 + d.timesteps * d.features;
    if (fields.size() != want) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " +
                                  std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(want));
    }
    Sample s;
    s.label = parse_size_field(fields[0], line_no, 1, "label");
    if (num_classes && s.label >= *num_classes) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": label " + std::to_string(s.label) +
                                  " out of range [0, " +
                                  std::to_string(*num_classes) + ")");
    }
    s.seq.assign(d.timesteps, RealVector(d.features));
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v = 0.0;
      const std::string_view f = fields[k];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw std::invalid_argument("line " + std::to_string(line_no) +
                                    ", column " + std::to_string(k + 1) +
                                    ": not a number '" + std::string(f) + "'");
      }
      const std::size_t idx = k - 1;
      s.seq[idx / d.features][idx % d.features] = v;
    }
    d.samples.push_back(std::move(s));
  }
  if (!have_header) throw std::invalid_argument("dataset is empty (no header)");
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  const std::string text = format_dataset(d);
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()),
                              text.size()));
}

Dataset load_dataset(const std::string& path,
                     std::optional<std::size_t> num_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), num_classes);
}

}  // namespace mubinn

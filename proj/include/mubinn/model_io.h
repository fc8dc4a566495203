#ifndef MUBINN_MODEL_IO_H_
#define MUBINN_MODEL_IO_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mubinn/binarized_lstm.h"
#include "mubinn/lstm_reference.h"

namespace mubinn {

// Model file layout (all integers little-endian):
//
//   "MUBN"  u32 version(=1)
//   u32 input_size  u32 hidden_size  u32 num_classes
//   u8 mode_tag  u8 A  u8 W
//   14 tensor records, in order:
//     wx_f wh_f b_f  wx_i wh_i b_i  wx_g wh_g b_g  wx_o wh_o b_o
//     dense_w dense_b
//
// mode_tag low nibble: 0 = fp, 1 = b_lstm, 2 = mubinn1, 3 = mubinn2.
// Bit 5 marks unit scales on a mubinn1/mubinn2 model. Bit 4 marks power-of-two
// scales where the mode does not already imply them (mubinn2, or mubinn1 with
// unit scales). Both are clear for the default configurations.
// A and W are 0 for fp models.
//
// Tensor record:
//   u16 name_len, name bytes (UTF-8)
//   u8 dtype (0 = real64, 1 = mlb)
//   u8 rank, u32 dim per axis
//   real64 payload: IEEE-754 doubles, row-major
//   mlb payload:    u8 N, then per level: f64 scale followed by the packed
//                   plane words (u64); rank-2 tensors pad every row to whole
//                   words, so a level holds rows * ceil(cols / 64) words.
//
// Quantized models store wh_* as real64 when the recurrent path is not
// binarized, and b_* as mlb under the stored-MLB bias policy.
inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kUnsupportedVersion,
    kTruncated,
    kSizeMismatch,
    kMissingTensor,
    kUnexpectedTensor,
    kTrailingBytes,
    kInvalidValue,
  };

  ModelFormatError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

using AnyModel = std::variant<FpModel, QuantizedModel>;

std::vector<std::uint8_t> serialize_model(const FpModel& m);
std::vector<std::uint8_t> serialize_model(const QuantizedModel& m);
AnyModel parse_model(std::span<const std::uint8_t> bytes);

// Writes to a temporary file next to `path`, then renames it into place.
void save_model(const FpModel& m, const std::string& path);
void save_model(const QuantizedModel& m, const std::string& path);
AnyModel load_model(const std::string& path);
FpModel load_fp_model(const std::string& path);
QuantizedModel load_quantized_model(const std::string& path);

// Prediction through whichever model a file held.
Classification predict(const AnyModel& m, const Sequence& seq);
std::size_t input_size(const AnyModel& m);
std::size_t hidden_size(const AnyModel& m);
std::size_t num_classes(const AnyModel& m);

struct Sample {
  std::size_t label = 0;
  Sequence seq;  // timesteps x features
};

struct Dataset {
  std::size_t timesteps = 0;
  std::size_t features = 0;
  std::vector<Sample> samples;
};

// CSV: header "T,F", then one row per sample: label followed by T*F values in
// time-major order. Values are printed with 17 significant digits.
std::string format_dataset(const Dataset& d);
// Errors name the 1-based line and column. Labels must lie in
// [0, num_classes) when num_classes is given.
Dataset parse_dataset(std::string_view text,
                      std::optional<std::size_t> num_classes = std::nullopt);
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path,
                     std::optional<std::size_t> num_classes = std::nullopt);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file_atomic(const std::string& path,
                       std::span<const std::uint8_t> bytes);

}  // namespace mubinn

#endif  // MUBINN_MODEL_IO_H_

#ifndef MUBINN_BINARY_PLANE_H_
#define MUBINN_BINARY_PLANE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mubinn {

// A packed {-1,+1} vector: +1 is stored as bit 1, -1 as bit 0.
//
// Layout: bit j of the logical vector is bit (j % 64) of words[j / 64]
// (little-endian within and across words). Bits at positions >= nbits in the
// last word are always zero. The model file writes these words verbatim.
class BinaryPlane {
 public:
  static constexpr std::size_t kWordBits = 64;

  BinaryPlane() = default;
  explicit BinaryPlane(std::size_t nbits);
  // Throws std::invalid_argument if the word count is wrong or any padding
  // bit is set.
  BinaryPlane(std::size_t nbits, std::vector<std::uint64_t> words);

  static std::size_t words_for(std::size_t nbits) {
    return (nbits + kWordBits - 1) / kWordBits;
  }

  std::size_t nbits() const { return nbits_; }
  std::span<const std::uint64_t> words() const { return words_; }

  bool bit(std::size_t j) const {
    return (words_[j / kWordBits] >> (j % kWordBits)) & 1ULL;
  }
  void set_bit(std::size_t j, bool value);
  // +1.0 or -1.0
  double sign(std::size_t j) const { return bit(j) ? 1.0 : -1.0; }

  // Mask of the valid bits in the last word (all ones when nbits % 64 == 0).
  std::uint64_t tail_mask() const;

  BinaryPlane complement() const;

  bool operator==(const BinaryPlane&) const = default;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace mubinn

#endif  // MUBINN_BINARY_PLANE_H_

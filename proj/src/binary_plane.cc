#include "mubinn/binary_plane.h"

#include <stdexcept>
#include <string>

namespace mubinn {

BinaryPlane::BinaryPlane(std::size_t nbits)
    : nbits_(nbits), words_(words_for(nbits), 0) {}

BinaryPlane::BinaryPlane(std::size_t nbits, std::vector<std::uint64_t> words)
    : nbits_(nbits), words_(std::move(words)) {
  if (words_.size() != words_for(nbits_)) {
    throw std::invalid_argument("binary plane of " + std::to_string(nbits_) +
                                " bits needs " +
                                std::to_string(words_for(nbits_)) +
                                " words, got " + std::to_string(words_.size()));
  }
  if (!words_.empty() && (words_.back() & ~tail_mask()) != 0) {
    throw std::invalid_argument("binary plane has padding bits set");
  }
}

void BinaryPlane::set_bit(std::size_t j, bool value) {
  const std::uint64_t m = 1ULL << (j % kWordBits);
  if (value) {
    words_[j / kWordBits] |= m;
  } else {
    words_[j / kWordBits] &= ~m;
  }
}

std::uint64_t BinaryPlane::tail_mask() const {
  const std::size_t rem = nbits_ % kWordBits;
  return rem == 0 ? ~0ULL : (1ULL << rem) - 1;
}

BinaryPlane BinaryPlane::complement() const {
  BinaryPlane out = *this;
  for (std::uint64_t& w : out.words_) w = ~w;
  if (!out.words_.empty()) out.words_.back() &= tail_mask();
  return out;
}

}  // namespace mubinn

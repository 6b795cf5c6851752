#pragma once

#include <cstdint>
#include <vector>

#include "syrof/errors.hpp"

namespace syrof {

/// Set of robot ids backed by the 32-bit membership mask used on the wire.
class IdSet {
 public:
  static constexpr uint8_t kMaxIds = 32;

  constexpr IdSet() = default;
  static constexpr IdSet from_mask(uint32_t mask) {
    IdSet s;
    s.mask_ = mask;
    return s;
  }

  static void check_id(uint8_t id) {
    if (id >= kMaxIds) throw Error(Errc::invalid_id, "robot id must be < 32, got " + std::to_string(id));
  }

  void add(uint8_t id) {
    check_id(id);
    mask_ |= (1u << id);
  }
  void remove(uint8_t id) {
    check_id(id);
    mask_ &= ~(1u << id);
  }
  bool contains(uint8_t id) const { return id < kMaxIds && (mask_ & (1u << id)) != 0; }
  bool contains_all(IdSet other) const { return (mask_ & other.mask_) == other.mask_; }

  IdSet& operator|=(IdSet other) {
    mask_ |= other.mask_;
    return *this;
  }
  friend IdSet operator|(IdSet a, IdSet b) { return from_mask(a.mask_ | b.mask_); }

  int count() const { return __builtin_popcount(mask_); }
  bool empty() const { return mask_ == 0; }
  uint32_t mask() const { return mask_; }
  void clear() { mask_ = 0; }

  /// Ids in ascending order.
  std::vector<uint8_t> sorted_ids() const {
    std::vector<uint8_t> out;
    out.reserve(static_cast<size_t>(count()));
    for (uint8_t id = 0; id < kMaxIds; ++id)
      if (contains(id)) out.push_back(id);
    return out;
  }

  bool operator==(const IdSet&) const = default;

 private:
  uint32_t mask_ = 0;
};

}  // namespace syrof

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "syrof/sync.hpp"

namespace syrof::vm {

/// State telemetry riding alongside the sync frame in every broadcast.
struct StateBeacon {
  double x = 0, y = 0, theta = 0;
  double vx = 0, vy = 0;
};

struct LdmapEntry {
  uint8_t id = 0;
  double x = 0, y = 0, theta = 0;
  double vx = 0, vy = 0;
  std::array<uint8_t, sync::kPayloadSize> payload{};
  uint64_t last_heard_round = 0;
};

/// Local dynamic map: one entry per current member (ascending id), plus the
/// locally believed operation mode and the round the snapshot closes.
struct Ldmap {
  std::vector<LdmapEntry> entries;
  sync::OpMode op_mode = sync::OpMode::kCooperative;
  uint64_t round = 0;

  const LdmapEntry* find(uint8_t id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
};

/// Fixed little-endian packing of the whole map, used for the byte-identity
/// comparisons behind the common-knowledge checks.
std::vector<uint8_t> canonical_bytes(const Ldmap& map);

uint64_t fnv1a64(std::span<const uint8_t> bytes);

/// Per-robot knowledge base fed by delivered beacons (own broadcast included);
/// snapshots restrict to the current member list.
class LdmapBuilder {
 public:
  void observe(uint8_t id, const StateBeacon& state, const std::array<uint8_t, sync::kPayloadSize>& payload,
               uint64_t round);
  Ldmap snapshot(const std::vector<uint8_t>& member_ids, sync::OpMode op_mode, uint64_t round) const;

 private:
  std::array<LdmapEntry, IdSet::kMaxIds> latest_{};
  IdSet known_;
};

}  // namespace syrof::vm

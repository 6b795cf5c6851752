#include "syrof/ldmap.hpp"

#include <cstring>

namespace syrof::vm {

namespace {

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

}  // namespace

std::vector<uint8_t> canonical_bytes(const Ldmap& map) {
  std::vector<uint8_t> out;
  out.reserve(18 + map.entries.size() * 58);
  out.push_back(static_cast<uint8_t>(map.op_mode));
  put_u64(out, map.round);
  out.push_back(static_cast<uint8_t>(map.entries.size()));
  for (const auto& e : map.entries) {
    out.push_back(e.id);
    put_f64(out, e.x);
    put_f64(out, e.y);
    put_f64(out, e.theta);
    put_f64(out, e.vx);
    put_f64(out, e.vy);
    out.insert(out.end(), e.payload.begin(), e.payload.end());
    put_u64(out, e.last_heard_round);
  }
  return out;
}

uint64_t fnv1a64(std::span<const uint8_t> bytes) {
  uint64_t h = 1469598103934665603ull;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

void LdmapBuilder::observe(uint8_t id, const StateBeacon& state,
                           const std::array<uint8_t, sync::kPayloadSize>& payload, uint64_t round) {
  IdSet::check_id(id);
  LdmapEntry& e = latest_[id];
  e.id = id;
  e.x = state.x;
  e.y = state.y;
  e.theta = state.theta;
  e.vx = state.vx;
  e.vy = state.vy;
  e.payload = payload;
  e.last_heard_round = round;
  known_.add(id);
}

Ldmap LdmapBuilder::snapshot(const std::vector<uint8_t>& member_ids, sync::OpMode op_mode, uint64_t round) const {
  Ldmap map;
  map.op_mode = op_mode;
  map.round = round;
  map.entries.reserve(member_ids.size());
  for (uint8_t id : member_ids) {
    if (!known_.contains(id)) continue;  // member announced by peers but never heard directly
    map.entries.push_back(latest_[id]);
  }
  return map;
}

}  // namespace syrof::vm

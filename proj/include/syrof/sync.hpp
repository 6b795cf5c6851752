#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "syrof/errors.hpp"
#include "syrof/idset.hpp"

namespace syrof::sync {

enum class ProtoState : uint8_t { kProgress = 0, kWait = 1, kVote = 2 };
enum class OpMode : uint8_t { kCooperative = 0, kAutonomous = 1 };

const char* proto_state_name(ProtoState s);
const char* op_mode_name(OpMode m);

struct SyncConfig {
  int k_vote = 3;                 // rounds in VOTE before the next maneuver starts
  double round_period = 1.0;      // seconds per communication round
  int autonomous_threshold = 1;   // missed-round streak that flips a robot to AUTONOMOUS
  int member_timeout = 0;         // rounds of silence before eviction; 0 means 10 * k_vote

  int effective_member_timeout() const { return member_timeout == 0 ? 10 * k_vote : member_timeout; }
  void validate() const;
};

inline constexpr size_t kPayloadSize = 9;
inline constexpr size_t kWireSize = 17;

/// One round's broadcast. vote_count carries the vote counter in VOTE frames
/// and the sender's maneuver sequence number (mod 256) in PROGRESS frames so a
/// robot that missed an entire vote can recognize that a new maneuver started.
struct SyncMessage {
  uint8_t sender = 0;
  ProtoState proto_state = ProtoState::kProgress;
  OpMode op_mode = OpMode::kCooperative;
  uint8_t vote_count = 0;
  IdSet members;
  std::array<uint8_t, kPayloadSize> payload{};

  bool operator==(const SyncMessage&) const = default;
};

/// Wire format, 17 bytes little-endian:
/// sender u8 | proto_state u8 | op_mode u8 | vote_count u8 | members u32 | payload 9B.
std::array<uint8_t, kWireSize> encode(const SyncMessage& msg);
SyncMessage decode(std::span<const uint8_t> frame);  // throws MalformedFrame

enum class ReceiveResult : uint8_t {
  kApplied,
  kIgnoredEvicted,  // sender was evicted at the previous end-of-round; frame dropped
};

struct RoundEvents {
  uint64_t round = 0;
  bool start_maneuver = false;
  uint64_t maneuver_index = 0;  // 1-based index of the maneuver just started
  bool late_join = false;       // start was adopted from a newer PROGRESS frame
  std::vector<uint8_t> evicted;
  bool went_autonomous = false;
  bool went_cooperative = false;
};

/// Per-robot synchronizer: the PROGRESS/WAIT/VOTE state machine with set-based
/// membership, the silence-counting failure detector, and the stream-consensus
/// operation-mode layer. One instance per robot; the owner drives one
/// build_broadcast, any number of on_receive calls, and one end_of_round per
/// communication round.
class Synchronizer {
 public:
  Synchronizer(uint8_t self_id, SyncConfig config);

  /// Assemble this round's frame. The member set matches the current state
  /// (members in PROGRESS, membersInWait in WAIT, membersInVote in VOTE);
  /// robots in PROGRESS always report COOPERATIVE.
  SyncMessage build_broadcast(std::span<const uint8_t> payload) const;

  /// Apply one received frame. Self-delivery is a caller bug and throws.
  ReceiveResult on_receive(const SyncMessage& msg);

  /// Close the round: failure detector and eviction, state transitions,
  /// stream consensus (for robots whose round was spent outside PROGRESS),
  /// then advance the round counter.
  RoundEvents end_of_round();

  /// Maneuver done: PROGRESS -> WAIT, keeping WAIT/VOTE observations buffered
  /// while this robot was still executing. Throws NotInProgress otherwise.
  void notify_maneuver_complete();

  /// Sorted ids of the current members (always contains self).
  std::vector<uint8_t> membership_snapshot() const { return members_.sorted_ids(); }

  uint8_t self_id() const { return self_id_; }
  ProtoState proto_state() const { return proto_state_; }
  OpMode op_mode() const { return op_mode_; }
  uint64_t round() const { return round_; }
  uint8_t vote_count() const { return vote_count_; }
  uint64_t maneuver_seq() const { return maneuver_seq_; }
  IdSet members() const { return members_; }
  IdSet members_in_wait() const { return members_in_wait_; }
  IdSet members_in_vote() const { return members_in_vote_; }
  int message_lost(uint8_t id) const { return message_lost_.at(id); }
  const SyncConfig& config() const { return config_; }

 private:
  uint8_t self_id_;
  SyncConfig config_;

  ProtoState proto_state_ = ProtoState::kProgress;
  ProtoState state_at_round_start_ = ProtoState::kProgress;
  OpMode op_mode_ = OpMode::kCooperative;
  IdSet members_;
  IdSet members_in_wait_;
  IdSet members_in_vote_;
  uint8_t vote_count_ = 0;
  uint64_t round_ = 0;
  uint64_t maneuver_seq_ = 0;

  std::array<int, IdSet::kMaxIds> message_lost_{};
  std::array<uint64_t, IdSet::kMaxIds> last_heard_{};
  std::array<OpMode, IdSet::kMaxIds> mode_reports_{};
  IdSet mode_report_valid_;

  IdSet heard_this_round_;
  IdSet auto_reports_this_round_;
  IdSet evicted_last_round_;
  bool late_join_pending_ = false;
  uint8_t late_join_delta_ = 0;
};

}  // namespace syrof::sync

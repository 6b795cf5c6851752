#include "syrof/sync.hpp"

#include <algorithm>

namespace syrof::sync {

const char* proto_state_name(ProtoState s) {
  switch (s) {
    case ProtoState::kProgress: return "PROGRESS";
    case ProtoState::kWait: return "WAIT";
    case ProtoState::kVote: return "VOTE";
  }
  return "?";
}

const char* op_mode_name(OpMode m) {
  return m == OpMode::kCooperative ? "COOPERATIVE" : "AUTONOMOUS";
}

void SyncConfig::validate() const {
  if (k_vote < 1 || k_vote > 200) throw Error(Errc::config_invalid, "k_vote must be in 1..=200");
  if (!(round_period > 0.0)) throw Error(Errc::config_invalid, "round_period must be > 0");
  if (autonomous_threshold < 1) throw Error(Errc::config_invalid, "autonomous_threshold must be >= 1");
  if (effective_member_timeout() <= k_vote)
    throw Error(Errc::config_invalid, "member_timeout must exceed k_vote");
}

std::array<uint8_t, kWireSize> encode(const SyncMessage& msg) {
  std::array<uint8_t, kWireSize> out{};
  out[0] = msg.sender;
  out[1] = static_cast<uint8_t>(msg.proto_state);
  out[2] = static_cast<uint8_t>(msg.op_mode);
  out[3] = msg.vote_count;
  const uint32_t mask = msg.members.mask();
  out[4] = static_cast<uint8_t>(mask & 0xff);
  out[5] = static_cast<uint8_t>((mask >> 8) & 0xff);
  out[6] = static_cast<uint8_t>((mask >> 16) & 0xff);
  out[7] = static_cast<uint8_t>((mask >> 24) & 0xff);
  std::copy(msg.payload.begin(), msg.payload.end(), out.begin() + 8);
  return out;
}

SyncMessage decode(std::span<const uint8_t> frame) {
  if (frame.size() != kWireSize) throw Error(Errc::malformed_frame, "frame must be 17 bytes");
  if (frame[1] > 2) throw Error(Errc::malformed_frame, "proto_state byte out of range");
  if (frame[2] > 1) throw Error(Errc::malformed_frame, "op_mode byte out of range");
  SyncMessage msg;
  msg.sender = frame[0];
  msg.proto_state = static_cast<ProtoState>(frame[1]);
  msg.op_mode = static_cast<OpMode>(frame[2]);
  msg.vote_count = frame[3];
  msg.members = IdSet::from_mask(static_cast<uint32_t>(frame[4]) | (static_cast<uint32_t>(frame[5]) << 8) |
                                 (static_cast<uint32_t>(frame[6]) << 16) | (static_cast<uint32_t>(frame[7]) << 24));
  std::copy(frame.begin() + 8, frame.end(), msg.payload.begin());
  return msg;
}

Synchronizer::Synchronizer(uint8_t self_id, SyncConfig config) : self_id_(self_id), config_(config) {
  IdSet::check_id(self_id);
  config_.validate();
  members_.add(self_id_);
}

SyncMessage Synchronizer::build_broadcast(std::span<const uint8_t> payload) const {
  if (payload.size() != kPayloadSize)
    throw Error(Errc::payload_size, "broadcast payload must be exactly 9 bytes");
  SyncMessage msg;
  msg.sender = self_id_;
  msg.proto_state = proto_state_;
  std::copy(payload.begin(), payload.end(), msg.payload.begin());
  switch (proto_state_) {
    case ProtoState::kProgress:
      msg.members = members_;
      msg.vote_count = static_cast<uint8_t>(maneuver_seq_ & 0xff);
      break;
    case ProtoState::kWait:
      msg.members = members_in_wait_;
      msg.vote_count = 0;
      break;
    case ProtoState::kVote:
      msg.members = members_in_vote_;
      msg.vote_count = vote_count_;
      break;
  }
  // A robot mid-maneuver always reports COOPERATIVE; the stream-consensus mode
  // only rides frames sent from WAIT/VOTE.
  msg.op_mode = proto_state_ == ProtoState::kProgress ? OpMode::kCooperative : op_mode_;
  return msg;
}

ReceiveResult Synchronizer::on_receive(const SyncMessage& msg) {
  if (msg.sender == self_id_)
    throw Error(Errc::invalid_id, "self-delivery must be filtered by the network layer");
  IdSet::check_id(msg.sender);
  if (evicted_last_round_.contains(msg.sender)) return ReceiveResult::kIgnoredEvicted;

  heard_this_round_.add(msg.sender);
  message_lost_[msg.sender] = 0;
  last_heard_[msg.sender] = round_;
  mode_reports_[msg.sender] = msg.op_mode;
  mode_report_valid_.add(msg.sender);
  if (msg.op_mode == OpMode::kAutonomous) auto_reports_this_round_.add(msg.sender);
  // membership service: anyone we receive a frame from is a participant
  members_.add(msg.sender);

  IdSet seen = msg.members;
  seen.add(msg.sender);
  switch (msg.proto_state) {
    case ProtoState::kProgress: {
      members_ |= seen;
      // PROGRESS frames carry the sender's maneuver sequence number; a newer
      // one while we are still waiting/voting means that vote already ended.
      const auto fwd = static_cast<int8_t>(msg.vote_count - static_cast<uint8_t>(maneuver_seq_ & 0xff));
      if (proto_state_ != ProtoState::kProgress && fwd > 0) {
        late_join_pending_ = true;
        late_join_delta_ = std::max(late_join_delta_, static_cast<uint8_t>(fwd));
      }
      break;
    }
    case ProtoState::kWait:
      members_in_wait_ |= seen;
      break;
    case ProtoState::kVote:
      members_in_vote_ |= seen;
      if (proto_state_ == ProtoState::kWait) {
        proto_state_ = ProtoState::kVote;
        vote_count_ = msg.vote_count;
        members_in_vote_.add(self_id_);
      } else if (proto_state_ == ProtoState::kVote) {
        vote_count_ = std::max(vote_count_, msg.vote_count);
      }
      break;
  }
  return ReceiveResult::kApplied;
}

void Synchronizer::notify_maneuver_complete() {
  if (proto_state_ != ProtoState::kProgress)
    throw Error(Errc::not_in_progress, "maneuver completion outside PROGRESS");
  proto_state_ = ProtoState::kWait;
  members_in_wait_.add(self_id_);
}

RoundEvents Synchronizer::end_of_round() {
  RoundEvents ev;
  ev.round = round_;

  // (1) failure detector, then eviction of long-silent members
  for (uint8_t id : members_.sorted_ids()) {
    if (id == self_id_) continue;
    if (!heard_this_round_.contains(id)) ++message_lost_[id];
  }
  IdSet evicted_now;
  for (uint8_t id : members_.sorted_ids()) {
    if (id == self_id_) continue;
    if (message_lost_[id] >= config_.effective_member_timeout()) evicted_now.add(id);
  }
  for (uint8_t id : evicted_now.sorted_ids()) {
    members_.remove(id);
    members_in_wait_.remove(id);
    members_in_vote_.remove(id);
    mode_report_valid_.remove(id);
    message_lost_[id] = 0;
    ev.evicted.push_back(id);
  }

  // membership the robot held through this round (evictions excluded): the
  // mode layer below must judge silences against it, not against the
  // responder set a transition installs
  const IdSet members_this_round = members_;

  // (2) state transitions, one branch per round
  const OpMode mode_reported = op_mode_;
  bool started = false;
  if (late_join_pending_ && proto_state_ != ProtoState::kProgress) {
    maneuver_seq_ += late_join_delta_;
    ev.late_join = true;
    started = true;
  } else if (proto_state_ == ProtoState::kWait && members_in_wait_.contains_all(members_)) {
    proto_state_ = ProtoState::kVote;
    members_in_vote_.add(self_id_);
    vote_count_ = 0;
  } else if (proto_state_ == ProtoState::kVote) {
    ++vote_count_;
    if (vote_count_ >= config_.k_vote) {
      maneuver_seq_ += 1;
      started = true;
    }
  }
  if (started) {
    proto_state_ = ProtoState::kProgress;
    ev.start_maneuver = true;
    ev.maneuver_index = maneuver_seq_;
    // members <- current responders: everyone heard within the last k_vote rounds
    IdSet responders;
    responders.add(self_id_);
    for (uint8_t id : members_.sorted_ids())
      if (message_lost_[id] < config_.k_vote) responders.add(id);
    members_ = responders;
    members_in_wait_.clear();
    members_in_vote_.clear();
    vote_count_ = 0;
  }

  // (3) stream consensus, for robots whose round ran outside PROGRESS
  if (state_at_round_start_ != ProtoState::kProgress) {
    bool any_silent = false;
    bool any_auto_report = false;
    bool auto_from_all = true;
    for (uint8_t id : members_this_round.sorted_ids()) {
      if (id == self_id_) continue;
      if (message_lost_[id] >= config_.autonomous_threshold) any_silent = true;
      if (mode_report_valid_.contains(id) && mode_reports_[id] == OpMode::kAutonomous) any_auto_report = true;
      if (!auto_reports_this_round_.contains(id)) auto_from_all = false;
    }
    OpMode next = op_mode_;
    if (any_silent || any_auto_report) next = OpMode::kAutonomous;
    // Recovery is gated on the mode this robot *reported* this round, so a
    // whole AUTONOMOUS cohort flips back together instead of one robot
    // oscillating against the rest.
    if (mode_reported == OpMode::kAutonomous && auto_from_all) next = OpMode::kCooperative;
    ev.went_autonomous = (op_mode_ == OpMode::kCooperative && next == OpMode::kAutonomous);
    ev.went_cooperative = (op_mode_ == OpMode::kAutonomous && next == OpMode::kCooperative);
    op_mode_ = next;
  }

  // (4) housekeeping
  round_ += 1;
  heard_this_round_.clear();
  auto_reports_this_round_.clear();
  evicted_last_round_ = evicted_now;
  late_join_pending_ = false;
  late_join_delta_ = 0;
  state_at_round_start_ = proto_state_;
  return ev;
}

}  // namespace syrof::sync

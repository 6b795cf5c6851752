#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "syrof/errors.hpp"

namespace syrof::pubsub {

/// What happens when a tuple is delivered into a full inbox.
enum class OverflowPolicy : uint8_t {
  kOverwriteLatest,  ///< mailbox semantics: drop the oldest entry, keep the new one
  kDropNewest,       ///< FIFO semantics: reject the new tuple
};

/// Bounded queue of fixed-size raw tuples. Publishers use one as an outbox,
/// subscribers as an inbox; the broker only touches them through handles.
class ByteQueue {
 public:
  explicit ByteQueue(size_t capacity = 1, OverflowPolicy policy = OverflowPolicy::kOverwriteLatest)
      : capacity_(capacity == 0 ? 1 : capacity), policy_(policy) {}

  /// Returns false iff the tuple was rejected (kDropNewest on a full queue).
  bool push(std::span<const uint8_t> tuple);
  std::optional<std::vector<uint8_t>> pop();
  const std::vector<uint8_t>* peek() const { return items_.empty() ? nullptr : &items_.front(); }

  size_t size() const { return items_.size(); }
  size_t capacity() const { return capacity_; }
  OverflowPolicy policy() const { return policy_; }

 private:
  size_t capacity_;
  OverflowPolicy policy_;
  std::deque<std::vector<uint8_t>> items_;
};

using QueueRef = std::shared_ptr<ByteQueue>;

/// Opaque wake-up token a subscriber hands in at subscription time; the broker
/// only ever passes it back through the wake handler.
struct NotifyToken {
  uint32_t value = 0;
  bool operator==(const NotifyToken&) const = default;
};

struct BrokerConfig {
  /// Allow subscribing to a topic before its publisher registers.
  bool allow_late_binding = true;
};

/// In-process broker routing fixed-size tuples from publishers to subscribers.
///
/// The embedded notify-then-wake pattern is modeled explicitly: publish() copies
/// the tuple into every subscriber inbox immediately and queues one pending
/// notification per signaled subscriber; broker_step() drains those
/// notifications in FIFO order through the wake handler. Everything is
/// deterministic given the call order.
class Broker {
 public:
  explicit Broker(BrokerConfig config = {}) : config_(config) {}

  static constexpr size_t kMaxTupleSize = 64;

  /// Returns the dense publisher handle used by publish().
  /// Throws DuplicateTopic if the id is taken, InvalidSize if tuple_size is not in 1..=64.
  uint8_t register_publisher(uint8_t topic_id, size_t tuple_size, QueueRef outbox);

  /// Attach an inbox to a topic. Returns true on success. With late binding
  /// disabled, subscribing to an unregistered topic throws UnknownTopic.
  bool subscribe(uint8_t topic_id, NotifyToken token, QueueRef inbox);

  /// Deliver the single tuple waiting in the publisher's outbox to every
  /// subscriber inbox and queue their wake-ups. Returns the number of
  /// subscribers signaled. Never blocks on a slow subscriber.
  size_t publish(uint8_t handle);

  /// Drain all pending wake-ups, invoking the wake handler for each.
  /// Returns the number of notifications processed.
  size_t broker_step();

  void set_wake_handler(std::function<void(NotifyToken)> handler) { wake_handler_ = std::move(handler); }

  size_t publisher_count() const { return publishers_.size(); }
  size_t subscriber_count(uint8_t topic_id) const;
  size_t pending_notifications() const { return pending_.size(); }

 private:
  struct Subscriber {
    NotifyToken token;
    QueueRef inbox;
  };
  struct Publisher {
    uint8_t topic_id = 0;
    size_t tuple_size = 0;
    QueueRef outbox;
    std::vector<Subscriber> subscribers;
  };

  BrokerConfig config_;
  std::vector<Publisher> publishers_;
  std::map<uint8_t, uint8_t> topic_to_handle_;
  std::map<uint8_t, std::vector<Subscriber>> unbound_subscribers_;  // late-binding parking lot
  std::deque<NotifyToken> pending_;
  std::function<void(NotifyToken)> wake_handler_;
};

}  // namespace syrof::pubsub

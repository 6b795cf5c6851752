#include "syrof/pubsub.hpp"

#include <algorithm>

namespace syrof::pubsub {

bool ByteQueue::push(std::span<const uint8_t> tuple) {
  if (items_.size() >= capacity_) {
    if (policy_ == OverflowPolicy::kDropNewest) return false;
    items_.pop_front();
  }
  items_.emplace_back(tuple.begin(), tuple.end());
  return true;
}

std::optional<std::vector<uint8_t>> ByteQueue::pop() {
  if (items_.empty()) return std::nullopt;
  std::vector<uint8_t> out = std::move(items_.front());
  items_.pop_front();
  return out;
}

uint8_t Broker::register_publisher(uint8_t topic_id, size_t tuple_size, QueueRef outbox) {
  if (topic_to_handle_.contains(topic_id))
    throw Error(Errc::duplicate_topic, "topic " + std::to_string(topic_id) + " already registered");
  if (tuple_size < 1 || tuple_size > kMaxTupleSize)
    throw Error(Errc::invalid_size, "tuple_size " + std::to_string(tuple_size) + " outside 1..=64");
  if (!outbox) throw Error(Errc::invalid_handle, "null outbox");
  if (publishers_.size() >= 255) throw Error(Errc::invalid_handle, "publisher table full");

  Publisher pub;
  pub.topic_id = topic_id;
  pub.tuple_size = tuple_size;
  pub.outbox = std::move(outbox);
  // adopt subscribers that bound before the publisher existed
  if (auto it = unbound_subscribers_.find(topic_id); it != unbound_subscribers_.end()) {
    pub.subscribers = std::move(it->second);
    unbound_subscribers_.erase(it);
  }
  const auto handle = static_cast<uint8_t>(publishers_.size());
  publishers_.push_back(std::move(pub));
  topic_to_handle_[topic_id] = handle;
  return handle;
}

bool Broker::subscribe(uint8_t topic_id, NotifyToken token, QueueRef inbox) {
  if (!inbox) throw Error(Errc::invalid_handle, "null inbox");
  if (auto it = topic_to_handle_.find(topic_id); it != topic_to_handle_.end()) {
    publishers_[it->second].subscribers.push_back({token, std::move(inbox)});
    return true;
  }
  if (!config_.allow_late_binding)
    throw Error(Errc::unknown_topic, "topic " + std::to_string(topic_id) + " not registered");
  unbound_subscribers_[topic_id].push_back({token, std::move(inbox)});
  return true;
}

size_t Broker::publish(uint8_t handle) {
  if (handle >= publishers_.size())
    throw Error(Errc::invalid_handle, "publisher handle " + std::to_string(handle));
  Publisher& pub = publishers_[handle];
  auto tuple = pub.outbox->pop();
  if (!tuple) throw Error(Errc::empty_outbox, "publish with empty outbox, topic " + std::to_string(pub.topic_id));
  if (tuple->size() != pub.tuple_size)
    throw Error(Errc::invalid_size, "tuple of " + std::to_string(tuple->size()) + " bytes on topic sized " +
                                        std::to_string(pub.tuple_size));
  for (Subscriber& sub : pub.subscribers) {
    sub.inbox->push(*tuple);
    pending_.push_back(sub.token);
  }
  return pub.subscribers.size();
}

size_t Broker::broker_step() {
  size_t processed = 0;
  while (!pending_.empty()) {
    NotifyToken token = pending_.front();
    pending_.pop_front();
    if (wake_handler_) wake_handler_(token);
    ++processed;
  }
  return processed;
}

size_t Broker::subscriber_count(uint8_t topic_id) const {
  if (auto it = topic_to_handle_.find(topic_id); it != topic_to_handle_.end())
    return publishers_[it->second].subscribers.size();
  if (auto it = unbound_subscribers_.find(topic_id); it != unbound_subscribers_.end()) return it->second.size();
  return 0;
}

}  // namespace syrof::pubsub

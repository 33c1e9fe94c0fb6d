#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "rucs/clock.hpp"
#include "rucs/domain.hpp"

namespace rucs {

enum class EnvelopeKind { action_request, action_response };

// Unit of broker traffic. Requests always carry reply_to; a response
// reuses the correlation_id of the request it answers.
struct Envelope {
  TopicName topic;
  std::string correlation_id;
  EnvelopeKind kind = EnvelopeKind::action_request;
  ActionName action;
  nlohmann::json payload;
  std::optional<TopicName> reply_to;
  Timestamp published_at;

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

}  // namespace rucs

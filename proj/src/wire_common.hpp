#pragma once

#include <string_view>

#include <json.hpp>

#include "pibench/providers.hpp"

namespace pibench::wire {

/// {"messages": [system, user], temperature?, seed?, top_p?}; parameters the
/// provider does not support are left out.
nlohmann::json chat_body(const ProviderConfig& config, const ChatRequest& request);

/// Text of choices[0].message.content plus model/version echo fields.
/// Throws ProviderError(malformed) on any deviation.
ParsedReply parse_chat_reply(std::string_view body);

}  // namespace pibench::wire

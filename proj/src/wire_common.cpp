#include "wire_common.hpp"

namespace pibench::wire {

using nlohmann::json;

json chat_body(const ProviderConfig& config, const ChatRequest& request) {
  json body;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", request.system_prompt}},
      {{"role", "user"}, {"content", request.user_prompt}},
  });
  const auto& p = request.params;
  const auto& caps = config.capabilities;
  if (p.temperature && caps.temperature) body["temperature"] = *p.temperature;
  if (p.seed && caps.seed) body["seed"] = *p.seed;
  if (p.top_p && caps.top_p) body["top_p"] = *p.top_p;
  return body;
}

ParsedReply parse_chat_reply(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw ProviderError(ProviderErrorKind::malformed, "response body is not JSON");
  }
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw ProviderError(ProviderErrorKind::malformed, "response has no choices");
  }
  const auto& first = (*choices)[0];
  const auto message = first.find("message");
  if (message == first.end() || !message->is_object()) {
    throw ProviderError(ProviderErrorKind::malformed, "first choice has no message");
  }
  const auto content = message->find("content");
  ParsedReply reply;
  if (content == message->end()) {
    throw ProviderError(ProviderErrorKind::malformed, "message has no content");
  }
  // A null content is a refusal or a filtered reply: an empty answer, not a
  // protocol violation.
  if (content->is_string()) {
    reply.text = content->get<std::string>();
  } else if (!content->is_null()) {
    throw ProviderError(ProviderErrorKind::malformed, "message content is not a string");
  }
  for (const char* key : {"model", "system_fingerprint"}) {
    if (auto it = doc.find(key); it != doc.end() && it->is_string()) {
      reply.echo[key] = it->get<std::string>();
    }
  }
  if (auto it = first.find("finish_reason"); it != first.end() && it->is_string()) {
    reply.echo["finish_reason"] = it->get<std::string>();
  }
  return reply;
}

}  // namespace pibench::wire

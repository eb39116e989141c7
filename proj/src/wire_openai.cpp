#include "wire_common.hpp"

namespace pibench::openai_wire {

HttpRequest build_request(const ProviderConfig& config, const ChatRequest& request,
                          const std::string& api_key) {
  auto body = wire::chat_body(config, request);
  body["model"] = config.model_id;

  auto [base, prefix] = split_url(config.endpoint);
  HttpRequest http;
  http.base_url = std::move(base);
  http.path_and_query = prefix + "/chat/completions";
  http.headers = {{"Authorization", "Bearer " + api_key}, {"Content-Type", "application/json"}};
  http.body = body.dump();
  return http;
}

ParsedReply parse_response(std::string_view body) { return wire::parse_chat_reply(body); }

}  // namespace pibench::openai_wire

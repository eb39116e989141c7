#include "wire_common.hpp"

namespace pibench::azure_wire {

// The deployment name takes the place of the model field; the body carries
// only messages and sampling parameters.
HttpRequest build_request(const ProviderConfig& config, const ChatRequest& request,
                          const std::string& api_key) {
  if (!config.api_version || config.api_version->empty()) {
    throw ValidationError("azure provider '" + config.name + "' needs an api_version");
  }
  const auto body = wire::chat_body(config, request);

  auto [base, prefix] = split_url(config.endpoint);
  HttpRequest http;
  http.base_url = std::move(base);
  http.path_and_query = prefix + "/openai/deployments/" + config.model_id +
                        "/chat/completions?api-version=" + *config.api_version;
  http.headers = {{"api-key", api_key}, {"Content-Type", "application/json"}};
  http.body = body.dump();
  return http;
}

ParsedReply parse_response(std::string_view body) { return wire::parse_chat_reply(body); }

}  // namespace pibench::azure_wire

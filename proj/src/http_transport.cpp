#include <httplib.h>

#include "pibench/providers.hpp"

namespace pibench {

HttpResponse HttplibTransport::post(const HttpRequest& request, Duration timeout) {
  httplib::Client client(request.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [key, value] : request.headers) {
    if (key == "Content-Type") {
      content_type = value;
    } else {
      headers.emplace(key, value);
    }
  }

  auto result = client.Post(request.path_and_query, headers, request.body, content_type);
  if (!result) {
    throw ProviderError(ProviderErrorKind::transient,
                        "request to " + request.base_url + " failed: " +
                            httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.body = result->body;
  for (const auto& [key, value] : result->headers) response.headers[key] = value;
  return response;
}

}  // namespace pibench

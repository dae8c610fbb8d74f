#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "schemnet/detect.hpp"

namespace schemnet {

enum class AssistKind { DetectVerify, DesignatorAssign };

std::string_view assist_kind_name(AssistKind k);

struct AssistEndpoint {
  std::string url;      // e.g. http://127.0.0.1:8080
  std::string api_key;  // sent as a bearer token
  int timeout_s = 30;
};

struct AssistSuggestion {
  int component_id = 0;
  std::string designator;
  std::string value;
};

struct AssistResponse {
  std::vector<TypeCount> counts;  // detect_verify: count_b holds the remote count
  std::vector<AssistSuggestion> suggestions;
  std::string rationale;
};

inline constexpr std::size_t kMaxAssistPayload = 8u << 20;

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Request body: {"kind", "image" (base64 PNG), "context"}.
std::string make_assist_request(AssistKind kind, std::span<const std::uint8_t> png, std::string_view context_json);

// Validates a response body; throws IngestError on schema violations.
AssistResponse parse_assist_response(AssistKind kind, std::string_view body);

/// POSTs to <url>/v1/assist. Failures are logged and yield nullopt; they never throw.
std::optional<AssistResponse> remote_call(const AssistEndpoint& ep, AssistKind kind, std::span<const std::uint8_t> png,
                                          std::string_view context_json, std::vector<std::string>& log);

/// In-process stand-in for the assist service, bound to 127.0.0.1 on a free port.
class MockAssistServer {
 public:
  struct Reply {
    int status = 200;
    std::string body;
  };
  // Receives the request body and the Authorization header.
  using Handler = std::function<Reply(const std::string& body, const std::string& authorization)>;

  explicit MockAssistServer(Handler handler);
  ~MockAssistServer();
  MockAssistServer(const MockAssistServer&) = delete;
  MockAssistServer& operator=(const MockAssistServer&) = delete;

  std::string url() const;
  int requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace schemnet

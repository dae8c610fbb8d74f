#include "schemnet/assist.hpp"

#include <atomic>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace schemnet {

using nlohmann::json;

std::string_view assist_kind_name(AssistKind k) {
  return k == AssistKind::DetectVerify ? "detect_verify" : "designator_assign";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  return httplib::detail::base64_encode(std::string(bytes.begin(), bytes.end()));
}

std::string make_assist_request(AssistKind kind, std::span<const std::uint8_t> png, std::string_view context_json) {
  json ctx = json::parse(context_json);
  json req = {{"kind", assist_kind_name(kind)}, {"image", base64_encode(png)}, {"context", ctx}};
  return req.dump();
}

AssistResponse parse_assist_response(AssistKind kind, std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw IngestError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IngestError("$", "expected an object");
  AssistResponse res;
  if (kind == AssistKind::DetectVerify) {
    if (!doc.contains("counts") || !doc["counts"].is_object()) throw IngestError("$.counts", "expected an object");
    for (auto t : kAllTypes) res.counts.push_back({t, 0, 0});
    for (const auto& [name, n] : doc["counts"].items()) {
      auto t = parse_type(name);
      if (!t) throw IngestError("$.counts." + name, "unknown component type");
      if (!n.is_number_integer() || n.get<int>() < 0) throw IngestError("$.counts." + name, "expected a count");
      res.counts[static_cast<int>(*t)].count_b = n.get<int>();
    }
  } else {
    if (!doc.contains("suggestions") || !doc["suggestions"].is_array())
      throw IngestError("$.suggestions", "expected an array");
    std::size_t i = 0;
    for (const auto& s : doc["suggestions"]) {
      std::string path = "$.suggestions[" + std::to_string(i++) + "]";
      if (!s.is_object() || !s.contains("component") || !s["component"].is_number_integer())
        throw IngestError(path + ".component", "expected an integer");
      AssistSuggestion sug;
      sug.component_id = s["component"].get<int>();
      if (s.contains("designator")) {
        if (!s["designator"].is_string()) throw IngestError(path + ".designator", "expected a string");
        sug.designator = s["designator"].get<std::string>();
      }
      if (s.contains("value")) {
        if (!s["value"].is_string()) throw IngestError(path + ".value", "expected a string");
        sug.value = s["value"].get<std::string>();
      }
      res.suggestions.push_back(std::move(sug));
    }
  }
  if (doc.contains("rationale") && doc["rationale"].is_string()) res.rationale = doc["rationale"].get<std::string>();
  return res;
}

namespace {

// Splits "http://host:port/prefix" into ("http://host:port", "/prefix").
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string path = url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, slash), path};
}

}  // namespace

std::optional<AssistResponse> remote_call(const AssistEndpoint& ep, AssistKind kind, std::span<const std::uint8_t> png,
                                          std::string_view context_json, std::vector<std::string>& log) {
  std::string tag = "assist_unavailable (" + std::string(assist_kind_name(kind)) + "): ";
  if (ep.url.empty()) {
    log.push_back(tag + "no endpoint configured");
    return std::nullopt;
  }
  std::string body;
  try {
    body = make_assist_request(kind, png, context_json);
  } catch (const std::exception& e) {
    log.push_back(tag + e.what());
    return std::nullopt;
  }
  if (body.size() > kMaxAssistPayload) {
    log.push_back(tag + "request exceeds 8 MiB");
    return std::nullopt;
  }
  auto [base, prefix] = split_url(ep.url);
  httplib::Client cli(base);
  if (!cli.is_valid()) {
    log.push_back(tag + "invalid url " + ep.url);
    return std::nullopt;
  }
  cli.set_connection_timeout(ep.timeout_s, 0);
  cli.set_read_timeout(ep.timeout_s, 0);
  cli.set_write_timeout(ep.timeout_s, 0);
  httplib::Headers headers;
  if (!ep.api_key.empty()) headers.emplace("Authorization", "Bearer " + ep.api_key);
  auto res = cli.Post(prefix + "/v1/assist", headers, body, "application/json");
  if (!res) {
    log.push_back(tag + "request failed: " + httplib::to_string(res.error()));
    return std::nullopt;
  }
  if (res->status < 200 || res->status >= 300) {
    log.push_back(tag + "HTTP " + std::to_string(res->status));
    return std::nullopt;
  }
  try {
    return parse_assist_response(kind, res->body);
  } catch (const IngestError& e) {
    log.push_back(tag + "schema violation at " + e.what());
    return std::nullopt;
  }
}

struct MockAssistServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> count{0};
};

MockAssistServer::MockAssistServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/assist", [this, handler](const httplib::Request& req, httplib::Response& res) {
    ++impl_->count;
    Reply r = handler(req.body, req.get_header_value("Authorization"));
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw std::runtime_error("mock assist server could not bind");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

MockAssistServer::~MockAssistServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockAssistServer::url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

int MockAssistServer::requests() const { return impl_->count.load(); }

}  // namespace schemnet

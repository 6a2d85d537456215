#include "agc/mock_backend.h"

#include <httplib.h>

#include "agc/error.h"
#include "agc/rng.h"

namespace agc {

namespace {

std::string garbage_text(std::int64_t id) {
  return "Signal review inconclusive for record " + std::to_string(id) +
         ": spectral residue ~~ 0x3f @@ {unterminated";
}

std::string wrapped(const Json& answer, std::int64_t id) {
  switch (((id % 3) + 3) % 3) {
    case 0:
      return answer.dump();
    case 1:
      return "Based on the metadata, here is my assessment:\n" + answer.dump() +
             "\nThe deviation pattern supports this conclusion.";
    default:
      return "Analysis complete.\n```json\n" + answer.dump(2) + "\n```\n";
  }
}

Json completion_body(const std::string& content) {
  return {{"id", "mock-completion"},
          {"object", "chat.completion"},
          {"model", "mock"},
          {"choices",
           {{{"index", 0},
             {"message", {{"role", "assistant"}, {"content", content}}},
             {"finish_reason", "stop"}}}}};
}

}  // namespace

std::string_view mock_mode_name(MockMode mode) {
  switch (mode) {
    case MockMode::kEcho:
      return "echo";
    case MockMode::kFixed:
      return "fixed";
    case MockMode::kFault:
      return "fault";
  }
  return "echo";
}

std::optional<MockMode> mock_mode_from_name(std::string_view name) {
  if (name == "echo") return MockMode::kEcho;
  if (name == "fixed") return MockMode::kFixed;
  if (name == "fault") return MockMode::kFault;
  return std::nullopt;
}

MockBackend::MockBackend(MockOptions options) : options_(std::move(options)) {}

MockBackend::~MockBackend() { stop(); }

bool MockBackend::is_garbage_id(std::int64_t sample_id, double fraction) {
  const std::uint64_t h = splitmix64(static_cast<std::uint64_t>(sample_id) ^ 0x6761726261676521ULL);
  return static_cast<double>(h >> 11) * 0x1.0p-53 < fraction;
}

std::optional<std::int64_t> MockBackend::sample_id_of(const Json& request) {
  if (!request.contains("messages") || !request.at("messages").is_array()) {
    return std::nullopt;
  }
  for (const Json& m : request.at("messages")) {
    if (m.value("role", "") != "user" || !m.contains("content") ||
        !m.at("content").is_string()) {
      continue;
    }
    const auto obj = extract_json_object(m.at("content").get<std::string>());
    if (obj && obj->contains("sample_id") && obj->at("sample_id").is_number_integer()) {
      return obj->at("sample_id").get<std::int64_t>();
    }
    return std::nullopt;
  }
  return std::nullopt;
}

MockReply MockBackend::handle(const Json& request) {
  ++requests_;
  const std::optional<std::int64_t> id = sample_id_of(request);
  int seen = 0;
  {
    std::lock_guard lock(mutex_);
    last_request_ = request;
    if (id) seen = per_sample_[*id]++;
  }
  if (options_.always_429) return {429, ""};
  if (seen < options_.fail_first_n) return {options_.fail_status, ""};

  if (options_.mode == MockMode::kFixed) return {200, options_.fixed_content};
  if (!id) return {200, "No sample_id found in the request."};
  const auto it = options_.gold.find(*id);
  if (it == options_.gold.end()) {
    return {200, "No reference answer for sample " + std::to_string(*id) + "."};
  }
  const Json answer = answer_json(it->second, "Reference answer returned by the mock backend.");
  if (options_.mode == MockMode::kEcho) return {200, answer.dump()};
  if (is_garbage_id(*id, options_.garbage_fraction)) return {200, garbage_text(*id)};
  return {200, wrapped(answer, *id)};
}

void MockBackend::start(const std::string& host, int port) {
  if (server_) throw InvalidArgument("mock backend already running");
  server_ = std::make_unique<httplib::Server>();
  server_->Post(R"((.*)/v1/chat/completions)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  {
                    std::lock_guard lock(mutex_);
                    last_authorization_ = req.get_header_value("Authorization");
                  }
                  const Json body = Json::parse(req.body, nullptr, false);
                  if (body.is_discarded()) {
                    res.status = 400;
                    res.set_content(R"({"error":"invalid JSON body"})", "application/json");
                    return;
                  }
                  const MockReply reply = handle(body);
                  res.status = reply.status;
                  if (reply.status == 200) {
                    res.set_content(completion_body(reply.content).dump(), "application/json");
                  } else {
                    res.set_content(R"({"error":"injected failure"})", "application/json");
                  }
                });
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : port;
  if (port != 0 && !server_->bind_to_port(host, port)) port_ = -1;
  if (port_ <= 0) {
    server_.reset();
    throw IoError("mock backend could not bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockBackend::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string MockBackend::base_url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

std::int64_t MockBackend::requests_for(std::int64_t sample_id) const {
  std::lock_guard lock(mutex_);
  const auto it = per_sample_.find(sample_id);
  return it == per_sample_.end() ? 0 : it->second;
}

std::optional<Json> MockBackend::last_request() const {
  std::lock_guard lock(mutex_);
  return last_request_;
}

std::string MockBackend::last_authorization() const {
  std::lock_guard lock(mutex_);
  return last_authorization_;
}

}  // namespace agc

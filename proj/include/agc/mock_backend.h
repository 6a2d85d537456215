#pragma once

// In-process OpenAI-compatible chat endpoint for offline runs and tests.
//
// Modes:
//   echo  - answers each sample with its gold answer as a bare JSON object;
//   fixed - answers every request with fixed_content;
//   fault - answers with the gold answer wrapped in prose or a code fence
//           (by sample id), and with gibberish, repair requests included,
//           for a deterministic garbage_fraction of sample ids.
// In every mode the first fail_first_n requests for a sample get
// fail_status, and always_429 rejects everything with HTTP 429.
// The sample is identified by the "sample_id" in the first user message.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "agc/explainer.h"

namespace httplib {
class Server;
}

namespace agc {

enum class MockMode { kEcho, kFixed, kFault };

std::string_view mock_mode_name(MockMode mode);
std::optional<MockMode> mock_mode_from_name(std::string_view name);

struct MockOptions {
  MockMode mode = MockMode::kEcho;
  std::map<std::int64_t, GoldAnswer> gold;
  std::string fixed_content;
  int fail_first_n = 0;
  int fail_status = 503;
  bool always_429 = false;
  double garbage_fraction = 0.1;
};

struct MockReply {
  int status = 200;
  std::string content;  // assistant message, when status is 200
};

class MockBackend {
 public:
  explicit MockBackend(MockOptions options);
  ~MockBackend();
  MockBackend(const MockBackend&) = delete;
  MockBackend& operator=(const MockBackend&) = delete;

  // Binds host:port (0 picks a free port) and serves on a background thread.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  std::string base_url() const;

  // Decides the reply to one request body and updates the counters.
  MockReply handle(const Json& request);

  std::int64_t requests() const { return requests_.load(); }
  std::int64_t requests_for(std::int64_t sample_id) const;
  std::optional<Json> last_request() const;
  std::string last_authorization() const;

  static bool is_garbage_id(std::int64_t sample_id, double fraction);
  static std::optional<std::int64_t> sample_id_of(const Json& request);

 private:
  MockOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::int64_t> requests_{0};
  mutable std::mutex mutex_;
  std::map<std::int64_t, int> per_sample_;
  std::optional<Json> last_request_;
  std::string last_authorization_;
};

}  // namespace agc

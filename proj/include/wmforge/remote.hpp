#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "wmforge/error.hpp"
#include "wmforge/vocab.hpp"

namespace wmforge {

class RemoteError : public Error {
 public:
  RemoteError(const std::string& what, int status, int attempts)
      : Error(what), status_(status), attempts_(attempts) {}
  // HTTP status of the last attempt, or 0 when no response arrived.
  int status() const noexcept { return status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  int status_;
  int attempts_;
};

struct RemoteOptions {
  std::string model = "default";
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds timeout{10000};
  unsigned max_in_flight = 4;
};

using LogitBias = std::map<TokenId, double>;

// {"model", "prompt", "max_tokens", "logit_bias": {"<id>": bias}}
nlohmann::json completion_request(std::string_view model, std::string_view prompt, const LogitBias& bias,
                                  int max_tokens);
// Accepts choices[0].text, choices[0].message.content or a top-level "text".
std::string completion_text(std::string_view body);

// Completion-API client. Transient failures (no response, 429, 5xx) are
// retried with exponential backoff; at most `max_in_flight` requests run at
// once across threads sharing the client.
class CompletionClient {
 public:
  explicit CompletionClient(std::string endpoint, RemoteOptions options = {});
  ~CompletionClient();
  CompletionClient(const CompletionClient&) = delete;
  CompletionClient& operator=(const CompletionClient&) = delete;

  std::string complete(std::string_view prompt, const LogitBias& bias, int max_tokens);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string remote_complete(const std::string& endpoint, std::string_view prompt, const LogitBias& bias,
                            int max_tokens, const RemoteOptions& options = {});

}  // namespace wmforge

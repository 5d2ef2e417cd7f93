#include "wmforge/remote.hpp"

#include <httplib.h>

#include <condition_variable>
#include <mutex>
#include <thread>

namespace wmforge {

nlohmann::json completion_request(std::string_view model, std::string_view prompt, const LogitBias& bias,
                                  int max_tokens) {
  nlohmann::json j;
  j["model"] = model;
  j["prompt"] = prompt;
  j["max_tokens"] = max_tokens;
  auto lb = nlohmann::json::object();
  for (const auto& [id, b] : bias) lb[std::to_string(id)] = b;
  j["logit_bias"] = std::move(lb);
  return j;
}

std::string completion_text(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw RemoteError(std::string("malformed completion response: ") + e.what(), 200, 1);
  }
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
  }
  if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
  throw RemoteError("malformed completion response: no completion text", 200, 1);
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an absolute http URL: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

struct CompletionClient::Impl {
  Endpoint endpoint;
  RemoteOptions options;
  std::mutex mu;
  std::condition_variable cv;
  unsigned in_flight = 0;
};

CompletionClient::CompletionClient(std::string endpoint, RemoteOptions options)
    : impl_(std::make_unique<Impl>()) {
  impl_->endpoint = split_endpoint(endpoint);
  if (options.max_attempts < 1) options.max_attempts = 1;
  if (options.max_in_flight < 1) options.max_in_flight = 1;
  impl_->options = std::move(options);
}

CompletionClient::~CompletionClient() = default;

std::string CompletionClient::complete(std::string_view prompt, const LogitBias& bias, int max_tokens) {
  auto& im = *impl_;
  {
    std::unique_lock lock(im.mu);
    im.cv.wait(lock, [&] { return im.in_flight < im.options.max_in_flight; });
    ++im.in_flight;
  }
  struct Release {
    Impl& im;
    ~Release() {
      {
        std::lock_guard lock(im.mu);
        --im.in_flight;
      }
      im.cv.notify_one();
    }
  } release{im};

  const std::string body = completion_request(im.options.model, prompt, bias, max_tokens).dump();
  httplib::Client cli(im.endpoint.base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(im.options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(im.options.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());

  auto backoff = im.options.initial_backoff;
  int status = 0;
  std::string detail;
  for (int attempt = 1; attempt <= im.options.max_attempts; ++attempt) {
    auto res = cli.Post(im.endpoint.path, body, "application/json");
    if (res) {
      status = res->status;
      if (status >= 200 && status < 300) {
        try {
          return completion_text(res->body);
        } catch (const RemoteError& e) {
          throw RemoteError(e.what(), status, attempt);
        }
      }
      detail = "HTTP " + std::to_string(status);
      if (!transient(status)) throw RemoteError("completion request failed: " + detail, status, attempt);
    } else {
      status = 0;
      detail = httplib::to_string(res.error());
    }
    if (attempt < im.options.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw RemoteError("completion request failed after " + std::to_string(im.options.max_attempts) +
                        " attempts: " + detail,
                    status, im.options.max_attempts);
}

std::string remote_complete(const std::string& endpoint, std::string_view prompt, const LogitBias& bias,
                            int max_tokens, const RemoteOptions& options) {
  CompletionClient client(endpoint, options);
  return client.complete(prompt, bias, max_tokens);
}

}  // namespace wmforge

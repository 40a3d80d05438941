#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "halle/io.hpp"

namespace halle {

enum class PromptTemplate { kExtract, kHallucinate, kCover, kContextual };

std::string_view template_name(PromptTemplate id);
PromptTemplate template_from_name(std::string_view name);

struct PromptRequest {
  PromptTemplate template_id = PromptTemplate::kExtract;
  std::map<std::string, std::string> substitutions;
  // Empty means "use the client's configured model".
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
};

// Prompt templates with {name} placeholders, loaded from
// <dir>/{extract,hallucinate,cover,contextual}.txt.
class PromptLibrary {
 public:
  static PromptLibrary load_dir(const std::filesystem::path& dir);

  void set(PromptTemplate id, std::string text);
  const std::string& text(PromptTemplate id) const;

  // Substitutes every placeholder; throws kPrecondition if a placeholder is
  // left without a value.
  std::string render(const PromptRequest& request) const;

  static std::vector<std::string> placeholders(std::string_view text);

 private:
  std::map<PromptTemplate, std::string> templates_;
};

// "['a', 'b']" with single quotes; embedded quotes and backslashes escaped.
std::string render_list_literal(const std::vector<std::string>& items);

// Items of the last quoted list literal in the text. Throws
// kUnparsableOutput when the text holds none.
std::vector<std::string> parse_list_literal(std::string_view raw);

PromptRequest make_extract_request(std::string_view caption_text);

enum class MatchDirection { kHallucination, kCoverage };

// Hallucination: list_A = ground truth, list_B = caption objects.
// Coverage: list_A = caption objects, list_B = ground truth.
PromptRequest make_match_request(MatchDirection direction,
                                 const std::vector<std::string>& ground_truth,
                                 const std::vector<std::string>& caption_objects);

PromptRequest make_contextual_request(const std::vector<std::string>& objects);

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const PromptRequest& request) = 0;
};

struct HttpResponse {
  int status = 0;  // 0 means the transport itself failed
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(
      const std::string& url,
      const std::vector<std::pair<std::string, std::string>>& headers,
      const std::string& body) = 0;
};

// cpp-httplib backed transport; accepts http:// and https:// URLs.
std::unique_ptr<HttpTransport> make_http_transport(
    std::chrono::seconds timeout = std::chrono::seconds(120));

struct CacheEntry {
  std::string key;
  std::string template_id;
  std::string response;
  std::int64_t timestamp = 0;
};

// One JSON file per entry, named by the request digest. Writes go through a
// temp file and rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  static std::string key_for(const PromptRequest& request);

  std::optional<CacheEntry> get(const std::string& key) const;
  void put(const CacheEntry& entry) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct ClientConfig {
  std::string endpoint;
  std::string api_key;
  std::string model = "gpt-4";
  std::filesystem::path cache_dir;
  bool replay = false;
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  int max_parallel = 4;

  // HALLE_LLM_ENDPOINT, HALLE_LLM_API_KEY (or OPENAI_API_KEY),
  // HALLE_LLM_MODEL, HALLE_CACHE_DIR.
  static ClientConfig from_env();
};

// Chat-completions client with a content-addressed response cache. In
// replay mode only cached responses are served.
class CachingChatClient : public ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  CachingChatClient(ClientConfig config, PromptLibrary prompts,
                    std::unique_ptr<HttpTransport> transport = nullptr);

  std::string complete(const PromptRequest& request) override;

  // Stores a response for the request without any network traffic.
  void prime(const PromptRequest& request, std::string_view response);

  // JSON body that complete() would POST for this request.
  std::string request_body(const PromptRequest& request) const;

  std::size_t network_calls() const { return network_calls_.load(); }
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  const PromptLibrary& prompts() const { return prompts_; }

 private:
  PromptRequest resolved(const PromptRequest& request) const;
  std::string fetch(const PromptRequest& request);

  ClientConfig config_;
  PromptLibrary prompts_;
  std::unique_ptr<HttpTransport> transport_;
  std::optional<ResponseCache> cache_;
  std::map<std::string, std::string> memory_cache_;
  std::mutex memory_mutex_;
  std::counting_semaphore<256> slots_;
  std::atomic<std::size_t> network_calls_{0};
  Sleeper sleeper_;
};

}  // namespace halle

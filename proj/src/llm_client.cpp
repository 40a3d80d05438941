#include "halle/llm_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "halle/error.hpp"
#include "halle/text.hpp"

namespace halle {

std::string_view template_name(PromptTemplate id) {
  switch (id) {
    case PromptTemplate::kExtract: return "extract";
    case PromptTemplate::kHallucinate: return "hallucinate";
    case PromptTemplate::kCover: return "cover";
    case PromptTemplate::kContextual: return "contextual";
  }
  return "extract";
}

PromptTemplate template_from_name(std::string_view name) {
  for (auto id : {PromptTemplate::kExtract, PromptTemplate::kHallucinate,
                  PromptTemplate::kCover, PromptTemplate::kContextual}) {
    if (template_name(id) == name) return id;
  }
  throw Error(ErrorCode::kInputParse,
              "unknown prompt template '" + std::string(name) + "'");
}

PromptLibrary PromptLibrary::load_dir(const std::filesystem::path& dir) {
  PromptLibrary library;
  for (auto id : {PromptTemplate::kExtract, PromptTemplate::kHallucinate,
                  PromptTemplate::kCover, PromptTemplate::kContextual}) {
    auto path = dir / (std::string(template_name(id)) + ".txt");
    if (std::filesystem::exists(path)) library.set(id, read_file(path));
  }
  return library;
}

void PromptLibrary::set(PromptTemplate id, std::string text) {
  templates_[id] = std::move(text);
}

const std::string& PromptLibrary::text(PromptTemplate id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kInvalidConfig,
                "no prompt template loaded for '" +
                    std::string(template_name(id)) + "'");
  }
  return it->second;
}

std::vector<std::string> PromptLibrary::placeholders(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    std::size_t close = text.find('}', pos + 1);
    if (close == std::string_view::npos) break;
    std::string_view name = text.substr(pos + 1, close - pos - 1);
    bool identifier = !name.empty() &&
                      std::all_of(name.begin(), name.end(), [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) ||
                               c == '_';
                      });
    if (identifier &&
        std::find(names.begin(), names.end(), name) == names.end()) {
      names.emplace_back(name);
    }
    pos = close + 1;
  }
  return names;
}

std::string PromptLibrary::render(const PromptRequest& request) const {
  const std::string& tmpl = text(request.template_id);
  for (const auto& name : placeholders(tmpl)) {
    if (!request.substitutions.contains(name)) {
      throw Error(ErrorCode::kPrecondition,
                  "placeholder {" + name + "} has no substitution");
    }
  }
  // Single left-to-right pass so substituted values are never re-scanned.
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) break;
    std::size_t close = tmpl.find('}', open + 1);
    if (close == std::string::npos) break;
    auto it = request.substitutions.find(tmpl.substr(open + 1, close - open - 1));
    if (it == request.substitutions.end()) {
      out.append(tmpl, pos, open + 1 - pos);
      pos = open + 1;
      continue;
    }
    out.append(tmpl, pos, open - pos);
    out.append(it->second);
    pos = close + 1;
  }
  out.append(tmpl, pos, std::string::npos);
  return out;
}

std::string render_list_literal(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += '\'';
    for (char c : items[i]) {
      if (c == '\'' || c == '\\') out += '\\';
      out += c;
    }
    out += '\'';
  }
  out += ']';
  return out;
}

namespace {

// Parses a list literal starting at text[pos] == '['; on success pos is left
// on the closing bracket.
std::optional<std::vector<std::string>> parse_list_at(std::string_view text,
                                                      std::size_t& pos) {
  std::vector<std::string> items;
  auto skip_ws = [&] {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  };
  ++pos;
  skip_ws();
  if (pos < text.size() && text[pos] == ']') return items;
  while (pos < text.size()) {
    char quote = text[pos];
    if (quote != '\'' && quote != '"') return std::nullopt;
    ++pos;
    std::string item;
    bool closed = false;
    while (pos < text.size()) {
      char c = text[pos++];
      if (c == '\\' && pos < text.size()) {
        item += text[pos++];
      } else if (c == quote) {
        closed = true;
        break;
      } else {
        item += c;
      }
    }
    if (!closed) return std::nullopt;
    items.emplace_back(trim(item));
    skip_ws();
    if (pos >= text.size()) return std::nullopt;
    if (text[pos] == ']') return items;
    if (text[pos] != ',') return std::nullopt;
    ++pos;
    skip_ws();
    if (pos < text.size() && text[pos] == ']') return items;  // trailing comma
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> parse_list_literal(std::string_view raw) {
  // The literal that ends last wins; among those, the outermost one, so a
  // bracket pair quoted inside an item is not taken for the list.
  std::optional<std::vector<std::string>> best;
  std::size_t best_end = 0;
  for (std::size_t start = raw.find('['); start != std::string_view::npos;
       start = raw.find('[', start + 1)) {
    std::size_t pos = start;
    auto items = parse_list_at(raw, pos);
    if (items && (!best || pos > best_end)) {
      best = std::move(items);
      best_end = pos;
    }
  }
  if (best) return *best;
  std::string preview(raw.substr(0, 120));
  throw Error(ErrorCode::kUnparsableOutput,
              "no list literal in model output: '" + preview + "'");
}

PromptRequest make_extract_request(std::string_view caption_text) {
  PromptRequest request;
  request.template_id = PromptTemplate::kExtract;
  request.substitutions["cap"] = "\"" + std::string(caption_text) + "\"";
  return request;
}

PromptRequest make_match_request(MatchDirection direction,
                                 const std::vector<std::string>& ground_truth,
                                 const std::vector<std::string>& caption_objects) {
  PromptRequest request;
  request.template_id = direction == MatchDirection::kHallucination
                            ? PromptTemplate::kHallucinate
                            : PromptTemplate::kCover;
  request.substitutions["gt"] = render_list_literal(ground_truth);
  request.substitutions["cap_obj"] = render_list_literal(caption_objects);
  return request;
}

PromptRequest make_contextual_request(const std::vector<std::string>& objects) {
  PromptRequest request;
  request.template_id = PromptTemplate::kContextual;
  request.substitutions["objects"] = render_list_literal(objects);
  return request;
}

namespace {

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

  HttpResponse post(const std::string& url,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& body) override {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) {
      throw Error(ErrorCode::kInvalidConfig, "bad endpoint URL");
    }
    httplib::Client client(m[1].str());
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    std::string path = m[2].matched ? m[2].str() : "/";
    auto result = client.Post(path, h, body, "application/json");
    if (!result) return {0, {}};
    return {result->status, result->body};
  }

 private:
  std::chrono::seconds timeout_;
};

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(std::chrono::seconds timeout) {
  return std::make_unique<HttplibTransport>(timeout);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::key_for(const PromptRequest& request) {
  json canonical = {
      {"template", template_name(request.template_id)},
      {"substitutions", request.substitutions},
      {"model", request.model},
      {"temperature", request.temperature},
  };
  return sha256_hex(canonical.dump());
}

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
  auto path = dir_ / (key + ".json");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  json record = read_json_file(path);
  CacheEntry entry;
  entry.key = record.value("key", key);
  entry.template_id = record.value("template", "");
  entry.response = record.at("response").get<std::string>();
  entry.timestamp = record.value("timestamp", std::int64_t{0});
  return entry;
}

void ResponseCache::put(const CacheEntry& entry) const {
  json record = {{"key", entry.key},
                 {"template", entry.template_id},
                 {"response", entry.response},
                 {"timestamp", entry.timestamp}};
  write_file_atomic(dir_ / (entry.key + ".json"), record.dump(2) + "\n");
}

ClientConfig ClientConfig::from_env() {
  ClientConfig config;
  auto env = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  config.endpoint = env("HALLE_LLM_ENDPOINT");
  config.api_key = env("HALLE_LLM_API_KEY");
  if (config.api_key.empty()) config.api_key = env("OPENAI_API_KEY");
  if (auto model = env("HALLE_LLM_MODEL"); !model.empty()) config.model = model;
  if (auto dir = env("HALLE_CACHE_DIR"); !dir.empty()) config.cache_dir = dir;
  return config;
}

CachingChatClient::CachingChatClient(ClientConfig config, PromptLibrary prompts,
                                     std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      prompts_(std::move(prompts)),
      transport_(std::move(transport)),
      slots_(std::clamp(config_.max_parallel, 1, 256)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
  if (!transport_ && !config_.replay) transport_ = make_http_transport();
}

PromptRequest CachingChatClient::resolved(const PromptRequest& request) const {
  PromptRequest out = request;
  if (out.model.empty()) out.model = config_.model;
  return out;
}

std::string CachingChatClient::request_body(const PromptRequest& request) const {
  PromptRequest r = resolved(request);
  json body = {
      {"model", r.model},
      {"messages", json::array({{{"role", "user"}, {"content", prompts_.render(r)}}})},
      {"temperature", r.temperature},
      {"max_tokens", r.max_tokens},
  };
  return body.dump();
}

void CachingChatClient::prime(const PromptRequest& request,
                              std::string_view response) {
  PromptRequest r = resolved(request);
  std::string key = ResponseCache::key_for(r);
  if (cache_) {
    cache_->put({key, std::string(template_name(r.template_id)),
                 std::string(response), 0});
  }
  std::lock_guard lock(memory_mutex_);
  memory_cache_[key] = std::string(response);
}

std::string CachingChatClient::complete(const PromptRequest& request) {
  PromptRequest r = resolved(request);
  std::string key = ResponseCache::key_for(r);
  {
    std::lock_guard lock(memory_mutex_);
    if (auto it = memory_cache_.find(key); it != memory_cache_.end()) {
      return it->second;
    }
  }
  if (cache_) {
    if (auto entry = cache_->get(key)) {
      std::lock_guard lock(memory_mutex_);
      memory_cache_[key] = entry->response;
      return entry->response;
    }
  }
  if (config_.replay) {
    throw Error(ErrorCode::kCacheMissInReplay,
                "replay mode has no cached response for " +
                    std::string(template_name(r.template_id)) + " request " +
                    key.substr(0, 16));
  }
  std::string text = fetch(r);
  if (cache_) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    cache_->put({key, std::string(template_name(r.template_id)), text,
                 std::chrono::duration_cast<std::chrono::seconds>(now).count()});
  }
  std::lock_guard lock(memory_mutex_);
  memory_cache_[key] = text;
  return text;
}

std::string CachingChatClient::fetch(const PromptRequest& request) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::kLlmUnavailable, "no LLM endpoint configured");
  }
  std::string body = request_body(request);
  std::vector<std::pair<std::string, std::string>> headers;
  if (!config_.api_key.empty()) {
    headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  }
  auto delay = config_.initial_backoff;
  int last_status = 0;
  for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
    HttpResponse response;
    {
      slots_.acquire();
      ++network_calls_;
      try {
        response = transport_->post(config_.endpoint, headers, body);
      } catch (...) {
        slots_.release();
        throw;
      }
      slots_.release();
    }
    last_status = response.status;
    if (response.status >= 200 && response.status < 300) {
      try {
        json parsed = json::parse(response.body);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kUnparsableOutput,
                    std::string("malformed chat-completion response: ") + e.what());
      }
    }
    if (!retryable(response.status)) break;
    if (attempt < config_.max_attempts) {
      sleeper_(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * config_.backoff_factor));
    }
  }
  throw Error(ErrorCode::kLlmUnavailable,
              "chat completion failed (last HTTP status " +
                  std::to_string(last_status) + ")");
}

}  // namespace halle

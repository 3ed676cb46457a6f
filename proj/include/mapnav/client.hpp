#pragma once

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mapnav/graph.hpp"
#include "mapnav/jsonio.hpp"
#include "mapnav/prompt.hpp"
#include "mapnav/util.hpp"

namespace mapnav {

enum class BackendKind { HttpChat, MockOracle, MockScripted, MockNoisy };

inline const char* to_string(BackendKind k) {
  switch (k) {
    case BackendKind::HttpChat: return "http_chat";
    case BackendKind::MockOracle: return "mock_oracle";
    case BackendKind::MockScripted: return "mock_scripted";
    case BackendKind::MockNoisy: return "mock_noisy";
  }
  return "http_chat";
}

inline BackendKind backend_kind_from_string(std::string_view s) {
  std::string k(s);
  for (char& c : k) {
    if (c == '-') c = '_';
  }
  if (k == "http_chat") return BackendKind::HttpChat;
  if (k == "mock_oracle") return BackendKind::MockOracle;
  if (k == "mock_scripted") return BackendKind::MockScripted;
  if (k == "mock_noisy") return BackendKind::MockNoisy;
  throw std::invalid_argument("unknown backend kind: " + std::string(s));
}

// Two request shapes cover the common vision-chat endpoints: one nests the
// image as a data URI inside content parts, the other as an explicit base64
// source block.
enum class WireFormat { ContentParts, MessagesWithImage };

struct BackendConfig {
  BackendKind kind = BackendKind::MockOracle;
  std::string endpoint;
  std::string model;
  std::string credential_env;  // name of the environment variable holding the key
  double temperature = 0.0;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  uint64_t seed = 0;           // mocks
  double p_error = 0.0;        // mock_noisy
  std::string script_path;     // mock_scripted
  WireFormat wire = WireFormat::ContentParts;

  std::string identity() const {
    std::string id = to_string(kind);
    switch (kind) {
      case BackendKind::HttpChat:
        id += ":" + model + "@" + endpoint;
        break;
      case BackendKind::MockOracle:
        break;
      case BackendKind::MockScripted:
        id += ":" + hex64(fnv1a64(script_path));
        break;
      case BackendKind::MockNoisy: {
        char buf[64];
        std::snprintf(buf, sizeof(buf), ":seed=%llu:p=%.6f",
                      static_cast<unsigned long long>(seed), p_error);
        id += buf;
        break;
      }
    }
    return id;
  }
};

inline void validate_backend(const BackendConfig& c) {
  if (c.kind == BackendKind::HttpChat) {
    if (c.endpoint.empty()) throw std::invalid_argument("http_chat backend needs an endpoint");
    if (c.credential_env.empty()) {
      throw std::invalid_argument("http_chat backend needs a credential environment variable");
    }
  }
  if (c.kind == BackendKind::MockScripted && c.script_path.empty()) {
    throw std::invalid_argument("mock_scripted backend needs a script file");
  }
  if (c.kind == BackendKind::MockNoisy && !(c.p_error >= 0.0 && c.p_error <= 1.0)) {
    throw std::invalid_argument("mock_noisy error rate must be within [0, 1]");
  }
  if (c.max_retries < 0) throw std::invalid_argument("retry count cannot be negative");
  if (!(c.timeout_seconds > 0)) throw std::invalid_argument("timeout must be positive");
}

struct HttpResponse {
  int status = 0;  // 0 means the request never completed
  std::string body;
  bool timed_out = false;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;
using Transport =
    std::function<HttpResponse(const std::string& endpoint, const std::string& payload,
                               const HttpHeaders& headers, double timeout_seconds)>;
using Sleeper = std::function<void(double seconds)>;

enum class QueryError { None, Auth, Timeout, Transport, BadResponse, CacheMiss };

inline const char* to_string(QueryError e) {
  switch (e) {
    case QueryError::None: return "none";
    case QueryError::Auth: return "auth";
    case QueryError::Timeout: return "timeout";
    case QueryError::Transport: return "transport";
    case QueryError::BadResponse: return "bad_response";
    case QueryError::CacheMiss: return "cache_miss";
  }
  return "none";
}

struct Transcript {
  std::string prompt_hash;
  std::string backend;
  int trial_index = 0;
  std::string request_payload;  // request JSON; headers (and so credentials) excluded
  std::string response_text;
  QueryError error = QueryError::None;
  std::string error_detail;
  double latency_ms = 0.0;
  std::string timestamp;
  bool from_cache = false;
  ParseResult parsed;  // derived from response_text on load, never persisted

  bool ok() const { return error == QueryError::None; }

  Json to_json() const {
    Json j;
    j["prompt_hash"] = prompt_hash;
    j["backend"] = backend;
    j["trial_index"] = trial_index;
    j["request_payload"] = request_payload;
    j["response_text"] = response_text;
    j["error"] = to_string(error);
    if (!error_detail.empty()) j["error_detail"] = error_detail;
    j["latency_ms"] = latency_ms;
    j["timestamp"] = timestamp;
    return j;
  }
};

// Token bucket used to pace outgoing queries. Time is supplied by the caller
// in seconds so tests can drive it manually.
class RateGate {
 public:
  RateGate(double capacity, double refill_per_second)
      : capacity_(capacity), rate_(refill_per_second), tokens_(capacity) {
    if (!(capacity > 0) || !(refill_per_second > 0)) {
      throw std::invalid_argument("rate gate needs positive capacity and refill rate");
    }
  }

  // Reserves one token; returns how long the caller must wait before
  // proceeding (0 when a token was free).
  double acquire(double now_seconds) {
    std::lock_guard<std::mutex> lock(mu_);
    if (now_seconds > last_) {
      tokens_ = std::min(capacity_, tokens_ + (now_seconds - last_) * rate_);
      last_ = now_seconds;
    }
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return 0.0;
    }
    double wait = (1.0 - tokens_) / rate_;
    tokens_ = 0.0;
    last_ += wait;  // the reserved token materializes at last_
    return wait;
  }

 private:
  std::mutex mu_;
  double capacity_;
  double rate_;
  double tokens_;
  double last_ = 0.0;
};

enum class QueryMode { Normal, Replay };

struct ClientContext {
  Transport transport;  // required for http_chat; unused by mocks
  Sleeper sleeper = [](double s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  };
  std::string cache_dir;  // empty disables the transcript cache
  QueryMode mode = QueryMode::Normal;
  const ConnectivityGraph* graph = nullptr;  // required by plan-producing mocks
  Profile profile = Profile::Strict;
  RateGate* gate = nullptr;
  std::function<double()> now = [] {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
};

namespace detail {

inline uint64_t uniform_below(uint64_t key, uint64_t n) {
  uint64_t zone = std::numeric_limits<uint64_t>::max() / n * n;
  for (uint64_t nonce = 0;; ++nonce) {
    uint64_t v = mix64(key, nonce);
    if (v < zone) return v % n;
  }
}

inline double unit_double(uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }

inline std::string utc_now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace detail

// Deterministic imitation of a fallible model. Emits the ground-truth plan
// with probability 1 - p_error; otherwise applies exactly one corruption:
// dropping the final door triple, retargeting the first triple onto a door
// that does not touch the start room (falling back to the drop when every
// door does), or renaming the first verb to one outside the grammar.
inline std::string mock_noisy_respond(const ConnectivityGraph& g, const NavTask& task,
                                      uint64_t seed, double p_error, int trial) {
  Plan plan = oracle_plan(g, task);
  uint64_t base = mix64(seed, static_cast<uint64_t>(trial));
  if (detail::unit_double(base) >= p_error) {
    return serialize_plan(plan, PlanFormat::Json);
  }

  uint64_t pick_key = mix64(seed ^ 0x736372616d626c65ULL, static_cast<uint64_t>(trial));
  uint64_t choice = detail::uniform_below(pick_key, 3);

  if (choice == 1) {
    // Retarget the first triple at the lexicographically smallest door that
    // is not on the start room's boundary.
    int start = g.require_room(task.start_room);
    std::string swap_door;
    for (const GraphEdge& e : g.edges) {
      if (e.a == start || e.b == start) continue;
      if (swap_door.empty() || e.door_id < swap_door) swap_door = e.door_id;
    }
    if (!swap_door.empty() && plan.actions.size() >= 3) {
      for (size_t i = 0; i < 3; ++i) plan.actions[i].target = swap_door;
      return serialize_plan(plan, PlanFormat::Json);
    }
    choice = 0;  // single-door maps cannot express this corruption
  }

  if (choice == 0) {
    size_t keep = plan.actions.size() >= 3 ? plan.actions.size() - 3 : 0;
    plan.actions.resize(keep);
    return serialize_plan(plan, PlanFormat::Json);
  }

  Json j = Json::parse(serialize_plan(plan, PlanFormat::Json));
  j["plan"][0]["action"] = "FlyTo";
  return j.dump();
}

namespace detail {

inline std::string cache_file_name(const std::string& prompt_hash, const std::string& identity,
                                   int trial) {
  return prompt_hash + "_" + hex64(fnv1a64(identity)) + "_" + std::to_string(trial) + ".json";
}

inline Json build_payload(const BackendConfig& cfg, const RenderedPrompt& prompt) {
  Json msg;
  msg["role"] = "user";
  Json parts = Json::array();
  if (cfg.wire == WireFormat::ContentParts) {
    Json text_part;
    text_part["type"] = "text";
    text_part["text"] = prompt.text;
    parts.push_back(std::move(text_part));
    if (!prompt.image_bytes.empty()) {
      Json image_part;
      image_part["type"] = "image_url";
      image_part["image_url"]["url"] =
          "data:image/png;base64," + base64_encode(prompt.image_bytes);
      parts.push_back(std::move(image_part));
    }
  } else {
    if (!prompt.image_bytes.empty()) {
      Json image_part;
      image_part["type"] = "image";
      image_part["source"]["type"] = "base64";
      image_part["source"]["media_type"] = "image/png";
      image_part["source"]["data"] = base64_encode(prompt.image_bytes);
      parts.push_back(std::move(image_part));
    }
    Json text_part;
    text_part["type"] = "text";
    text_part["text"] = prompt.text;
    parts.push_back(std::move(text_part));
  }
  msg["content"] = std::move(parts);

  Json payload;
  payload["model"] = cfg.model;
  payload["temperature"] = cfg.temperature;
  if (cfg.wire == WireFormat::MessagesWithImage) payload["max_tokens"] = 2048;
  payload["messages"] = Json::array({std::move(msg)});
  return payload;
}

// Pulls the assistant text out of a completed response; empty optional when
// the body is not JSON or lacks the expected shape.
inline std::optional<std::string> extract_text(const BackendConfig& cfg, const std::string& body) {
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  if (cfg.wire == WireFormat::ContentParts) {
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const Json& msg = j["choices"][0];
      if (msg.contains("message") && msg["message"].contains("content") &&
          msg["message"]["content"].is_string()) {
        return msg["message"]["content"].get<std::string>();
      }
    }
    return std::nullopt;
  }
  if (j.contains("content") && j["content"].is_array()) {
    for (const Json& part : j["content"]) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") &&
          part["text"].is_string()) {
        return part["text"].get<std::string>();
      }
    }
  }
  return std::nullopt;
}

inline Transcript load_cached(const std::string& path) {
  Json j = Json::parse(read_file(path));
  Transcript t;
  t.prompt_hash = j.value("prompt_hash", "");
  t.backend = j.value("backend", "");
  t.trial_index = j.value("trial_index", 0);
  t.request_payload = j.value("request_payload", "");
  t.response_text = j.value("response_text", "");
  std::string err = j.value("error", "none");
  for (QueryError e : {QueryError::None, QueryError::Auth, QueryError::Timeout,
                       QueryError::Transport, QueryError::BadResponse, QueryError::CacheMiss}) {
    if (err == to_string(e)) t.error = e;
  }
  t.error_detail = j.value("error_detail", "");
  t.latency_ms = j.value("latency_ms", 0.0);
  t.timestamp = j.value("timestamp", "");
  t.from_cache = true;
  return t;
}

inline void store_atomically(const std::string& dir, const std::string& name,
                             const std::string& bytes) {
  std::filesystem::create_directories(dir);
  std::filesystem::path target = std::filesystem::path(dir) / name;
  std::filesystem::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  write_file(tmp.string(), bytes);
  std::filesystem::rename(tmp, target);
}

}  // namespace detail

// One model query. Mocks answer locally; http_chat drives the injected
// transport with retry and exponential backoff on 429/5xx/timeouts. With a
// cache directory set, completed transcripts are stored under
// (prompt hash, backend identity, trial index) and replayed on later calls;
// replay mode never leaves the cache.
inline Transcript query(const BackendConfig& cfg, const PromptSpec& spec, int trial,
                        ClientContext& ctx) {
  validate_backend(cfg);
  RenderedPrompt prompt = build_prompt(spec);

  Transcript t;
  t.prompt_hash = prompt_hash(spec);
  t.backend = cfg.identity();
  t.trial_index = trial;

  std::string cache_name = detail::cache_file_name(t.prompt_hash, t.backend, trial);
  if (!ctx.cache_dir.empty()) {
    std::string path = (std::filesystem::path(ctx.cache_dir) / cache_name).string();
    if (std::filesystem::exists(path)) {
      Transcript cached = detail::load_cached(path);
      if (cached.ok()) {
        cached.parsed = parse_plan_json(cached.response_text, ctx.profile);
      }
      return cached;
    }
  }
  if (ctx.mode == QueryMode::Replay) {
    t.error = QueryError::CacheMiss;
    t.error_detail = "replay mode found no cached transcript " + cache_name;
    return t;
  }

  if (cfg.kind != BackendKind::HttpChat) {
    if ((cfg.kind == BackendKind::MockOracle || cfg.kind == BackendKind::MockNoisy) &&
        ctx.graph == nullptr) {
      throw std::invalid_argument("plan-producing mock backends need a connectivity graph");
    }
    Json req;
    req["mock"] = to_string(cfg.kind);
    req["trial_index"] = trial;
    req["text"] = prompt.text;
    t.request_payload = req.dump();
    t.timestamp = "1970-01-01T00:00:00Z";

    if (cfg.kind == BackendKind::MockOracle) {
      NavTask task{"", spec.start_room, spec.goal_room, Difficulty::Hard};
      t.response_text = serialize_plan(oracle_plan(*ctx.graph, task), PlanFormat::Json);
    } else if (cfg.kind == BackendKind::MockNoisy) {
      NavTask task{"", spec.start_room, spec.goal_room, Difficulty::Hard};
      t.response_text = mock_noisy_respond(*ctx.graph, task, cfg.seed, cfg.p_error, trial);
    } else {
      Json script = Json::parse(read_file(cfg.script_path));
      if (!script.is_array() || script.empty()) {
        throw std::invalid_argument("script file must hold a non-empty JSON array of responses");
      }
      t.response_text =
          script[static_cast<size_t>(trial) % script.size()].get<std::string>();
    }
  } else {
    if (!ctx.transport) {
      throw std::invalid_argument("http_chat backend needs a transport in the client context");
    }
    const char* cred = std::getenv(cfg.credential_env.c_str());
    if (cred == nullptr || *cred == '\0') {
      t.error = QueryError::Auth;
      t.error_detail = "credential variable " + cfg.credential_env + " is not set";
      return t;
    }
    HttpHeaders headers;
    if (cfg.wire == WireFormat::ContentParts) {
      headers.emplace_back("Authorization", std::string("Bearer ") + cred);
    } else {
      headers.emplace_back("x-api-key", cred);
    }
    headers.emplace_back("Content-Type", "application/json");

    Json payload = detail::build_payload(cfg, prompt);
    t.request_payload = payload.dump();
    t.timestamp = detail::utc_now_iso8601();

    if (ctx.gate) {
      double wait = ctx.gate->acquire(ctx.now());
      if (wait > 0) ctx.sleeper(wait);
    }

    for (int attempt = 0;; ++attempt) {
      double t0 = ctx.now();
      HttpResponse resp;
      try {
        resp = ctx.transport(cfg.endpoint, t.request_payload, headers, cfg.timeout_seconds);
      } catch (const std::exception& e) {
        resp.status = 0;
        resp.body = e.what();
      }
      t.latency_ms = (ctx.now() - t0) * 1000.0;

      bool transient = resp.timed_out || resp.status == 429 ||
                       (resp.status >= 500 && resp.status <= 599) || resp.status == 0;
      if (!transient) {
        if (resp.status == 401 || resp.status == 403) {
          t.error = QueryError::Auth;
          t.error_detail = "backend rejected the credential (HTTP " +
                           std::to_string(resp.status) + ")";
        } else if (resp.status == 200) {
          auto text = detail::extract_text(cfg, resp.body);
          if (!text) {
            t.error = QueryError::BadResponse;
            t.error_detail = "response body is not the expected completion JSON";
          } else {
            t.response_text = *text;
          }
        } else {
          t.error = QueryError::Transport;
          t.error_detail = "HTTP " + std::to_string(resp.status);
        }
        break;
      }
      if (attempt >= cfg.max_retries) {
        if (resp.timed_out) {
          t.error = QueryError::Timeout;
          t.error_detail =
              "timed out after " + std::to_string(attempt + 1) + " attempts";
        } else {
          t.error = QueryError::Transport;
          t.error_detail = "transient failure (HTTP " + std::to_string(resp.status) +
                           ") persisted through " + std::to_string(attempt + 1) + " attempts";
        }
        break;
      }
      ctx.sleeper(0.5 * static_cast<double>(1u << attempt));
    }
  }

  if (t.ok()) {
    t.parsed = parse_plan_json(t.response_text, ctx.profile);
    if (!ctx.cache_dir.empty()) {
      detail::store_atomically(ctx.cache_dir, cache_name, t.to_json().dump());
    }
  }
  return t;
}

inline std::string transcript_cache_name(const BackendConfig& cfg, const PromptSpec& spec,
                                         int trial) {
  return detail::cache_file_name(prompt_hash(spec), cfg.identity(), trial);
}

}  // namespace mapnav

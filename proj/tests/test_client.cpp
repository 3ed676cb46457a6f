#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <set>

#include "mapnav/client.hpp"
#include "mapnav/stats.hpp"
#include "mapnav/validate.hpp"
#include "testutil.hpp"

using namespace mapnav;
using namespace testutil;

namespace {

struct ClientWorld {
  FloorPlan fp = load_fixture("petit_chalet.json");
  ConnectivityGraph graph = build_connectivity(fp);
  NavTask task{"petit_chalet", "Terrasse Couverte", "Chambre 1", Difficulty::Hard};
};

const ClientWorld& world() {
  static ClientWorld w;
  return w;
}

PromptSpec chalet_spec() {
  PromptSpec spec;
  spec.start_room = "Terrasse Couverte";
  spec.goal_room = "Chambre 1";
  spec.image_bytes = "not-really-a-png";
  return spec;
}

ClientContext mock_context() {
  ClientContext ctx;
  ctx.graph = &world().graph;
  ctx.sleeper = [](double) {};
  return ctx;
}

// Counts calls and plays back a fixed sequence of responses, repeating the
// last one once the script runs out.
struct FakeTransport {
  std::vector<HttpResponse> script;
  int calls = 0;
  std::string last_endpoint;
  std::string last_payload;
  HttpHeaders last_headers;

  Transport fn() {
    return [this](const std::string& endpoint, const std::string& payload,
                  const HttpHeaders& headers, double) {
      last_endpoint = endpoint;
      last_payload = payload;
      last_headers = headers;
      size_t i = std::min(static_cast<size_t>(calls), script.size() - 1);
      ++calls;
      return script[i];
    };
  }
};

HttpResponse ok_chat_response() {
  Json inner;
  inner["plan"] = Json::array();
  for (const char* verb : {"ApproachDoor", "OpenDoor", "GoThrough"}) {
    Json a;
    a["action"] = verb;
    a["target"] = "D8";
    inner["plan"].push_back(a);
  }
  Json body;
  body["choices"] = Json::array();
  body["choices"].push_back(Json::object());
  body["choices"][0]["message"]["content"] = inner.dump();
  return HttpResponse{200, body.dump(), false};
}

std::string header_value(const HttpHeaders& headers, const std::string& key) {
  for (const auto& [k, v] : headers) {
    if (k == key) return v;
  }
  return "";
}

Outcome outcome_of(const ConnectivityGraph& g, const NavTask& task, const std::string& text) {
  ParseResult pr = parse_plan_json(text);
  if (!pr.ok) return pr.verdict.outcome;
  return validate_plan(g, task, pr.plan).outcome;
}

}  // namespace

TEST_CASE("mock oracle backend answers with the ground-truth plan") {
  BackendConfig cfg;
  cfg.kind = BackendKind::MockOracle;
  ClientContext ctx = mock_context();

  Transcript t = query(cfg, chalet_spec(), 0, ctx);
  REQUIRE(t.ok());
  CHECK(t.backend == "mock_oracle");
  CHECK(t.trial_index == 0);
  CHECK(t.timestamp == "1970-01-01T00:00:00Z");
  CHECK_FALSE(t.from_cache);
  CHECK(t.prompt_hash == prompt_hash(chalet_spec()));

  REQUIRE(t.parsed.ok);
  Verdict v = validate_plan(world().graph, world().task, t.parsed.plan);
  CHECK(v.correct());
  CHECK(t.parsed.plan.size() == 9);

  // the would-be request is recorded even though no wire call happens
  Json req = Json::parse(t.request_payload);
  CHECK(req["mock"] == "mock_oracle");
  CHECK(req["text"].get<std::string>().find("Terrasse Couverte") != std::string::npos);
}

TEST_CASE("mock noisy backend is deterministic per seed and trial") {
  BackendConfig cfg;
  cfg.kind = BackendKind::MockNoisy;
  cfg.seed = 99;
  cfg.p_error = 0.5;
  ClientContext ctx = mock_context();

  for (int trial : {0, 3, 17}) {
    Transcript a = query(cfg, chalet_spec(), trial, ctx);
    Transcript b = query(cfg, chalet_spec(), trial, ctx);
    CHECK(a.response_text == b.response_text);
  }

  std::string oracle = serialize_plan(oracle_plan(world().graph, world().task), PlanFormat::Json);
  int differing = 0;
  for (int trial = 0; trial < 40; ++trial) {
    if (query(cfg, chalet_spec(), trial, ctx).response_text != oracle) ++differing;
  }
  CHECK(differing > 5);
  CHECK(differing < 35);

  BackendConfig other = cfg;
  other.seed = 100;
  int moved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    if (query(cfg, chalet_spec(), trial, ctx).response_text !=
        query(other, chalet_spec(), trial, ctx).response_text) {
      ++moved;
    }
  }
  CHECK(moved > 0);
}

TEST_CASE("noisy corruptions cover the three failure families") {
  const auto& w = world();

  SECTION("every corruption lands in a known family and all three appear") {
    std::set<Outcome> seen;
    for (int trial = 0; trial < 60; ++trial) {
      std::string text = mock_noisy_respond(w.graph, w.task, 7, 1.0, trial);
      Outcome o = outcome_of(w.graph, w.task, text);
      CHECK(o != Outcome::Correct);
      CHECK((o == Outcome::GoalNotReached || o == Outcome::InfeasibleAction ||
             o == Outcome::UnknownAction));
      seen.insert(o);
    }
    CHECK(seen.size() == 3);
  }

  SECTION("retargeting picks the smallest door away from the start room") {
    bool found_swap = false;
    for (int trial = 0; trial < 60 && !found_swap; ++trial) {
      std::string text = mock_noisy_respond(w.graph, w.task, 7, 1.0, trial);
      ParseResult pr = parse_plan_json(text);
      if (!pr.ok || pr.plan.size() != 9) continue;
      if (pr.plan.actions[0].target == "D8") continue;
      found_swap = true;
      // D8 is the only door on the Terrasse Couverte boundary, so the swap
      // lands on the alphabetical minimum of the rest.
      CHECK(pr.plan.actions[0].target == "D1");
      CHECK(pr.plan.actions[1].target == "D1");
      CHECK(pr.plan.actions[2].target == "D1");
      CHECK(pr.plan.actions[3].target != "D1");
      CHECK(validate_plan(w.graph, w.task, pr.plan).outcome == Outcome::InfeasibleAction);
    }
    CHECK(found_swap);
  }

  SECTION("verb corruption survives serialization as an unknown action") {
    bool found_verb = false;
    for (int trial = 0; trial < 60 && !found_verb; ++trial) {
      std::string text = mock_noisy_respond(w.graph, w.task, 7, 1.0, trial);
      if (text.find("FlyTo") == std::string::npos) continue;
      found_verb = true;
      ParseResult pr = parse_plan_json(text);
      REQUIRE(pr.ok);
      CHECK(pr.plan.actions[0].raw_verb == "FlyTo");
      Verdict v = validate_plan(w.graph, w.task, pr.plan);
      CHECK(v.outcome == Outcome::UnknownAction);
      CHECK(v.failing_index == 0);
    }
    CHECK(found_verb);
  }

  SECTION("a map whose only door touches the start falls back to dropping") {
    FloorPlan fp = load_fixture("two_rooms.json");
    ConnectivityGraph g = build_connectivity(fp);
    NavTask task{"two_rooms", g.rooms[0], g.rooms[1], Difficulty::Easy};
    std::string oracle = serialize_plan(oracle_plan(g, task), PlanFormat::Json);
    bool saw_drop = false;
    for (int trial = 0; trial < 60; ++trial) {
      std::string text = mock_noisy_respond(g, task, 21, 1.0, trial);
      CHECK(text != oracle);
      ParseResult pr = parse_plan_json(text);
      REQUIRE(pr.ok);
      if (text.find("FlyTo") != std::string::npos) continue;
      // both the drop branch and the impossible retarget produce the
      // truncated plan, which on a one-hop task is empty
      CHECK(pr.plan.empty());
      saw_drop = true;
    }
    CHECK(saw_drop);
  }
}

TEST_CASE("noisy correctness rate stays inside the concentration bound") {
  const auto& w = world();
  const double p_error = 0.3;
  const int n = 1000;

  int correct = 0;
  for (int trial = 0; trial < n; ++trial) {
    std::string text = mock_noisy_respond(w.graph, w.task, 4242, p_error, trial);
    if (outcome_of(w.graph, w.task, text) == Outcome::Correct) ++correct;
  }
  double rate = static_cast<double>(correct) / n;
  // two-sided bound at confidence 1 - 1e-6; frozen alongside the stats tests
  double margin = hoeffding_margin(n, 1e-6);
  CHECK(margin == Catch::Approx(0.085172348031870706).epsilon(1e-12));
  CHECK(std::abs(rate - (1.0 - p_error)) <= margin);
}

TEST_CASE("scripted backend cycles through its response file") {
  TempDir tmp;
  std::string script = tmp.file("script.json");
  write_file(script, R"(["alpha", "beta", "gamma"])");

  BackendConfig cfg;
  cfg.kind = BackendKind::MockScripted;
  cfg.script_path = script;
  ClientContext ctx = mock_context();

  CHECK(query(cfg, chalet_spec(), 0, ctx).response_text == "alpha");
  CHECK(query(cfg, chalet_spec(), 1, ctx).response_text == "beta");
  CHECK(query(cfg, chalet_spec(), 2, ctx).response_text == "gamma");
  CHECK(query(cfg, chalet_spec(), 5, ctx).response_text == "gamma");
  CHECK(query(cfg, chalet_spec(), 6, ctx).response_text == "alpha");

  SECTION("a script that is not a JSON array is rejected") {
    write_file(script, R"({"plan": []})");
    CHECK_THROWS_AS(query(cfg, chalet_spec(), 0, ctx), std::invalid_argument);
  }
}

TEST_CASE("content-parts wire format") {
  setenv("MAPNAV_TEST_KEY", "sk-test-secret-123", 1);
  FakeTransport transport;
  transport.script = {ok_chat_response()};

  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://chat.example/v1/chat/completions";
  cfg.model = "pathfinder-large";
  cfg.credential_env = "MAPNAV_TEST_KEY";
  cfg.temperature = 0.25;

  ClientContext ctx = mock_context();
  ctx.transport = transport.fn();

  PromptSpec spec = chalet_spec();
  Transcript t = query(cfg, spec, 0, ctx);
  REQUIRE(t.ok());
  CHECK(transport.calls == 1);
  CHECK(transport.last_endpoint == cfg.endpoint);

  Json payload = Json::parse(transport.last_payload);
  CHECK(payload["model"] == "pathfinder-large");
  CHECK(payload["temperature"] == Catch::Approx(0.25));
  REQUIRE(payload["messages"].size() == 1);
  const Json& content = payload["messages"][0]["content"];
  REQUIRE(content.size() == 2);
  CHECK(content[0]["type"] == "text");
  CHECK(content[0]["text"] == build_prompt(spec).text);
  CHECK(content[1]["type"] == "image_url");
  std::string url = content[1]["image_url"]["url"].get<std::string>();
  std::string prefix = "data:image/png;base64,";
  REQUIRE(url.rfind(prefix, 0) == 0);
  CHECK(url.substr(prefix.size()) == base64_encode(spec.image_bytes));

  CHECK(header_value(transport.last_headers, "Authorization") == "Bearer sk-test-secret-123");
  CHECK(header_value(transport.last_headers, "Content-Type") == "application/json");

  REQUIRE(t.parsed.ok);
  CHECK(t.parsed.plan.size() == 3);
  CHECK(t.parsed.plan.actions[0].target == "D8");
  CHECK_FALSE(t.timestamp.empty());
  CHECK(t.timestamp != "1970-01-01T00:00:00Z");
}

TEST_CASE("messages-with-image wire format") {
  setenv("MAPNAV_TEST_KEY", "sk-test-secret-123", 1);
  Json body;
  body["content"] = Json::array();
  body["content"].push_back({{"type", "thinking"}, {"thinking", "hm"}});
  body["content"].push_back({{"type", "text"}, {"text", "the reply"}});
  FakeTransport transport;
  transport.script = {HttpResponse{200, body.dump(), false}};

  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://msg.example/v1/messages";
  cfg.model = "pathfinder-mini";
  cfg.credential_env = "MAPNAV_TEST_KEY";
  cfg.wire = WireFormat::MessagesWithImage;

  ClientContext ctx = mock_context();
  ctx.transport = transport.fn();

  PromptSpec spec = chalet_spec();
  Transcript t = query(cfg, spec, 0, ctx);
  REQUIRE(t.ok());
  CHECK(t.response_text == "the reply");

  Json payload = Json::parse(transport.last_payload);
  CHECK(payload.contains("max_tokens"));
  const Json& content = payload["messages"][0]["content"];
  REQUIRE(content.size() == 2);
  CHECK(content[0]["type"] == "image");
  CHECK(content[0]["source"]["type"] == "base64");
  CHECK(content[0]["source"]["media_type"] == "image/png");
  CHECK(content[0]["source"]["data"] == base64_encode(spec.image_bytes));
  CHECK(content[1]["type"] == "text");

  CHECK(header_value(transport.last_headers, "x-api-key") == "sk-test-secret-123");
  CHECK(header_value(transport.last_headers, "Authorization").empty());
}

TEST_CASE("transient failures retry with exponential backoff") {
  setenv("MAPNAV_TEST_KEY", "k", 1);
  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://chat.example/v1";
  cfg.credential_env = "MAPNAV_TEST_KEY";

  std::vector<double> sleeps;
  ClientContext ctx = mock_context();
  ctx.sleeper = [&](double s) { sleeps.push_back(s); };

  SECTION("rate limit then server error then success") {
    FakeTransport transport;
    transport.script = {HttpResponse{429, "slow down", false}, HttpResponse{503, "", false},
                        ok_chat_response()};
    ctx.transport = transport.fn();

    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.ok());
    CHECK(transport.calls == 3);
    REQUIRE(sleeps.size() == 2);
    CHECK(sleeps[0] == Catch::Approx(0.5));
    CHECK(sleeps[1] == Catch::Approx(1.0));
  }

  SECTION("timeouts exhaust the retry budget") {
    FakeTransport transport;
    transport.script = {HttpResponse{0, "", true}};
    ctx.transport = transport.fn();

    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::Timeout);
    CHECK(transport.calls == 4);  // first try plus max_retries
    REQUIRE(sleeps.size() == 3);
    CHECK(sleeps[2] == Catch::Approx(2.0));
    CHECK(t.error_detail.find("4 attempts") != std::string::npos);
    CHECK(t.response_text.empty());
  }

  SECTION("a throwing transport counts as transient") {
    int calls = 0;
    ctx.transport = [&](const std::string&, const std::string&, const HttpHeaders&,
                        double) -> HttpResponse {
      if (++calls < 3) throw std::runtime_error("connection reset");
      return ok_chat_response();
    };
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.ok());
    CHECK(calls == 3);
  }

  SECTION("persistent server errors report the status") {
    FakeTransport transport;
    transport.script = {HttpResponse{500, "boom", false}};
    ctx.transport = transport.fn();
    cfg.max_retries = 1;

    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::Transport);
    CHECK(transport.calls == 2);
    CHECK(t.error_detail.find("500") != std::string::npos);
  }
}

TEST_CASE("terminal failures do not retry") {
  setenv("MAPNAV_TEST_KEY", "k", 1);
  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://chat.example/v1";
  cfg.credential_env = "MAPNAV_TEST_KEY";

  ClientContext ctx = mock_context();

  SECTION("credential rejected by the server") {
    FakeTransport transport;
    transport.script = {HttpResponse{401, "no", false}};
    ctx.transport = transport.fn();
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::Auth);
    CHECK(transport.calls == 1);
  }

  SECTION("missing credential variable never reaches the wire") {
    unsetenv("MAPNAV_MISSING_KEY");
    cfg.credential_env = "MAPNAV_MISSING_KEY";
    FakeTransport transport;
    transport.script = {ok_chat_response()};
    ctx.transport = transport.fn();
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::Auth);
    CHECK(t.error_detail.find("MAPNAV_MISSING_KEY") != std::string::npos);
    CHECK(transport.calls == 0);
  }

  SECTION("non-JSON completion body") {
    FakeTransport transport;
    transport.script = {HttpResponse{200, "<html>gateway</html>", false}};
    ctx.transport = transport.fn();
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::BadResponse);
    CHECK(transport.calls == 1);
  }

  SECTION("JSON body with the wrong shape") {
    FakeTransport transport;
    transport.script = {HttpResponse{200, R"({"result": "yes"})", false}};
    ctx.transport = transport.fn();
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::BadResponse);
  }

  SECTION("unexpected client error status") {
    FakeTransport transport;
    transport.script = {HttpResponse{404, "", false}};
    ctx.transport = transport.fn();
    Transcript t = query(cfg, chalet_spec(), 0, ctx);
    CHECK(t.error == QueryError::Transport);
    CHECK(t.error_detail == "HTTP 404");
    CHECK(transport.calls == 1);
  }
}

TEST_CASE("credentials never appear in transcripts") {
  setenv("MAPNAV_TEST_KEY", "sk-super-secret-value-789", 1);
  FakeTransport transport;
  transport.script = {ok_chat_response()};

  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://chat.example/v1";
  cfg.credential_env = "MAPNAV_TEST_KEY";

  ClientContext ctx = mock_context();
  ctx.transport = transport.fn();

  Transcript t = query(cfg, chalet_spec(), 0, ctx);
  REQUIRE(t.ok());
  // the key went over the wire in a header
  CHECK(header_value(transport.last_headers, "Authorization") ==
        "Bearer sk-super-secret-value-789");
  // and nowhere else
  std::string serialized = t.to_json().dump();
  CHECK(serialized.find("sk-super-secret-value-789") == std::string::npos);
  CHECK(t.request_payload.find("sk-super-secret-value-789") == std::string::npos);
}

TEST_CASE("transcript cache round trip") {
  TempDir tmp;
  BackendConfig cfg;
  cfg.kind = BackendKind::MockOracle;
  ClientContext ctx = mock_context();
  ctx.cache_dir = tmp.str();

  Transcript first = query(cfg, chalet_spec(), 0, ctx);
  REQUIRE(first.ok());
  CHECK_FALSE(first.from_cache);

  std::string expected = transcript_cache_name(cfg, chalet_spec(), 0);
  CHECK(std::filesystem::exists(std::filesystem::path(tmp.str()) / expected));

  Transcript second = query(cfg, chalet_spec(), 0, ctx);
  CHECK(second.from_cache);
  CHECK(second.response_text == first.response_text);
  CHECK(second.prompt_hash == first.prompt_hash);
  REQUIRE(second.parsed.ok);
  CHECK(second.parsed.plan == first.parsed.plan);
  CHECK(second.to_json().dump() == first.to_json().dump());

  SECTION("trials get distinct cache slots") {
    query(cfg, chalet_spec(), 1, ctx);
    size_t files = std::distance(std::filesystem::directory_iterator(tmp.str()),
                                 std::filesystem::directory_iterator{});
    CHECK(files == 2);
  }

  SECTION("identity changes move the slot") {
    BackendConfig noisy;
    noisy.kind = BackendKind::MockNoisy;
    noisy.seed = 5;
    CHECK(transcript_cache_name(noisy, chalet_spec(), 0) != expected);
    noisy.seed = 6;
    BackendConfig noisy5 = noisy;
    noisy5.seed = 5;
    CHECK(transcript_cache_name(noisy, chalet_spec(), 0) !=
          transcript_cache_name(noisy5, chalet_spec(), 0));
  }
}

TEST_CASE("replay mode never leaves the cache") {
  TempDir tmp;
  BackendConfig cfg;
  cfg.kind = BackendKind::MockNoisy;
  cfg.seed = 11;
  cfg.p_error = 0.2;

  ClientContext warm = mock_context();
  warm.cache_dir = tmp.str();
  Transcript live = query(cfg, chalet_spec(), 0, warm);
  REQUIRE(live.ok());

  ClientContext replay = mock_context();
  replay.cache_dir = tmp.str();
  replay.mode = QueryMode::Replay;
  replay.graph = nullptr;  // replay needs no graph: nothing is recomputed

  Transcript hit = query(cfg, chalet_spec(), 0, replay);
  CHECK(hit.from_cache);
  CHECK(hit.response_text == live.response_text);

  Transcript miss = query(cfg, chalet_spec(), 3, replay);
  CHECK(miss.error == QueryError::CacheMiss);
  CHECK(miss.error_detail.find("replay") != std::string::npos);

  // the miss must not fabricate a cache entry
  size_t files = std::distance(std::filesystem::directory_iterator(tmp.str()),
                               std::filesystem::directory_iterator{});
  CHECK(files == 1);

  SECTION("replay of an http backend makes no wire calls") {
    setenv("MAPNAV_TEST_KEY", "k", 1);
    BackendConfig http;
    http.kind = BackendKind::HttpChat;
    http.endpoint = "https://chat.example/v1";
    http.credential_env = "MAPNAV_TEST_KEY";

    FakeTransport transport;
    transport.script = {ok_chat_response()};
    ClientContext first = mock_context();
    first.cache_dir = tmp.str();
    first.transport = transport.fn();
    REQUIRE(query(http, chalet_spec(), 0, first).ok());
    CHECK(transport.calls == 1);

    ClientContext offline = mock_context();
    offline.cache_dir = tmp.str();
    offline.mode = QueryMode::Replay;
    offline.transport = [](const std::string&, const std::string&, const HttpHeaders&,
                           double) -> HttpResponse {
      FAIL("replay mode must not touch the network");
      return {};
    };
    Transcript t = query(http, chalet_spec(), 0, offline);
    CHECK(t.from_cache);
    CHECK(t.parsed.ok);
  }
}

TEST_CASE("failed queries are not cached") {
  setenv("MAPNAV_TEST_KEY", "k", 1);
  TempDir tmp;
  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = "https://chat.example/v1";
  cfg.credential_env = "MAPNAV_TEST_KEY";
  cfg.max_retries = 0;

  ClientContext ctx = mock_context();
  ctx.cache_dir = tmp.str();

  FakeTransport broken;
  broken.script = {HttpResponse{500, "", false}};
  ctx.transport = broken.fn();
  CHECK(query(cfg, chalet_spec(), 0, ctx).error == QueryError::Transport);
  CHECK(std::filesystem::is_empty(tmp.str()));

  FakeTransport fixed;
  fixed.script = {ok_chat_response()};
  ctx.transport = fixed.fn();
  Transcript t = query(cfg, chalet_spec(), 0, ctx);
  CHECK(t.ok());
  CHECK_FALSE(t.from_cache);
  CHECK(fixed.calls == 1);
}

TEST_CASE("rate gate paces token consumption") {
  SECTION("bucket semantics under a manual clock") {
    RateGate gate(2.0, 1.0);
    CHECK(gate.acquire(0.0) == 0.0);
    CHECK(gate.acquire(0.0) == 0.0);
    CHECK(gate.acquire(0.0) == Catch::Approx(1.0));
    // the bucket refills while we were told to wait
    CHECK(gate.acquire(1.5) == Catch::Approx(0.5));
    CHECK(gate.acquire(30.0) == 0.0);
    CHECK(gate.acquire(30.0) == 0.0);
    CHECK(gate.acquire(30.0) == Catch::Approx(1.0));
  }

  SECTION("query sleeps for the gate's wait") {
    setenv("MAPNAV_TEST_KEY", "k", 1);
    BackendConfig cfg;
    cfg.kind = BackendKind::HttpChat;
    cfg.endpoint = "https://chat.example/v1";
    cfg.credential_env = "MAPNAV_TEST_KEY";

    FakeTransport transport;
    transport.script = {ok_chat_response()};
    RateGate gate(1.0, 2.0);
    std::vector<double> sleeps;

    ClientContext ctx = mock_context();
    ctx.transport = transport.fn();
    ctx.gate = &gate;
    ctx.now = [] { return 0.0; };
    ctx.sleeper = [&](double s) { sleeps.push_back(s); };

    CHECK(query(cfg, chalet_spec(), 0, ctx).ok());
    CHECK(sleeps.empty());
    CHECK(query(cfg, chalet_spec(), 1, ctx).ok());
    REQUIRE(sleeps.size() == 1);
    CHECK(sleeps[0] == Catch::Approx(0.5));
  }

  SECTION("degenerate gates are rejected") {
    CHECK_THROWS_AS(RateGate(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(RateGate(1.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("backend configuration is validated") {
  ClientContext ctx = mock_context();

  SECTION("http chat needs endpoint, credential and transport") {
    BackendConfig cfg;
    cfg.kind = BackendKind::HttpChat;
    CHECK_THROWS_AS(query(cfg, chalet_spec(), 0, ctx), std::invalid_argument);
    cfg.endpoint = "https://chat.example/v1";
    CHECK_THROWS_AS(query(cfg, chalet_spec(), 0, ctx), std::invalid_argument);
    cfg.credential_env = "MAPNAV_TEST_KEY";
    CHECK_THROWS_AS(query(cfg, chalet_spec(), 0, ctx), std::invalid_argument);  // no transport
  }

  SECTION("mock misconfiguration") {
    BackendConfig cfg;
    cfg.kind = BackendKind::MockScripted;
    CHECK_THROWS_AS(validate_backend(cfg), std::invalid_argument);

    cfg = BackendConfig{};
    cfg.kind = BackendKind::MockNoisy;
    cfg.p_error = 1.5;
    CHECK_THROWS_AS(validate_backend(cfg), std::invalid_argument);

    cfg = BackendConfig{};
    cfg.max_retries = -1;
    CHECK_THROWS_AS(validate_backend(cfg), std::invalid_argument);

    cfg = BackendConfig{};
    cfg.timeout_seconds = 0.0;
    CHECK_THROWS_AS(validate_backend(cfg), std::invalid_argument);
  }

  SECTION("plan-producing mocks need a graph") {
    BackendConfig cfg;
    cfg.kind = BackendKind::MockOracle;
    ClientContext bare;
    bare.sleeper = [](double) {};
    CHECK_THROWS_AS(query(cfg, chalet_spec(), 0, bare), std::invalid_argument);
  }

  SECTION("kind names round trip, dashes accepted") {
    for (BackendKind k : {BackendKind::HttpChat, BackendKind::MockOracle,
                          BackendKind::MockScripted, BackendKind::MockNoisy}) {
      CHECK(backend_kind_from_string(to_string(k)) == k);
    }
    CHECK(backend_kind_from_string("mock-noisy") == BackendKind::MockNoisy);
    CHECK_THROWS_AS(backend_kind_from_string("telepathy"), std::invalid_argument);
  }

  SECTION("identities separate configurations") {
    BackendConfig a;
    a.kind = BackendKind::MockNoisy;
    a.seed = 1;
    a.p_error = 0.1;
    BackendConfig b = a;
    b.seed = 2;
    BackendConfig c = a;
    c.p_error = 0.2;
    CHECK(a.identity() != b.identity());
    CHECK(a.identity() != c.identity());
    CHECK(a.identity() == BackendConfig{a}.identity());
  }
}

// Opt-in smoke test against a real endpoint; hidden so normal runs stay
// offline. Supply MAPNAV_LIVE_ENDPOINT, MAPNAV_LIVE_MODEL and a key in the
// variable named by MAPNAV_LIVE_KEY_ENV, then run the test binary with the
// [.live] tag.
TEST_CASE("live endpoint smoke test", "[.live]") {
  const char* endpoint = std::getenv("MAPNAV_LIVE_ENDPOINT");
  const char* model = std::getenv("MAPNAV_LIVE_MODEL");
  if (endpoint == nullptr || model == nullptr) {
    SKIP("MAPNAV_LIVE_ENDPOINT / MAPNAV_LIVE_MODEL not set");
  }
  const char* key_env = std::getenv("MAPNAV_LIVE_KEY_ENV");
  const char* wire = std::getenv("MAPNAV_LIVE_WIRE");

  BackendConfig cfg;
  cfg.kind = BackendKind::HttpChat;
  cfg.endpoint = endpoint;
  cfg.model = model;
  cfg.credential_env = key_env ? key_env : "MAPNAV_API_KEY";
  if (wire && std::string(wire) == "messages_with_image") {
    cfg.wire = WireFormat::MessagesWithImage;
  }

  ClientContext ctx = mock_context();
  ctx.transport = [](const std::string& url, const std::string& payload,
                     const HttpHeaders& headers, double timeout) -> HttpResponse {
    // minimal curl-based transport; avoids linking TLS into the test binary
    TempDir tmp;
    std::string body_file = tmp.file("body.json");
    std::string out_file = tmp.file("response.json");
    write_file(body_file, payload);
    std::string cmd = "curl -sS -o " + shell_quote(out_file) + " -w '%{http_code}' -X POST";
    for (const auto& [k, v] : headers) cmd += " -H " + shell_quote(k + ": " + v);
    cmd += " --max-time " + std::to_string(static_cast<int>(timeout));
    cmd += " --data-binary @" + shell_quote(body_file) + " " + shell_quote(url);
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char status_buf[16] = {0};
    size_t got = fread(status_buf, 1, sizeof(status_buf) - 1, pipe);
    int rc = pclose(pipe);
    HttpResponse resp;
    resp.status = got > 0 ? std::atoi(status_buf) : 0;
    resp.timed_out = rc != 0 && resp.status == 0;
    if (std::filesystem::exists(out_file)) resp.body = read_file(out_file);
    return resp;
  };

  PromptSpec spec = chalet_spec();
  Transcript t = query(cfg, spec, 0, ctx);
  INFO(t.error_detail);
  REQUIRE(t.ok());
  CHECK_FALSE(t.response_text.empty());
  ParseResult pr = parse_plan_json(t.response_text);
  INFO(t.response_text);
  CHECK(pr.ok);  // a conforming model answers with a JSON plan
}

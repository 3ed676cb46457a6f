// Command line front end for the floor plan navigation toolkit. Every
// subcommand prints machine-readable JSON on stdout (diagnostics go to
// stderr) and exits 0 on success, 1 when the domain answer is negative (an
// invalid map, a wrong plan, a failed simulation, a failed query), and 2 on
// usage or input errors.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mapnav/bench.hpp"
#include "mapnav/cli_dispatch.hpp"
#include "mapnav/executor.hpp"
#include "mapnav/http_transport.hpp"
#include "mapnav/report.hpp"

namespace {

using namespace mapnav;

bool g_pretty = false;
int g_exit = 0;

void emit(const Json& j) { std::cout << (g_pretty ? j.dump(2) : j.dump()) << "\n"; }

std::string normalize_choice(std::string s) {
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

Profile parse_profile(const std::string& s) {
  std::string k = normalize_choice(s);
  if (k == "strict") return Profile::Strict;
  if (k == "extended") return Profile::Extended;
  throw std::invalid_argument("unknown profile: " + s);
}

WireFormat parse_wire(const std::string& s) {
  std::string k = normalize_choice(s);
  if (k == "content_parts") return WireFormat::ContentParts;
  if (k == "messages_with_image") return WireFormat::MessagesWithImage;
  throw std::invalid_argument("unknown wire format: " + s);
}

std::string read_text_or_stdin(const std::string& path) {
  if (!path.empty()) return read_file(path);
  std::ostringstream buf;
  buf << std::cin.rdbuf();
  return buf.str();
}

ParseResult parse_plan_text(const std::string& text, const std::string& format,
                            Profile profile) {
  std::string fmt = format;
  if (fmt == "auto") {
    size_t first = text.find_first_not_of(" \t\r\n");
    char c = first == std::string::npos ? '\0' : text[first];
    fmt = (c == '{' || c == '[') ? "json" : "lines";
  }
  if (fmt == "json") return parse_plan_json(text, profile);
  if (fmt == "lines") return parse_plan_lines(text, profile);
  throw std::invalid_argument("unknown plan format: " + format);
}

// resolution that always satisfies the rasterizer preconditions
double auto_resolution(const FloorPlan& fp) {
  double res = fp.wall_thickness;
  for (const Door& d : fp.doors) res = std::min(res, d.width / 2.0);
  return res;
}

DoorStates door_overrides(const std::vector<std::string>& open,
                          const std::vector<std::string>& closed) {
  DoorStates ds;
  for (const std::string& id : open) ds.set(id, true);
  for (const std::string& id : closed) ds.set(id, false);
  return ds;
}

Json graph_to_json(const ConnectivityGraph& g) {
  Json j;
  j["rooms"] = g.rooms;
  j["edges"] = Json::array();
  for (const GraphEdge& e : g.edges) {
    j["edges"].push_back({{"door", e.door_id},
                          {"a", g.rooms[static_cast<size_t>(e.a)]},
                          {"b", g.rooms[static_cast<size_t>(e.b)]},
                          {"open_by_default", e.open_by_default}});
  }
  return j;
}

std::vector<double> read_sample_file(const std::string& path) {
  std::string text = read_file(path);
  std::vector<double> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("not a number in " + path + ": " + token);
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (out.empty()) throw std::invalid_argument("no numeric values in " + path);
  return out;
}

struct BackendFlags {
  std::string kind = "mock_oracle";
  std::string endpoint;
  std::string model;
  std::string credential_env;
  std::string wire = "content_parts";
  std::string script;
  double temperature = 0.0;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  uint64_t seed = 0;
  double p_error = 0.0;

  void attach(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--backend", kind, "backend kind: http-chat, mock-oracle, mock-scripted, mock-noisy");
    cmd->add_option("--endpoint", endpoint, "chat completion URL (http backend)");
    cmd->add_option("--model", model, "model name sent in the request");
    cmd->add_option("--credential-env", credential_env,
                    "environment variable holding the API key");
    cmd->add_option("--wire", wire, "request shape: content-parts or messages-with-image");
    cmd->add_option("--script", script, "JSON array of canned responses (scripted mock)");
    cmd->add_option("--temperature", temperature, "sampling temperature");
    cmd->add_option("--timeout", timeout_seconds, "per request timeout in seconds");
    cmd->add_option("--retries", max_retries, "retry budget for transient failures");
    if (with_seed) cmd->add_option("--seed", seed, "random seed (noisy mock)");
    cmd->add_option("--p-error", p_error, "corruption probability (noisy mock)");
  }

  BackendConfig build() const {
    BackendConfig cfg;
    cfg.kind = backend_kind_from_string(kind);
    cfg.endpoint = endpoint;
    cfg.model = model;
    cfg.credential_env = credential_env;
    cfg.wire = parse_wire(wire);
    cfg.script_path = script;
    cfg.temperature = temperature;
    cfg.timeout_seconds = timeout_seconds;
    cfg.max_retries = max_retries;
    cfg.seed = seed;
    cfg.p_error = p_error;
    return cfg;
  }
};

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"floor plan navigation toolkit"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  app.add_flag("--pretty", g_pretty, "indent JSON output");
  bool show_dispatch = false;
  app.add_flag("--dispatch-table", show_dispatch,
               "print the operation to subcommand mapping and exit")
      ->group("");

  // map validate
  auto* map_cmd = app.add_subcommand("map", "floor plan file checks");
  auto* validate_cmd = map_cmd->add_subcommand("validate", "parse and validate a map file");
  struct {
    std::string map;
    bool lenient = false;
  } val;
  validate_cmd->add_option("--map", val.map, "floor plan JSON file")->required();
  validate_cmd->add_flag("--lenient", val.lenient, "tolerate recoverable issues, reporting them");
  validate_cmd->callback([&] {
    std::vector<std::string> warnings;
    try {
      FloorPlan fp = load_floorplan(val.map, val.lenient ? LoadMode::Lenient : LoadMode::Strict,
                                    &warnings);
      emit({{"valid", true},
            {"rooms", fp.rooms.size()},
            {"doors", fp.doors.size()},
            {"labels", fp.labels.size()},
            {"warnings", warnings}});
    } catch (const MapError& e) {
      emit({{"valid", false}, {"error", e.what()}});
      std::cerr << e.what() << "\n";
      g_exit = 1;
    }
  });

  // graph
  auto* graph_cmd = app.add_subcommand("graph", "print the room connectivity graph");
  struct {
    std::string map;
  } gr;
  graph_cmd->add_option("--map", gr.map, "floor plan JSON file")->required();
  graph_cmd->callback([&] {
    FloorPlan fp = load_floorplan(gr.map);
    emit(graph_to_json(build_connectivity(fp)));
  });

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "shortest valid plan between two rooms");
  struct {
    std::string map, start, goal;
    std::string format = "lines";
  } orc;
  oracle_cmd->add_option("--map", orc.map, "floor plan JSON file")->required();
  oracle_cmd->add_option("--start", orc.start, "start room name or id")->required();
  oracle_cmd->add_option("--goal", orc.goal, "goal room name or id")->required();
  oracle_cmd->add_option("--format", orc.format, "output format: lines or json");
  oracle_cmd->callback([&] {
    FloorPlan fp = load_floorplan(orc.map);
    ConnectivityGraph g = build_connectivity(fp);
    NavTask task{"", orc.start, orc.goal, Difficulty::Hard};
    try {
      Plan plan = oracle_plan(g, task);
      if (orc.format == "json") {
        std::cout << serialize_plan(plan, PlanFormat::Json) << "\n";
      } else if (orc.format == "lines") {
        std::cout << serialize_plan(plan, PlanFormat::Lines);
      } else {
        throw std::invalid_argument("unknown format: " + orc.format);
      }
    } catch (const NoPathError& e) {
      emit({{"error", e.what()}});
      std::cerr << e.what() << "\n";
      g_exit = 1;
    }
  });

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "difficulty class of a task");
  struct {
    std::string map, start, goal;
  } cls;
  classify_cmd->add_option("--map", cls.map, "floor plan JSON file")->required();
  classify_cmd->add_option("--start", cls.start, "start room name or id")->required();
  classify_cmd->add_option("--goal", cls.goal, "goal room name or id")->required();
  classify_cmd->callback([&] {
    FloorPlan fp = load_floorplan(cls.map);
    ConnectivityGraph g = build_connectivity(fp);
    NavTask task{"", cls.start, cls.goal, Difficulty::Hard};
    auto hops = room_hop_distance(g, cls.start, cls.goal);
    Json j;
    j["class"] = to_string(classify_task(g, task));
    j["hops"] = hops ? Json(*hops) : Json();
    emit(j);
  });

  // transform double / transform relabel
  auto* transform_cmd = app.add_subcommand("transform", "derive a new map from an existing one");
  struct {
    std::string map, out, scheme;
  } tf;
  auto* double_cmd = transform_cmd->add_subcommand("double", "mirror the map and bridge the copies");
  double_cmd->add_option("--map", tf.map, "floor plan JSON file")->required();
  double_cmd->add_option("--out", tf.out, "write the derived map here instead of stdout");
  auto* relabel_cmd = transform_cmd->add_subcommand("relabel", "replace the label set");
  relabel_cmd->add_option("--map", tf.map, "floor plan JSON file")->required();
  relabel_cmd->add_option("--scheme", tf.scheme, "labeling scheme: sparse or dense")->required();
  relabel_cmd->add_option("--out", tf.out, "write the derived map here instead of stdout");
  auto run_transform = [&](bool doubled) {
    FloorPlan fp = load_floorplan(tf.map);
    FloorPlan out;
    if (doubled) {
      out = double_map(fp);
    } else {
      auto scheme = label_scheme_from_string(tf.scheme);
      if (!scheme) throw std::invalid_argument("unknown labeling scheme: " + tf.scheme);
      out = apply_labeling(fp, *scheme);
    }
    if (tf.out.empty()) {
      std::cout << floorplan_to_json(out).dump(g_pretty ? 2 : -1) << "\n";
    } else {
      save_floorplan(out, tf.out);
      emit({{"path", tf.out},
            {"rooms", out.rooms.size()},
            {"doors", out.doors.size()},
            {"labels", out.labels.size()}});
    }
  };
  double_cmd->callback([&] { run_transform(true); });
  relabel_cmd->callback([&] { run_transform(false); });

  // rasterize
  auto* raster_cmd = app.add_subcommand("rasterize", "build the occupancy grid");
  struct {
    std::string map, out;
    double resolution = 0.0;
  } ras;
  raster_cmd->add_option("--map", ras.map, "floor plan JSON file")->required();
  raster_cmd->add_option("--resolution", ras.resolution,
                         "cell edge length in world units (default: derived from the map)");
  raster_cmd->add_option("--out", ras.out, "write the grid as a PGM image");
  raster_cmd->callback([&] {
    FloorPlan fp = load_floorplan(ras.map);
    double res = ras.resolution > 0 ? ras.resolution : auto_resolution(fp);
    OccupancyGrid grid = rasterize(fp, res);
    int free_cells = 0;
    int door_cells = 0;
    int wall_cells = 0;
    for (int r = 0; r < grid.height; ++r) {
      for (int c = 0; c < grid.width; ++c) {
        switch (grid.at(r, c)) {
          case CellType::Free: ++free_cells; break;
          case CellType::Door: ++door_cells; break;
          case CellType::Wall: ++wall_cells; break;
        }
      }
    }
    Json j;
    j["width"] = grid.width;
    j["height"] = grid.height;
    j["resolution"] = res;
    j["free_cells"] = free_cells;
    j["door_cells"] = door_cells;
    j["wall_cells"] = wall_cells;
    if (!ras.out.empty()) {
      write_pgm(grid, ras.out);
      j["path"] = ras.out;
    }
    emit(j);
  });

  // render
  auto* render_cmd = app.add_subcommand("render", "draw the map as a PNG");
  struct {
    std::string map, out;
    double scale = 16.0;
    bool no_text = false;
  } ren;
  render_cmd->add_option("--map", ren.map, "floor plan JSON file")->required();
  render_cmd->add_option("--out", ren.out, "output PNG path")->required();
  render_cmd->add_option("--scale", ren.scale, "pixels per world unit");
  render_cmd->add_flag("--no-text", ren.no_text, "omit room names, door ids and labels");
  render_cmd->callback([&] {
    FloorPlan fp = load_floorplan(ren.map);
    RenderOptions opts;
    opts.scale = ren.scale;
    if (ren.no_text) {
      opts.draw_room_names = false;
      opts.draw_door_ids = false;
      opts.draw_labels = false;
    }
    Image img = render_floorplan(fp, opts);
    write_png(img, ren.out);
    emit({{"path", ren.out}, {"width", img.width}, {"height", img.height}});
  });

  // prompt
  auto* prompt_cmd = app.add_subcommand("prompt", "build the model prompt for a task");
  struct {
    std::string map, start, goal, image;
    std::string template_name = "instructional";
    std::string profile = "strict";
    bool ask_connections = false;
    bool no_image = false;
  } pr;
  prompt_cmd->add_option("--map", pr.map, "floor plan JSON file")->required();
  prompt_cmd->add_option("--start", pr.start, "start room name or id")->required();
  prompt_cmd->add_option("--goal", pr.goal, "goal room name or id")->required();
  prompt_cmd->add_option("--template", pr.template_name,
                         "prompt template: instructional or draft-persona");
  prompt_cmd->add_option("--profile", pr.profile, "action profile: strict or extended");
  prompt_cmd->add_flag("--ask-connections", pr.ask_connections,
                       "ask the model to list the door connections first");
  prompt_cmd->add_option("--image", pr.image, "attach this PNG instead of rendering the map");
  prompt_cmd->add_flag("--no-image", pr.no_image, "build a text-only prompt");
  prompt_cmd->callback([&] {
    FloorPlan fp = load_floorplan(pr.map);
    PromptSpec spec;
    spec.template_id = template_from_string(normalize_choice(pr.template_name));
    spec.start_room = pr.start;
    spec.goal_room = pr.goal;
    spec.profile = parse_profile(pr.profile);
    spec.ask_connections = pr.ask_connections;
    if (!pr.no_image) {
      if (!pr.image.empty()) {
        spec.image_path = pr.image;
      } else {
        spec.image_bytes = png_bytes(render_floorplan(fp));
      }
    }
    RenderedPrompt rendered = build_prompt(spec);
    emit({{"template", to_string(spec.template_id)},
          {"text", rendered.text},
          {"image_bytes", rendered.image_bytes.size()},
          {"hash", prompt_hash(spec)}});
  });

  // query
  auto* query_cmd = app.add_subcommand("query", "ask a backend for a plan");
  struct {
    std::string map, start, goal, image, cache_dir;
    std::string template_name = "instructional";
    std::string profile = "strict";
    bool ask_connections = false;
    bool no_image = false;
    bool replay = false;
    int trial = 0;
  } qy;
  BackendFlags qy_backend;
  query_cmd->add_option("--map", qy.map, "floor plan JSON file")->required();
  query_cmd->add_option("--start", qy.start, "start room name or id")->required();
  query_cmd->add_option("--goal", qy.goal, "goal room name or id")->required();
  query_cmd->add_option("--template", qy.template_name,
                        "prompt template: instructional or draft-persona");
  query_cmd->add_option("--profile", qy.profile, "action profile: strict or extended");
  query_cmd->add_flag("--ask-connections", qy.ask_connections,
                      "ask the model to list the door connections first");
  query_cmd->add_option("--image", qy.image, "attach this PNG instead of rendering the map");
  query_cmd->add_flag("--no-image", qy.no_image, "send a text-only prompt");
  query_cmd->add_option("--cache-dir", qy.cache_dir, "transcript cache directory");
  query_cmd->add_flag("--replay", qy.replay, "answer from the cache only, never the network");
  query_cmd->add_option("--trial", qy.trial, "trial index for repeated sampling");
  qy_backend.attach(query_cmd);
  query_cmd->callback([&] {
    FloorPlan fp = load_floorplan(qy.map);
    ConnectivityGraph g = build_connectivity(fp);

    PromptSpec spec;
    spec.template_id = template_from_string(normalize_choice(qy.template_name));
    spec.start_room = qy.start;
    spec.goal_room = qy.goal;
    spec.profile = parse_profile(qy.profile);
    spec.ask_connections = qy.ask_connections;
    if (!qy.no_image) {
      if (!qy.image.empty()) {
        spec.image_path = qy.image;
      } else {
        spec.image_bytes = png_bytes(render_floorplan(fp));
      }
    }

    BackendConfig backend = qy_backend.build();
    ClientContext ctx;
    ctx.graph = &g;
    ctx.profile = spec.profile;
    ctx.cache_dir = qy.cache_dir;
    ctx.mode = qy.replay ? QueryMode::Replay : QueryMode::Normal;
    if (backend.kind == BackendKind::HttpChat) ctx.transport = make_http_transport();

    Transcript t = query(backend, spec, qy.trial, ctx);
    Json j = t.to_json();
    j["from_cache"] = t.from_cache;
    j["parsed"] = Json{{"ok", t.parsed.ok}};
    if (t.ok()) {
      if (t.parsed.ok) {
        NavTask task{"", qy.start, qy.goal, Difficulty::Hard};
        j["verdict"] = verdict_to_json(validate_plan(g, task, t.parsed.plan));
      } else {
        j["verdict"] = verdict_to_json(t.parsed.verdict);
      }
    }
    emit(j);
    if (!t.ok()) {
      std::cerr << "query failed: " << to_string(t.error) << " " << t.error_detail << "\n";
      g_exit = 1;
    }
  });

  // validate-plan
  auto* vplan_cmd = app.add_subcommand("validate-plan", "check a plan against the graph");
  struct {
    std::string map, start, goal, plan;
    std::string format = "auto";
    std::string profile = "strict";
    bool pedantic = false;
    std::vector<std::string> open, closed;
  } vp;
  vplan_cmd->add_option("--map", vp.map, "floor plan JSON file")->required();
  vplan_cmd->add_option("--start", vp.start, "start room name or id")->required();
  vplan_cmd->add_option("--goal", vp.goal, "goal room name or id")->required();
  vplan_cmd->add_option("--plan", vp.plan, "plan file (stdin when omitted)");
  vplan_cmd->add_option("--plan-format", vp.format, "plan input format: auto, json or lines");
  vplan_cmd->add_option("--profile", vp.profile, "action profile: strict or extended");
  vplan_cmd->add_flag("--pedantic", vp.pedantic, "require ApproachDoor before each door use");
  vplan_cmd->add_option("--open", vp.open, "door id forced open at the start (repeatable)");
  vplan_cmd->add_option("--closed", vp.closed, "door id forced closed at the start (repeatable)");
  vplan_cmd->callback([&] {
    FloorPlan fp = load_floorplan(vp.map);
    ConnectivityGraph g = build_connectivity(fp);
    NavTask task{"", vp.start, vp.goal, Difficulty::Hard};
    ParseResult pr2 = parse_plan_text(read_text_or_stdin(vp.plan), vp.format,
                                      parse_profile(vp.profile));
    Verdict v;
    if (!pr2.ok) {
      v = pr2.verdict;
    } else {
      ValidateOptions opts;
      opts.pedantic = vp.pedantic;
      v = validate_plan(g, task, pr2.plan, door_overrides(vp.open, vp.closed), opts);
    }
    Json j = verdict_to_json(v);
    j["correct"] = v.correct();
    emit(j);
    if (!v.correct()) g_exit = 1;
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "execute a plan on the occupancy grid");
  struct {
    std::string map, start, goal, plan, pgm;
    std::string format = "auto";
    std::string profile = "strict";
    double resolution = 0.0;
    std::vector<std::string> open, closed;
  } sim;
  sim_cmd->add_option("--map", sim.map, "floor plan JSON file")->required();
  sim_cmd->add_option("--start", sim.start, "start room name or id")->required();
  sim_cmd->add_option("--goal", sim.goal, "goal room name or id")->required();
  sim_cmd->add_option("--plan", sim.plan, "plan file (stdin when omitted)");
  sim_cmd->add_option("--plan-format", sim.format, "plan input format: auto, json or lines");
  sim_cmd->add_option("--profile", sim.profile, "action profile: strict or extended");
  sim_cmd->add_option("--resolution", sim.resolution,
                      "grid cell size (default: derived from the map)");
  sim_cmd->add_option("--open", sim.open, "door id forced open at the start (repeatable)");
  sim_cmd->add_option("--closed", sim.closed, "door id forced closed at the start (repeatable)");
  sim_cmd->add_option("--pgm", sim.pgm, "also write the grid as a PGM image");
  sim_cmd->callback([&] {
    FloorPlan fp = load_floorplan(sim.map);
    double res = sim.resolution > 0 ? sim.resolution : auto_resolution(fp);
    OccupancyGrid grid = rasterize(fp, res);
    if (!sim.pgm.empty()) write_pgm(grid, sim.pgm);
    NavTask task{"", sim.start, sim.goal, Difficulty::Hard};
    ParseResult pr2 = parse_plan_text(read_text_or_stdin(sim.plan), sim.format,
                                      parse_profile(sim.profile));
    if (!pr2.ok) {
      Json j = verdict_to_json(pr2.verdict);
      j["success"] = false;
      emit(j);
      g_exit = 1;
      return;
    }
    ExecutionLog log = execute_plan(fp, grid, task, pr2.plan,
                                    door_overrides(sim.open, sim.closed));
    emit(execution_log_to_json(log));
    if (!log.success) g_exit = 1;
  });

  // bench run / bench report
  auto* bench_cmd = app.add_subcommand("bench", "batched experiments over task samples");
  auto* bench_run = bench_cmd->add_subcommand("run", "run or resume a trial matrix");
  struct {
    std::vector<std::string> maps;
    std::string arms = "plain";
    std::string difficulty = "hard";
    std::string records, cache_dir;
    std::string template_name = "instructional";
    std::string profile = "strict";
    int tasks = 5;
    int trials = 10;
    uint64_t seed = 0;
    bool ask_connections = false;
    bool replay = false;
  } br;
  BackendFlags br_backend;
  bench_run->add_option("--map", br.maps, "floor plan JSON file (repeatable)")->required();
  bench_run->add_option("--arms", br.arms,
                        "plain: the maps as given; standard: original, doubled, sparse and "
                        "dense arms per map plus an easy pass on the doubled arm");
  bench_run->add_option("--difficulty", br.difficulty, "task filter: easy, hard or any");
  bench_run->add_option("--tasks", br.tasks, "tasks sampled per map");
  bench_run->add_option("--trials", br.trials, "trials per task");
  bench_run->add_option("--seed", br.seed, "sampling seed");
  bench_run->add_option("--records", br.records, "JSONL record file (enables resume)")
      ->required();
  bench_run->add_option("--cache-dir", br.cache_dir, "transcript cache directory");
  bench_run->add_option("--template", br.template_name,
                        "prompt template: instructional or draft-persona");
  bench_run->add_option("--profile", br.profile, "action profile: strict or extended");
  bench_run->add_flag("--ask-connections", br.ask_connections,
                      "ask the model to list the door connections first");
  bench_run->add_flag("--replay", br.replay, "answer from the cache only, never the network");
  br_backend.attach(bench_run, /*with_seed=*/false);
  bench_run->callback([&] {
    // a single seed drives both the task sampler and the noisy mock
    br_backend.seed = br.seed;
    ExperimentConfig cfg;
    cfg.tasks_per_map = br.tasks;
    cfg.trials_per_task = br.trials;
    cfg.difficulty = task_filter_from_string(br.difficulty);
    cfg.backend = br_backend.build();
    cfg.profile = parse_profile(br.profile);
    cfg.template_id = template_from_string(normalize_choice(br.template_name));
    cfg.ask_connections = br.ask_connections;
    cfg.seed = br.seed;
    cfg.records_path = br.records;
    cfg.cache_dir = br.cache_dir;

    ClientContext ctx;
    ctx.mode = br.replay ? QueryMode::Replay : QueryMode::Normal;
    if (cfg.backend.kind == BackendKind::HttpChat) ctx.transport = make_http_transport();

    std::vector<TrialRecord> records;
    if (br.arms == "plain") {
      for (const std::string& path : br.maps) cfg.maps.push_back({path, false, std::nullopt});
      records = run_experiment(cfg, ctx);
    } else if (br.arms == "standard") {
      for (const std::string& path : br.maps) {
        cfg.maps.push_back({path, false, std::nullopt});
        cfg.maps.push_back({path, true, std::nullopt});
        cfg.maps.push_back({path, false, LabelScheme::Sparse});
        cfg.maps.push_back({path, false, LabelScheme::Dense});
      }
      run_experiment(cfg, ctx);
      ExperimentConfig easy = cfg;
      easy.maps.clear();
      for (const std::string& path : br.maps) easy.maps.push_back({path, true, std::nullopt});
      easy.difficulty = TaskFilter::Easy;
      records = run_experiment(easy, ctx);
    } else {
      throw std::invalid_argument("unknown arms layout: " + br.arms);
    }

    RateSummary s = success_summary(records);
    int infrastructure = 0;
    for (const TrialRecord& r : records) infrastructure += r.infrastructure ? 1 : 0;
    emit({{"records_path", br.records},
          {"records", records.size()},
          {"answered", s.answered},
          {"correct", s.correct},
          {"rate", s.answered ? Json(s.rate()) : Json()},
          {"infrastructure_failures", infrastructure}});
  });

  auto* bench_report = bench_cmd->add_subcommand("report", "hypothesis tests over recorded trials");
  struct {
    std::string records, out;
  } rp;
  bench_report->add_option("--records", rp.records, "JSONL record file")->required();
  bench_report->add_option("--out", rp.out, "directory for report.json, report.csv and charts")
      ->required();
  bench_report->callback([&] {
    if (!std::filesystem::exists(rp.records)) {
      throw std::runtime_error("cannot open records file " + rp.records);
    }
    std::vector<TrialRecord> records = load_records(rp.records);
    std::vector<HypothesisResult> hs = write_report(records, rp.out);
    emit(report_to_json(hs, records.size()));
  });

  // stats ttest
  auto* stats_cmd = app.add_subcommand("stats", "statistical helpers");
  auto* ttest_cmd = stats_cmd->add_subcommand("ttest", "Welch's t test on two sample files");
  struct {
    std::string a, b;
  } tt;
  ttest_cmd->add_option("--a", tt.a, "first sample, one number per line")->required();
  ttest_cmd->add_option("--b", tt.b, "second sample, one number per line")->required();
  ttest_cmd->callback([&] {
    std::vector<double> a = read_sample_file(tt.a);
    std::vector<double> b = read_sample_file(tt.b);
    WelchResult w = welch_t_test(a, b);
    emit({{"t", w.t},
          {"dof", w.dof},
          {"p", w.p},
          {"mean_a", w.mean_a},
          {"mean_b", w.mean_b},
          {"n_a", a.size()},
          {"n_b", b.size()},
          {"significant_at_0p05", w.p < 0.05}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (show_dispatch) {
    emit(cli::dispatch_table_json());
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  return g_exit;
}

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

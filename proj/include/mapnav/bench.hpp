#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "mapnav/client.hpp"
#include "mapnav/render.hpp"
#include "mapnav/transforms.hpp"
#include "mapnav/validate.hpp"

namespace mapnav {

// One experiment arm: a floor plan file plus the transforms applied to it
// before any task is sampled.
struct MapSpec {
  std::string path;
  bool doubled = false;
  std::optional<LabelScheme> relabel;
};

enum class TaskFilter { Easy, Hard, Any };

inline const char* to_string(TaskFilter f) {
  switch (f) {
    case TaskFilter::Easy: return "easy";
    case TaskFilter::Hard: return "hard";
    case TaskFilter::Any: return "any";
  }
  return "any";
}

inline TaskFilter task_filter_from_string(std::string_view s) {
  if (s == "easy") return TaskFilter::Easy;
  if (s == "hard") return TaskFilter::Hard;
  if (s == "any") return TaskFilter::Any;
  throw std::invalid_argument("unknown difficulty filter: " + std::string(s));
}

struct ExperimentConfig {
  std::vector<MapSpec> maps;
  int tasks_per_map = 5;
  int trials_per_task = 10;
  TaskFilter difficulty = TaskFilter::Hard;
  BackendConfig backend;
  Profile profile = Profile::Strict;
  TemplateId template_id = TemplateId::Instructional;
  bool ask_connections = false;
  uint64_t seed = 0;
  std::string records_path;  // JSONL, appended as trials finish; enables resume
  std::string cache_dir;
};

struct TrialRecord {
  std::string map_id;       // base id plus transform suffixes
  std::string base_map_id;  // pairs transformed arms with their original
  std::vector<std::string> tags;  // subset of {doubled, sparse, dense}
  std::string start_room;
  std::string goal_room;
  std::string task_class;
  int trial_index = 0;
  std::string transcript_ref;  // cache file name when caching was on
  std::string outcome;
  bool correct = false;
  int plan_length = -1;  // -1 when no plan could be parsed
  bool minimal = false;  // correct with as few actions as the shortest route
  bool infrastructure = false;  // query failed before the model answered

  bool has_tag(std::string_view t) const {
    for (const std::string& tag : tags) {
      if (tag == t) return true;
    }
    return false;
  }
};

inline Json trial_record_to_json(const TrialRecord& r) {
  Json j;
  j["map_id"] = r.map_id;
  j["base_map_id"] = r.base_map_id;
  j["tags"] = r.tags;
  j["start_room"] = r.start_room;
  j["goal_room"] = r.goal_room;
  j["task_class"] = r.task_class;
  j["trial_index"] = r.trial_index;
  j["transcript_ref"] = r.transcript_ref;
  j["outcome"] = r.outcome;
  j["correct"] = r.correct;
  j["plan_length"] = r.plan_length;
  j["minimal"] = r.minimal;
  j["infrastructure"] = r.infrastructure;
  return j;
}

inline TrialRecord trial_record_from_json(const Json& j) {
  TrialRecord r;
  r.map_id = j.at("map_id").get<std::string>();
  r.base_map_id = j.at("base_map_id").get<std::string>();
  r.tags = j.value("tags", std::vector<std::string>{});
  r.start_room = j.at("start_room").get<std::string>();
  r.goal_room = j.at("goal_room").get<std::string>();
  r.task_class = j.value("task_class", "other");
  r.trial_index = j.at("trial_index").get<int>();
  r.transcript_ref = j.value("transcript_ref", "");
  r.outcome = j.value("outcome", "");
  r.correct = j.value("correct", false);
  r.plan_length = j.value("plan_length", -1);
  r.minimal = j.value("minimal", false);
  r.infrastructure = j.value("infrastructure", false);
  return r;
}

inline std::vector<TrialRecord> load_records(const std::string& path) {
  std::vector<TrialRecord> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(trial_record_from_json(Json::parse(line)));
  }
  return out;
}

// Deterministically draws n start/goal pairs matching the filter. Qualifying
// pairs are enumerated in lexicographic room order, then a seeded partial
// shuffle picks the prefix, so equal seeds reproduce equal task lists.
inline std::vector<NavTask> sample_tasks(const ConnectivityGraph& g, int n, TaskFilter filter,
                                         uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("task count must be positive");
  std::vector<NavTask> pool;
  for (size_t i = 0; i < g.rooms.size(); ++i) {
    for (size_t j = 0; j < g.rooms.size(); ++j) {
      if (i == j) continue;
      auto hops = room_hop_distance(g, g.rooms[i], g.rooms[j]);
      if (!hops) continue;
      bool keep = false;
      switch (filter) {
        case TaskFilter::Easy: keep = *hops == 1; break;
        case TaskFilter::Hard: keep = *hops == 3; break;
        case TaskFilter::Any: keep = *hops >= 1; break;
      }
      if (!keep) continue;
      NavTask t;
      t.start_room = g.rooms[i];
      t.goal_room = g.rooms[j];
      t.difficulty = *hops == 1 ? Difficulty::Easy : Difficulty::Hard;
      pool.push_back(std::move(t));
    }
  }
  if (static_cast<size_t>(n) > pool.size()) {
    throw std::invalid_argument("requested " + std::to_string(n) + " tasks but only " +
                                std::to_string(pool.size()) + " pairs match filter '" +
                                to_string(filter) + "'");
  }
  for (size_t k = 0; k < static_cast<size_t>(n); ++k) {
    size_t pick = k + detail::uniform_below(mix64(seed, k), pool.size() - k);
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(static_cast<size_t>(n));
  return pool;
}

namespace detail {

struct PreparedMap {
  FloorPlan fp;
  std::string map_id;
  std::string base_map_id;
  std::vector<std::string> tags;
};

inline PreparedMap prepare_map(const MapSpec& spec) {
  PreparedMap m;
  m.fp = load_floorplan(spec.path);
  m.base_map_id = std::filesystem::path(spec.path).stem().string();
  m.map_id = m.base_map_id;
  if (spec.doubled) {
    m.fp = double_map(m.fp);
    m.map_id += ":doubled";
    m.tags.emplace_back("doubled");
  }
  if (spec.relabel) {
    m.fp = apply_labeling(m.fp, *spec.relabel);
    m.map_id += std::string(":") + to_string(*spec.relabel);
    m.tags.emplace_back(to_string(*spec.relabel));
  }
  return m;
}

}  // namespace detail

// Runs (or resumes) the full trial matrix. Every finished trial is appended
// to the records file immediately, and rows already present there are not
// queried again, so an interrupted run picks up where it stopped. Returns
// all records, resumed and fresh.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& config,
                                               ClientContext ctx) {
  validate_backend(config.backend);
  if (!config.cache_dir.empty()) ctx.cache_dir = config.cache_dir;

  std::vector<TrialRecord> records;
  std::set<std::tuple<std::string, std::string, std::string, int>> done;
  if (!config.records_path.empty()) {
    records = load_records(config.records_path);
    for (const TrialRecord& r : records) {
      done.emplace(r.map_id, r.start_room, r.goal_room, r.trial_index);
    }
  }
  std::ofstream sink;
  if (!config.records_path.empty()) {
    std::filesystem::path parent = std::filesystem::path(config.records_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    sink.open(config.records_path, std::ios::app);
    if (!sink) throw std::runtime_error("cannot open records file " + config.records_path);
  }

  for (const MapSpec& map_spec : config.maps) {
    detail::PreparedMap map = detail::prepare_map(map_spec);
    ConnectivityGraph graph = build_connectivity(map.fp);
    ctx.graph = &graph;

    std::string png = png_bytes(render_floorplan(map.fp));
    uint64_t map_seed = mix64(config.seed, fnv1a64(map.map_id));
    std::vector<NavTask> tasks =
        sample_tasks(graph, config.tasks_per_map, config.difficulty, map_seed);

    for (NavTask& task : tasks) {
      task.map_id = map.map_id;
      Plan oracle = oracle_plan(graph, task);

      PromptSpec spec;
      spec.template_id = config.template_id;
      spec.start_room = task.start_room;
      spec.goal_room = task.goal_room;
      spec.profile = config.profile;
      spec.ask_connections = config.ask_connections;
      spec.image_bytes = png;

      for (int trial = 0; trial < config.trials_per_task; ++trial) {
        if (done.count({map.map_id, task.start_room, task.goal_room, trial})) continue;

        TrialRecord r;
        r.map_id = map.map_id;
        r.base_map_id = map.base_map_id;
        r.tags = map.tags;
        r.start_room = task.start_room;
        r.goal_room = task.goal_room;
        r.task_class = to_string(classify_task(graph, task));
        r.trial_index = trial;
        if (!ctx.cache_dir.empty()) {
          r.transcript_ref = transcript_cache_name(config.backend, spec, trial);
        }

        Transcript t = query(config.backend, spec, trial, ctx);
        if (!t.ok()) {
          r.infrastructure = true;
          r.outcome = to_string(t.error);
        } else if (!t.parsed.ok) {
          r.outcome = to_string(t.parsed.verdict.outcome);
          r.plan_length = -1;
        } else {
          Verdict v = validate_plan(graph, task, t.parsed.plan);
          r.outcome = to_string(v.outcome);
          r.correct = v.correct();
          r.plan_length = static_cast<int>(t.parsed.plan.size());
          r.minimal = r.correct && t.parsed.plan.size() == oracle.size();
        }

        if (sink.is_open()) {
          sink << trial_record_to_json(r).dump() << '\n';
          sink.flush();
        }
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

// Fraction of correct answers among trials where the model actually
// answered; infrastructure failures are excluded from the denominator.
struct RateSummary {
  int answered = 0;
  int correct = 0;

  double rate() const { return answered == 0 ? 0.0 : static_cast<double>(correct) / answered; }
};

template <typename Pred>
inline RateSummary success_summary(const std::vector<TrialRecord>& records, Pred keep) {
  RateSummary s;
  for (const TrialRecord& r : records) {
    if (r.infrastructure || !keep(r)) continue;
    ++s.answered;
    if (r.correct) ++s.correct;
  }
  return s;
}

inline RateSummary success_summary(const std::vector<TrialRecord>& records) {
  return success_summary(records, [](const TrialRecord&) { return true; });
}

}  // namespace mapnav

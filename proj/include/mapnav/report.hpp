#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mapnav/bench.hpp"
#include "mapnav/stats.hpp"

namespace mapnav {

// One two-arm comparison pooled over the trial records. The Welch test on
// per-trial 0/1 outcomes is the primary criterion; the two-proportion z test
// is carried alongside and takes over when the Welch statistic is undefined
// (both arms constant).
struct HypothesisResult {
  std::string id;
  std::string name;
  std::string arm_a;
  std::string arm_b;
  bool available = false;
  RateSummary a;
  RateSummary b;
  std::optional<WelchResult> welch;
  std::optional<ProportionResult> proportion;
  bool significant_at_0p05 = false;

  double p_value() const {
    if (welch) return welch->p;
    if (proportion) return proportion->p;
    return 1.0;
  }
};

namespace detail {

struct ArmFilter {
  std::set<std::string> tags;  // exact tag set required
  std::string task_class;
};

inline bool matches(const TrialRecord& r, const ArmFilter& f) {
  if (r.task_class != f.task_class) return false;
  std::set<std::string> have(r.tags.begin(), r.tags.end());
  return have == f.tags;
}

inline HypothesisResult compare_arms(const std::vector<TrialRecord>& records,
                                     HypothesisResult seed, const ArmFilter& fa,
                                     const ArmFilter& fb) {
  // pair the arms: only base maps observed on both sides enter the pool
  std::set<std::string> bases_a;
  std::set<std::string> bases_b;
  for (const TrialRecord& r : records) {
    if (r.infrastructure) continue;
    if (matches(r, fa)) bases_a.insert(r.base_map_id);
    if (matches(r, fb)) bases_b.insert(r.base_map_id);
  }
  std::set<std::string> shared;
  for (const std::string& m : bases_a) {
    if (bases_b.count(m)) shared.insert(m);
  }

  std::vector<double> xa;
  std::vector<double> xb;
  for (const TrialRecord& r : records) {
    if (r.infrastructure || !shared.count(r.base_map_id)) continue;
    if (matches(r, fa)) {
      xa.push_back(r.correct ? 1.0 : 0.0);
      ++seed.a.answered;
      seed.a.correct += r.correct ? 1 : 0;
    } else if (matches(r, fb)) {
      xb.push_back(r.correct ? 1.0 : 0.0);
      ++seed.b.answered;
      seed.b.correct += r.correct ? 1 : 0;
    }
  }

  if (xa.size() < 2 || xb.size() < 2) return seed;
  seed.available = true;
  try {
    seed.welch = welch_t_test(xa, xb);
  } catch (const std::invalid_argument&) {
    // both arms constant; the proportion test below still applies
  }
  seed.proportion = two_proportion_z(seed.a.correct, seed.a.answered, seed.b.correct,
                                     seed.b.answered);
  seed.significant_at_0p05 = seed.p_value() < 0.05;
  return seed;
}

}  // namespace detail

// The three preregistered comparisons: growing the map, lengthening the
// route, and densifying the labels. Hard tasks are the workload everywhere
// except the difficulty contrast itself.
inline std::vector<HypothesisResult> hypothesis_report(const std::vector<TrialRecord>& records) {
  std::vector<HypothesisResult> out;

  HypothesisResult h1;
  h1.id = "H1";
  h1.name = "map_size";
  h1.arm_a = "original map, hard tasks";
  h1.arm_b = "doubled map, hard tasks";
  out.push_back(detail::compare_arms(records, h1, {{}, "hard"}, {{"doubled"}, "hard"}));

  HypothesisResult h2;
  h2.id = "H2";
  h2.name = "task_difficulty";
  h2.arm_a = "doubled map, easy tasks";
  h2.arm_b = "doubled map, hard tasks";
  out.push_back(detail::compare_arms(records, h2, {{"doubled"}, "easy"}, {{"doubled"}, "hard"}));

  HypothesisResult h3;
  h3.id = "H3";
  h3.name = "label_density";
  h3.arm_a = "sparse labels, hard tasks";
  h3.arm_b = "dense labels, hard tasks";
  out.push_back(detail::compare_arms(records, h3, {{"sparse"}, "hard"}, {{"dense"}, "hard"}));

  return out;
}

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline Json rate_to_json(const std::string& label, const RateSummary& s) {
  Json j;
  j["label"] = label;
  j["answered"] = s.answered;
  j["correct"] = s.correct;
  j["rate"] = s.answered == 0 ? Json() : Json(s.rate());
  return j;
}

}  // namespace detail

inline Json hypothesis_to_json(const HypothesisResult& h) {
  Json j;
  j["id"] = h.id;
  j["name"] = h.name;
  j["available"] = h.available;
  j["arm_a"] = detail::rate_to_json(h.arm_a, h.a);
  j["arm_b"] = detail::rate_to_json(h.arm_b, h.b);
  if (h.welch) {
    j["welch"] = {{"t", h.welch->t}, {"dof", h.welch->dof}, {"p", h.welch->p}};
  } else {
    j["welch"] = nullptr;
  }
  if (h.proportion) {
    j["two_proportion"] = {{"z", h.proportion->z}, {"p", h.proportion->p}};
  } else {
    j["two_proportion"] = nullptr;
  }
  j["significant_at_0p05"] = h.significant_at_0p05;
  return j;
}

inline Json report_to_json(const std::vector<HypothesisResult>& hypotheses, size_t record_count) {
  Json j;
  j["record_count"] = record_count;
  j["alpha"] = 0.05;
  j["hypotheses"] = Json::array();
  for (const HypothesisResult& h : hypotheses) j["hypotheses"].push_back(hypothesis_to_json(h));
  return j;
}

inline std::string report_to_csv(const std::vector<HypothesisResult>& hypotheses) {
  std::string csv =
      "hypothesis,name,available,n_a,correct_a,rate_a,n_b,correct_b,rate_b,"
      "welch_t,welch_dof,welch_p,z,z_p,significant_at_0p05\n";
  for (const HypothesisResult& h : hypotheses) {
    csv += h.id + "," + h.name + "," + (h.available ? "true" : "false") + ",";
    csv += std::to_string(h.a.answered) + "," + std::to_string(h.a.correct) + ",";
    csv += h.a.answered ? detail::fmt6(h.a.rate()) : "";
    csv += "," + std::to_string(h.b.answered) + "," + std::to_string(h.b.correct) + ",";
    csv += h.b.answered ? detail::fmt6(h.b.rate()) : "";
    csv += ",";
    if (h.welch) {
      csv += detail::fmt6(h.welch->t) + "," + detail::fmt6(h.welch->dof) + "," +
             detail::fmt6(h.welch->p);
    } else {
      csv += ",,";
    }
    csv += ",";
    if (h.proportion) {
      csv += detail::fmt6(h.proportion->z) + "," + detail::fmt6(h.proportion->p);
    } else {
      csv += ",";
    }
    csv += std::string(",") + (h.significant_at_0p05 ? "true" : "false") + "\n";
  }
  return csv;
}

// Minimal two-bar chart. Everything is laid out with fixed coordinates and
// %.6f formatting so repeated runs produce identical bytes.
inline std::string hypothesis_to_svg(const HypothesisResult& h) {
  const double width = 380.0;
  const double height = 260.0;
  const double floor_y = 210.0;
  const double bar_h = 150.0;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"380\" height=\"260\" "
                    "viewBox=\"0 0 380 260\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt6(width) + "\" height=\"" +
         detail::fmt6(height) + "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"16\" y=\"28\" font-family=\"monospace\" font-size=\"15\">" + h.id + " " +
         h.name + "</text>\n";

  if (!h.available) {
    svg += "<text x=\"16\" y=\"120\" font-family=\"monospace\" font-size=\"13\">no data for "
           "both arms</text>\n</svg>\n";
    return svg;
  }

  struct Bar {
    double x;
    const RateSummary* s;
    const std::string* label;
    const char* fill;
  };
  Bar bars[2] = {{70.0, &h.a, &h.arm_a, "#4878a8"}, {230.0, &h.b, &h.arm_b, "#a85848"}};
  for (const Bar& bar : bars) {
    double hgt = bar.s->rate() * bar_h;
    svg += "<rect x=\"" + detail::fmt6(bar.x) + "\" y=\"" + detail::fmt6(floor_y - hgt) +
           "\" width=\"80\" height=\"" + detail::fmt6(hgt) + "\" fill=\"" + bar.fill + "\"/>\n";
    svg += "<text x=\"" + detail::fmt6(bar.x) + "\" y=\"" + detail::fmt6(floor_y + 16) +
           "\" font-family=\"monospace\" font-size=\"11\">" + *bar.label + "</text>\n";
    svg += "<text x=\"" + detail::fmt6(bar.x + 16) + "\" y=\"" +
           detail::fmt6(floor_y - hgt - 6) + "\" font-family=\"monospace\" font-size=\"12\">" +
           detail::fmt6(bar.s->rate()) + "</text>\n";
  }
  svg += "<line x1=\"50\" y1=\"" + detail::fmt6(floor_y) + "\" x2=\"360\" y2=\"" +
         detail::fmt6(floor_y) + "\" stroke=\"#202020\"/>\n";
  svg += "<text x=\"16\" y=\"246\" font-family=\"monospace\" font-size=\"12\">p = " +
         detail::fmt6(h.p_value()) + (h.significant_at_0p05 ? " (significant)" : "") +
         "</text>\n";
  svg += "</svg>\n";
  return svg;
}

// Writes report.json, report.csv and one SVG per hypothesis into dir.
// Returns the hypothesis list it rendered.
inline std::vector<HypothesisResult> write_report(const std::vector<TrialRecord>& records,
                                                  const std::string& dir) {
  std::vector<HypothesisResult> hypotheses = hypothesis_report(records);
  std::filesystem::create_directories(dir);
  std::filesystem::path base(dir);
  write_file((base / "report.json").string(),
             report_to_json(hypotheses, records.size()).dump(2) + "\n");
  write_file((base / "report.csv").string(), report_to_csv(hypotheses));
  for (const HypothesisResult& h : hypotheses) {
    std::string name = h.id + "_" + h.name + ".svg";
    for (char& c : name) c = c == 'H' ? 'h' : c;
    write_file((base / name).string(), hypothesis_to_svg(h));
  }
  return hypotheses;
}

}  // namespace mapnav

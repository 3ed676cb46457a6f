#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "mapnav/floorplan.hpp"
#include "mapnav/plan.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(MAPNAV_FIXTURE_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
  return std::string(MAPNAV_GOLDEN_DIR) + "/" + name;
}

inline mapnav::FloorPlan load_fixture(const std::string& name) {
  return mapnav::load_floorplan(fixture_path(name));
}

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = base / ("mapnav_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++) + "_" + std::to_string(rd() % 100000));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  q += "'";
  return q;
}

// Runs the real CLI binary and captures both streams and the exit code.
inline CliResult run_cli(const std::vector<std::string>& args, const std::string& stdin_data = "") {
  TempDir dir;
  std::string cmd = shell_quote(MAPNAV_CLI_PATH);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  std::string in_file = dir.file("stdin");
  std::string out_file = dir.file("stdout");
  std::string err_file = dir.file("stderr");
  mapnav::write_file(in_file, stdin_data);
  cmd += " < " + shell_quote(in_file) + " > " + shell_quote(out_file) + " 2> " +
         shell_quote(err_file);
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
  r.out = mapnav::read_file(out_file);
  r.err = mapnav::read_file(err_file);
  return r;
}

inline mapnav::Plan make_plan(std::initializer_list<std::pair<mapnav::Verb, std::string>> steps,
                              mapnav::Profile profile = mapnav::Profile::Strict) {
  mapnav::Plan p;
  p.profile = profile;
  for (const auto& [verb, target] : steps) p.actions.push_back({verb, target, ""});
  return p;
}

// Synthetic rows x cols lattice of 6x6 rooms with 1-unit walls. keep_edge
// decides which neighbor pairs get a door; pass {} for all of them. Room ids
// are "R<row>_<col>", doors are numbered in scan order.
inline mapnav::FloorPlan make_grid_world(
    int rows, int cols,
    const std::function<bool(int, int, bool /*horizontal*/)>& keep_edge = {}) {
  using namespace mapnav;
  FloorPlan fp;
  fp.map_id = "grid_" + std::to_string(rows) + "x" + std::to_string(cols);
  fp.wall_thickness = 1;
  fp.bounds = {0, 0, cols * 7.0 - 1, rows * 7.0 - 1};
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Room room;
      room.id = "R" + std::to_string(r) + "_" + std::to_string(c);
      room.name = room.id;
      room.rects.push_back({c * 7.0, r * 7.0, 6.0, 6.0});
      fp.rooms.push_back(std::move(room));
    }
  }
  int door_no = 0;
  auto room_id = [](int r, int c) { return "R" + std::to_string(r) + "_" + std::to_string(c); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols && (!keep_edge || keep_edge(r, c, true))) {
        Door d;
        d.id = "D" + std::to_string(++door_no);
        d.room_a = room_id(r, c);
        d.room_b = room_id(r, c + 1);
        d.segment = {{c * 7.0 + 6.5, r * 7.0 + 2}, {c * 7.0 + 6.5, r * 7.0 + 4}};
        d.width = 2;
        fp.doors.push_back(std::move(d));
      }
      if (r + 1 < rows && (!keep_edge || keep_edge(r, c, false))) {
        Door d;
        d.id = "D" + std::to_string(++door_no);
        d.room_a = room_id(r, c);
        d.room_b = room_id(r + 1, c);
        d.segment = {{c * 7.0 + 2, r * 7.0 + 6.5}, {c * 7.0 + 4, r * 7.0 + 6.5}};
        d.width = 2;
        fp.doors.push_back(std::move(d));
      }
    }
  }
  return fp;
}

}  // namespace testutil

#include <catch2/catch_amalgamated.hpp>

#include "mapnav/transforms.hpp"
#include "mapnav/validate.hpp"
#include "testutil.hpp"

using namespace mapnav;
using testutil::load_fixture;
using testutil::make_plan;

namespace {

struct Setup {
  FloorPlan fp;
  ConnectivityGraph g;
  explicit Setup(const std::string& fixture) : fp(load_fixture(fixture)), g(build_connectivity(fp)) {}
};

const NavTask kHardTask{"petit_chalet", "Terrasse Couverte", "Chambre 1", Difficulty::Hard};

}  // namespace

TEST_CASE("oracle plans validate as correct on every reachable pair") {
  Setup s("petit_chalet.json");
  for (const std::string& a : s.g.rooms) {
    for (const std::string& b : s.g.rooms) {
      NavTask task{"petit_chalet", a, b, Difficulty::Hard};
      Plan plan = oracle_plan(s.g, task);
      CHECK(validate_plan(s.g, task, plan).correct());
      CHECK(validate_plan(s.g, task, plan, {}, {.pedantic = true}).correct());
    }
  }
}

TEST_CASE("verdict trace walks start to goal") {
  Setup s("petit_chalet.json");
  Plan plan = oracle_plan(s.g, kHardTask);
  Verdict v = validate_plan(s.g, kHardTask, plan);
  REQUIRE(v.correct());
  REQUIRE(v.trace.size() == plan.size() + 1);
  CHECK(v.trace.front() == "Terrasse Couverte");
  CHECK(v.trace.back() == "Chambre 1");
  // Approach and open keep the cursor in place; go-through moves it.
  CHECK(v.trace[1] == "Terrasse Couverte");
  CHECK(v.trace[2] == "Terrasse Couverte");
  CHECK(v.trace[3] == "Hall");
  CHECK(v.trace[6] == "Corridor");
  CHECK_FALSE(v.failing_index.has_value());
}

TEST_CASE("undefined action verdict") {
  Setup s("petit_chalet.json");
  auto r = parse_plan_json(R"({"plan": [{"action": "FlyTo", "target": "D8"}]})");
  REQUIRE(r.ok);
  Verdict v = validate_plan(s.g, kHardTask, r.plan);
  CHECK(v.outcome == Outcome::UnknownAction);
  CHECK(v.failing_index == 0);
  CHECK(v.detail.find("FlyTo") != std::string::npos);
}

TEST_CASE("unknown target verdict") {
  Setup s("petit_chalet.json");
  Plan plan = make_plan({{Verb::ApproachDoor, "D99"}});
  Verdict v = validate_plan(s.g, kHardTask, plan);
  CHECK(v.outcome == Outcome::UnknownTarget);
  CHECK(v.failing_index == 0);
}

TEST_CASE("infeasible actions") {
  Setup s("petit_chalet.json");
  SECTION("approaching a distant door") {
    Plan plan = make_plan({{Verb::ApproachDoor, "D4"}});
    Verdict v = validate_plan(s.g, kHardTask, plan);
    CHECK(v.outcome == Outcome::InfeasibleAction);
    CHECK(v.failing_index == 0);
    CHECK(v.detail.find("D4") != std::string::npos);
  }
  SECTION("opening a door of a distant room") {
    Plan plan = make_plan({{Verb::OpenDoor, "D4"}});
    Verdict v = validate_plan(s.g, kHardTask, plan);
    CHECK(v.outcome == Outcome::InfeasibleAction);
  }
  SECTION("going through a closed door") {
    Plan plan = make_plan({{Verb::ApproachDoor, "D8"}, {Verb::GoThrough, "D8"}});
    Verdict v = validate_plan(s.g, kHardTask, plan);
    CHECK(v.outcome == Outcome::InfeasibleAction);
    CHECK(v.failing_index == 1);
    CHECK(v.detail.find("closed") != std::string::npos);
  }
  SECTION("trace stops at the failure") {
    Plan plan = make_plan({{Verb::ApproachDoor, "D8"},
                           {Verb::OpenDoor, "D8"},
                           {Verb::GoThrough, "D8"},
                           {Verb::ApproachDoor, "D4"}});
    Verdict v = validate_plan(s.g, kHardTask, plan);
    CHECK(v.outcome == Outcome::InfeasibleAction);
    CHECK(v.failing_index == 3);
    REQUIRE(v.trace.size() == 4);  // three executed actions + start
    CHECK(v.trace.back() == "Hall");
  }
}

TEST_CASE("goal not reached") {
  Setup s("petit_chalet.json");
  Plan plan = make_plan(
      {{Verb::ApproachDoor, "D8"}, {Verb::OpenDoor, "D8"}, {Verb::GoThrough, "D8"}});
  Verdict v = validate_plan(s.g, kHardTask, plan);
  CHECK(v.outcome == Outcome::GoalNotReached);
  CHECK_FALSE(v.failing_index.has_value());
  CHECK(v.trace.back() == "Hall");
  CHECK(v.detail.find("Hall") != std::string::npos);
}

TEST_CASE("empty plan on a degenerate task is correct") {
  Setup s("two_rooms.json");
  NavTask task{"two_rooms", "A", "A", Difficulty::Degenerate};
  CHECK(validate_plan(s.g, task, Plan{}).correct());
  NavTask real{"two_rooms", "A", "B", Difficulty::Easy};
  CHECK(validate_plan(s.g, real, Plan{}).outcome == Outcome::GoalNotReached);
}

TEST_CASE("open_by_default doors need no OpenDoor") {
  Setup s("loft_308.json");
  NavTask task{"loft_308", "307", "308", Difficulty::Easy};
  Plan plan = make_plan({{Verb::ApproachDoor, "D2"}, {Verb::GoThrough, "D2"}});
  CHECK(validate_plan(s.g, task, plan).correct());
  CHECK(validate_plan(s.g, task, plan, {}, {.pedantic = true}).correct());

  // An override can close it again.
  DoorStates closed;
  closed.set("D2", false);
  Verdict v = validate_plan(s.g, task, plan, closed);
  CHECK(v.outcome == Outcome::InfeasibleAction);
}

TEST_CASE("initial door states open the way") {
  Setup s("two_rooms.json");
  NavTask task{"two_rooms", "A", "B", Difficulty::Easy};
  Plan plan = make_plan({{Verb::ApproachDoor, "D1"}, {Verb::GoThrough, "D1"}});
  CHECK(validate_plan(s.g, task, plan).outcome == Outcome::InfeasibleAction);
  DoorStates open;
  open.set("D1", true);
  CHECK(validate_plan(s.g, task, plan, open).correct());
}

TEST_CASE("case-insensitive targets resolve") {
  Setup s("petit_chalet.json");
  Plan plan = make_plan({{Verb::ApproachDoor, "d8"},
                         {Verb::OpenDoor, "door D8"},
                         {Verb::GoThrough, "D8"}});
  NavTask task{"petit_chalet", "terrasse couverte", "hall", Difficulty::Easy};
  CHECK(validate_plan(s.g, task, plan).correct());
}

TEST_CASE("pedantic mode requires approach before open and through") {
  Setup s("two_rooms.json");
  NavTask task{"two_rooms", "A", "B", Difficulty::Easy};

  Plan no_approach = make_plan({{Verb::OpenDoor, "D1"}, {Verb::GoThrough, "D1"}});
  CHECK(validate_plan(s.g, task, no_approach).correct());  // default mode allows it
  Verdict v = validate_plan(s.g, task, no_approach, {}, {.pedantic = true});
  CHECK(v.outcome == Outcome::InfeasibleAction);
  CHECK(v.failing_index == 0);

  // Approaching a different door does not satisfy the register.
  Setup chalet("petit_chalet.json");
  NavTask easy{"petit_chalet", "Hall", "Séjour", Difficulty::Easy};
  Plan wrong_door = make_plan(
      {{Verb::ApproachDoor, "D8"}, {Verb::OpenDoor, "D1"}, {Verb::GoThrough, "D1"}});
  CHECK(validate_plan(chalet.g, easy, wrong_door).correct());
  CHECK(validate_plan(chalet.g, easy, wrong_door, {}, {.pedantic = true}).outcome ==
        Outcome::InfeasibleAction);
}

TEST_CASE("goto under the extended profile") {
  Setup s("loft_308.json");
  NavTask task{"loft_308", "307", "308", Difficulty::Easy};

  Plan plan = make_plan({{Verb::GoTo, "308"}}, Profile::Extended);
  CHECK(validate_plan(s.g, task, plan).correct());

  // Closed door blocks GoTo.
  NavTask blocked{"loft_308", "306", "307", Difficulty::Easy};
  Plan blocked_plan = make_plan({{Verb::GoTo, "307"}}, Profile::Extended);
  CHECK(validate_plan(s.g, blocked, blocked_plan).outcome == Outcome::InfeasibleAction);

  // Unknown room.
  Plan unknown = make_plan({{Verb::GoTo, "999"}}, Profile::Extended);
  CHECK(validate_plan(s.g, task, unknown).outcome == Outcome::UnknownTarget);

  // GoTo the current room is a no-op.
  Plan noop = make_plan({{Verb::GoTo, "307"}, {Verb::GoTo, "308"}}, Profile::Extended);
  CHECK(validate_plan(s.g, task, noop).correct());

  // A strict-profile plan carrying GoTo is an unknown action.
  Plan strict = make_plan({{Verb::GoTo, "308"}}, Profile::Strict);
  CHECK(validate_plan(s.g, task, strict).outcome == Outcome::UnknownAction);
}

TEST_CASE("mutations of oracle plans are rejected in pedantic mode") {
  // Exactly two mutation families may keep a plan correct: duplicating an
  // ApproachDoor and duplicating an OpenDoor. Everything else must fail.
  Setup s("petit_chalet.json");
  ValidateOptions pedantic{.pedantic = true};

  std::vector<NavTask> tasks;
  for (const std::string& a : s.g.rooms) {
    for (const std::string& b : s.g.rooms) {
      if (a == b) continue;
      auto d = room_hop_distance(s.g, a, b);
      if (d && *d >= 1) tasks.push_back({"petit_chalet", a, b, Difficulty::Hard});
    }
  }
  REQUIRE(tasks.size() > 20);

  size_t whitelisted_hits = 0;
  for (const NavTask& task : tasks) {
    Plan plan = oracle_plan(s.g, task);
    REQUIRE(validate_plan(s.g, task, plan, {}, pedantic).correct());

    for (size_t i = 0; i < plan.size(); ++i) {
      // Deletion.
      Plan del = plan;
      del.actions.erase(del.actions.begin() + static_cast<ptrdiff_t>(i));
      INFO("deleting action " << i << " of " << serialize_plan(plan, PlanFormat::Lines));
      CHECK_FALSE(validate_plan(s.g, task, del, {}, pedantic).correct());

      // Duplication: whitelisted for ApproachDoor and OpenDoor only.
      Plan dup = plan;
      dup.actions.insert(dup.actions.begin() + static_cast<ptrdiff_t>(i), plan.actions[i]);
      bool correct = validate_plan(s.g, task, dup, {}, pedantic).correct();
      if (plan.actions[i].verb == Verb::GoThrough) {
        CHECK_FALSE(correct);
      } else {
        CHECK(correct);
        ++whitelisted_hits;
      }

      // Adjacent transposition.
      if (i + 1 < plan.size() && !(plan.actions[i] == plan.actions[i + 1])) {
        Plan swp = plan;
        std::swap(swp.actions[i], swp.actions[i + 1]);
        CHECK_FALSE(validate_plan(s.g, task, swp, {}, pedantic).correct());
      }

      // Target replacement with every other door.
      for (const GraphEdge& e : s.g.edges) {
        if (normalize_id(e.door_id) == normalize_id(plan.actions[i].target)) continue;
        Plan rep = plan;
        rep.actions[i].target = e.door_id;
        CHECK_FALSE(validate_plan(s.g, task, rep, {}, pedantic).correct());
      }
    }
  }
  CHECK(whitelisted_hits > 0);
}

TEST_CASE("connectivity grading") {
  Setup s("petit_chalet.json");

  SECTION("perfect claim") {
    ConnectivityClaim claim;
    for (const GraphEdge& e : s.g.edges) {
      claim.edges.push_back({e.door_id, s.g.rooms[static_cast<size_t>(e.a)],
                             s.g.rooms[static_cast<size_t>(e.b)]});
    }
    EdgeGrade grade = grade_connectivity(s.g, claim);
    CHECK(grade.precision == 1.0);
    CHECK(grade.recall == 1.0);
    CHECK(grade.matched == 9);
  }
  SECTION("room order and duplicates do not matter") {
    ConnectivityClaim claim;
    claim.edges.push_back({"D8", "Terrasse Couverte", "Hall"});
    claim.edges.push_back({"door D8", "hall", "TERRASSE COUVERTE"});
    EdgeGrade grade = grade_connectivity(s.g, claim);
    CHECK(grade.claimed == 1);
    CHECK(grade.matched == 1);
    CHECK_THAT(grade.recall, Catch::Matchers::WithinAbs(1.0 / 9.0, 1e-12));
  }
  SECTION("wrong rooms hurt precision") {
    ConnectivityClaim claim;
    claim.edges.push_back({"D8", "Hall", "Terrasse Couverte"});
    claim.edges.push_back({"D8", "Hall", "Cuisine"});
    EdgeGrade grade = grade_connectivity(s.g, claim);
    CHECK(grade.matched == 1);
    CHECK(grade.claimed == 2);
    CHECK(grade.precision == 0.5);
  }
  SECTION("empty claim") {
    EdgeGrade grade = grade_connectivity(s.g, {});
    CHECK(grade.precision == 1.0);
    CHECK(grade.recall == 0.0);
  }
}

TEST_CASE("connectivity claims parse from json and lines") {
  auto claim = parse_connectivity_claim(
      R"(Here is the layout: {"connections": [{"door": "D1", "rooms": ["A", "B"]},
         {"door": "D2", "rooms": ["B", "C"]}]} and then some prose)");
  REQUIRE(claim.edges.size() == 2);
  CHECK(claim.edges[0].door == "D1");
  CHECK(claim.edges[1].room_b == "C");

  auto lines = parse_connectivity_claim("D1: Hall -- Séjour\nnot a claim line\nD2: A -- B\n");
  REQUIRE(lines.edges.size() == 2);
  CHECK(lines.edges[0].door == "D1");
  CHECK(lines.edges[0].room_a == "Hall");
  CHECK(lines.edges[0].room_b == "Séjour");

  CHECK(parse_connectivity_claim("nothing here").edges.empty());
}

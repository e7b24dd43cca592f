#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ikform/formulation.hpp"
#include "support.hpp"

using namespace ikform;
using ikform::test::Gen;

namespace {

IKProblem planar_problem(int n, Pose2 target) {
  IKProblem p;
  p.chain = PlanarChain::uniform(n);
  p.target = target;
  return p;
}

IKProblem srs_problem(int extra, const std::vector<double>& q) {
  IKProblem p;
  const auto arm = scaled_arm(extra);
  p.chain = arm;
  p.target = arm.forward(std::span<const double>(q));
  return p;
}

std::size_t block_rows(const NLProgram& prog, const std::string& name) {
  for (const auto& b : prog.constraints)
    if (b.name == name) return b.size();
  return 0;
}

const ConstraintBlock* find_block(const NLProgram& prog, const std::string& name) {
  for (const auto& b : prog.constraints)
    if (b.name == name) return &b;
  return nullptr;
}

}  // namespace

TEST_SUITE("formulation") {
  TEST_CASE("old planar program") {
    const auto prog = build_old(planar_problem(4, {0.5, 0.2, 0.3}));
    CHECK(prog.num_vars() == 4);
    CHECK(block_rows(prog, "pose") == 3);
    const auto lo = prog.row_lower(), hi = prog.row_upper();
    for (std::size_t i = 0; i < 3; ++i) CHECK(lo[i] == hi[i]);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(prog.x_lower[i] == doctest::Approx(-2 * M_PI));
      CHECK(prog.x_upper[i] == doctest::Approx(2 * M_PI));
    }
    CHECK_FALSE(prog.has_cost);
    const std::vector<double> x(4, 0.1);
    CHECK(prog.evaluate(x).cost == 0.0);
  }

  TEST_CASE("old SRS program") {
    const auto prog = build_old(srs_problem(0, std::vector<double>(7, 0.3)));
    CHECK(prog.num_vars() == 7);
    CHECK(block_rows(prog, "pose") == 6);
  }

  TEST_CASE("new programs have linear pose rows") {
    const std::vector<double> q(7, 0.3);
    const auto problem = srs_problem(0, q);
    const auto map = make_ik_map(problem);
    const auto prog = build_new(problem, *map, Branch{1, 1, 1});
    CHECK(prog.num_vars() == 7);
    const auto* pose = find_block(prog, "pose");
    REQUIRE(pose != nullptr);
    CHECK(pose->size() == 6);
    CHECK(pose->linear);
    CHECK(block_rows(prog, "reachability") > 0);

    const auto planar = planar_problem(6, {0.3, 0.2, 0.1});
    const auto pmap = make_ik_map(planar);
    const auto pprog = build_new(planar, *pmap, Branch{1});
    CHECK(pprog.num_vars() == 6);
    CHECK(find_block(pprog, "pose")->linear);
  }

  TEST_CASE("box mode uses bound rows on position") {
    auto problem = planar_problem(5, {0.3, 0.2, 0.0});
    problem.mode = TargetMode::box;
    problem.p_lb = {0.2, 0.1};
    problem.p_ub = {0.4, 0.3};
    const auto map = make_ik_map(problem);
    const auto prog = build_new(problem, *map, Branch{1});
    const auto* pose = find_block(prog, "pose");
    REQUIRE(pose != nullptr);
    CHECK(pose->linear);
    CHECK(pose->lower == problem.p_lb);
    CHECK(pose->upper == problem.p_ub);
    const auto old = build_old(problem);
    CHECK(find_block(old, "pose")->lower == problem.p_lb);

    problem.p_ub = {0.4};
    CHECK_THROWS_AS(build_old(problem), std::invalid_argument);
  }

  TEST_CASE("matched guess of the straight arm") {
    const auto problem = planar_problem(3, {1.0, 0.0, 0.0});
    const auto map = make_ik_map(problem);
    const std::vector<double> q0{0.0, 0.0, 0.0};
    const auto m = map->match(q0);
    CHECK(m.pose[0] == doctest::Approx(1.0));
    CHECK(m.pose[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.pose[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.branch[0] == 1);
    // The straight arm sits on the probe boundary, so it is not accepted as a program start.
    CHECK_THROWS_AS(match_initial_guess(q0, *map), SingularConfiguration);
  }

  TEST_CASE("matched guesses reproduce the initial joints") {
    Gen g(61);
    for (int n : {4, 7}) {
      const auto problem = planar_problem(n, {0.2, 0.1, 0.0});
      const auto map = make_ik_map(problem);
      for (int trial = 0; trial < 100; ++trial) {
        const auto q0 = g.angles(n);
        MatchedGuess m;
        try {
          m = match_initial_guess(q0, *map);
        } catch (const SingularConfiguration&) {
          continue;
        }
        const auto prog = build_new(problem, *map, m.branch);
        const auto q = prog.joints(new_program_point(m));
        CHECK(test::max_angle_diff(q, q0) < 1e-8);
      }
    }
  }

  TEST_CASE("unwrapping angular pose variables keeps the joints") {
    Gen g(62);
    const auto q0 = g.angles(9);
    const auto problem = srs_problem(2, g.angles(9));
    const auto map = make_ik_map(problem);
    const auto m = match_initial_guess(q0, *map);
    auto x = new_program_point(m);
    std::vector<double> far_target = problem.target_params();
    for (std::size_t i = 3; i < 6; ++i) far_target[i] = x[i] + 2 * M_PI * (i - 2);
    unwrap_toward(x, far_target, *map);
    for (std::size_t i = 3; i < 6; ++i) CHECK(std::abs(x[i] - far_target[i]) <= M_PI + 1e-12);
    const auto prog = build_new(problem, *map, m.branch);
    CHECK(test::max_angle_diff(prog.joints(x), q0) < 1e-8);
  }

  TEST_CASE("linear rows have a constant Jacobian") {
    Gen g(63);
    const auto problem = srs_problem(2, g.angles(9));
    const auto map = make_ik_map(problem);
    const auto prog = build_new(problem, *map, Branch{1, -1, 1});
    const auto linear = prog.row_linear();
    std::optional<Eigen::MatrixXd> first;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x = g.angles(prog.num_vars());
      const auto ev = prog.evaluate(x);
      Eigen::MatrixXd lin(0, prog.num_vars());
      for (std::size_t r = 0; r < linear.size(); ++r) {
        if (!linear[r]) continue;
        lin.conservativeResize(lin.rows() + 1, Eigen::NoChange);
        lin.row(lin.rows() - 1) = ev.jacobian.row(static_cast<Eigen::Index>(r));
      }
      if (!first) first = lin;
      CHECK((lin - *first).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("costs agree across formulations") {
    Gen g(64);
    auto problem = srs_problem(4, g.angles(11));
    problem.cost = CostSpec::identity(11, g.angles(11));
    const auto map = make_ik_map(problem);
    const auto old_prog = build_old(problem);
    for (int trial = 0; trial < 50; ++trial) {
      const auto q0 = g.angles(11);
      MatchedGuess m;
      try {
        m = match_initial_guess(q0, *map);
      } catch (const SingularConfiguration&) {
        continue;
      }
      const auto new_prog = build_new(problem, *map, m.branch);
      const auto x = new_program_point(m);
      const auto q = new_prog.joints(x);
      CHECK(new_prog.evaluate(x, false).cost == doctest::Approx(old_prog.evaluate(q, false).cost).epsilon(1e-10));
    }
  }

  TEST_CASE("feasible new points map to feasible old points") {
    Gen g(65);
    for (int trial = 0; trial < 50; ++trial) {
      const auto q = g.angles(9);
      const auto problem = srs_problem(2, q);
      const auto map = make_ik_map(problem);
      MatchedGuess m;
      try {
        m = match_initial_guess(q, *map);
      } catch (const SingularConfiguration&) {
        continue;
      }
      const auto new_prog = build_new(problem, *map, m.branch);
      auto x = new_program_point(m);
      unwrap_toward(x, problem.target_params(), *map);
      if (new_prog.max_violation(x) > 1e-8) continue;  // joint limits of the wrapped tail
      const auto old_prog = build_old(problem);
      CHECK(old_prog.max_violation(new_prog.joints(x)) <= 1e-8);
      CHECK(check_joints(problem, new_prog.joints(x)).max() <= 1e-8);
    }
  }

  TEST_CASE("re-check of joints") {
    const auto problem = planar_problem(4, {0.5, 0.5, 0.0});
    const std::vector<double> q{0.0, 0.0, 0.0, 0.0};
    const auto chk = check_joints(problem, q);
    CHECK(chk.pose_error == doctest::Approx(0.5));
    const std::vector<double> outside{7.0, 0.0, 0.0, 0.0};
    CHECK(check_joints(problem, outside).limit_error == doctest::Approx(7.0 - 2 * M_PI));
  }

  TEST_CASE("user joint constraints appear as rows") {
    auto problem = planar_problem(4, {0.5, 0.2, 0.0});
    problem.inequalities.push_back(
        {"q0max", [](std::span<const DiffScalar> q) { return std::vector<DiffScalar>{q[0] - 0.5}; }, 1});
    problem.equalities.push_back(
        {"sum", [](std::span<const DiffScalar> q) { return std::vector<DiffScalar>{q[1] + q[2]}; }, 1});
    const auto prog = build_old(problem);
    CHECK(block_rows(prog, "g:q0max") == 1);
    CHECK(block_rows(prog, "h:sum") == 1);
    const std::vector<double> q{1.0, 0.2, 0.3, 0.0};
    CHECK(prog.block_violation(q, "g:q0max") == doctest::Approx(0.5));
    CHECK(prog.block_violation(q, "h:sum") == doctest::Approx(0.5));
  }

  TEST_CASE("problem JSON") {
    const auto dir = std::filesystem::temp_directory_path() / "ikform_formulation_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream(dir / "scene.json") << R"({"spheres": [{"link": 1, "radius": 0.05}],
                                               "boxes": [{"center": [2, 0, 0], "half_extents": [0.1, 0.1, 0.1]}]})";
    }
    const auto j = nlohmann::json::parse(R"({
      "chain": {"planar": {"n": 5}},
      "target": {"x": 0.4, "y": 0.3, "theta": 0.5},
      "cost": {"q_nom": [0, 0, 0, 0, 0], "weight": 2.0},
      "scene_file": "scene.json",
      "inequalities": [{"a": [1, 0, 0, 0, 0], "b": 1.0}]})");
    const IKProblem p = problem_from_json(j, dir.string());
    CHECK(p.planar());
    CHECK(p.num_joints() == 5);
    REQUIRE(p.cost.has_value());
    CHECK(p.cost->weight(0, 0) == doctest::Approx(2.0));
    REQUIRE(p.scene.has_value());
    CHECK(p.scene->spheres.size() == 1);
    CHECK(p.inequalities.size() == 1);
    std::filesystem::remove_all(dir);

    CHECK_THROWS(problem_from_json(nlohmann::json::parse(R"({"chain": {"planar": {"n": 5}},
                                                              "target": {"x": 0, "y": 0}, "mode": "sideways"})")));
  }
}

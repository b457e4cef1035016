#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "coflowhpn/relaxations.hpp"
#include "test_util.hpp"

using namespace coflowhpn;

namespace {

CoflowInstance single_coflow(double size, double speed, double release = 0.0,
                             double weight = 1.0) {
  CoflowInstance inst;
  inst.num_ports = 1;
  inst.cores = {{1, speed}};
  inst.coflows = {Coflow{1, weight, release, {{1, 1, size}}}};
  inst.validate();
  return inst;
}

// Two coflows, each one flow of size 4 on link (1,1); cores of speed 1 and 2.
// The by-hand optimum balances 4a = 2(2 - a) at a = 2/3: E = 8/3.
CoflowInstance two_by_two() {
  CoflowInstance inst;
  inst.num_ports = 1;
  inst.cores = {{1, 1.0}, {2, 2.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 4.0}}},
                  Coflow{2, 1.0, 0.0, {{1, 1, 4.0}}}};
  inst.validate();
  return inst;
}

double prefix_capacity_violation(const CoflowInstance& inst,
                                 const FractionalAssignment& frac,
                                 const Horizon& horizon) {
  const PortLoads loads = port_loads(inst);
  auto coflow_pos = [&](int id) {
    for (int f = 0; f < inst.coflow_count(); ++f)
      if (inst.coflows[f].id == id) return f;
    FAIL("unknown coflow id");
    return -1;
  };
  double worst = 0.0;
  for (const Core& core : inst.cores) {
    for (int p = 1; p <= inst.num_ports; ++p) {
      for (int l = 1; l <= horizon.L; ++l) {
        double in_sum = 0.0, out_sum = 0.0;
        for (const auto& [key, v] : frac.x) {
          if (key.core != core.id || key.interval > l) continue;
          if (frac.mode == Mode::indivisible) {
            const int fpos = coflow_pos(key.item.coflow);
            in_sum += v * loads.input(fpos, p);
            out_sum += v * loads.output(fpos, p);
          } else {
            for (const Flow& fl : inst.coflow_by_id(key.item.coflow).flows) {
              if (fl.src != key.item.src || fl.dst != key.item.dst) continue;
              if (fl.src == p) in_sum += v * fl.size;
              if (fl.dst == p) out_sum += v * fl.size;
            }
          }
        }
        worst = std::max(worst, in_sum / core.speed - horizon.tau[l]);
        worst = std::max(worst, out_sum / core.speed - horizon.tau[l]);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("horizon covers releases plus bottleneck work") {
  CHECK(compute_horizon(single_coflow(5.0, 1.0)).L == 3);  // ceil(log2 5)
  CHECK(compute_horizon(single_coflow(8.0, 1.0)).L == 3);  // exact power of two
  CHECK(compute_horizon(single_coflow(1.0, 4.0)).L == 1);  // floor at 1

  CoflowInstance inst;
  inst.num_ports = 1;
  inst.cores = {{1, 1.0}};
  inst.coflows = {Coflow{1, 1.0, 6.0, {{1, 1, 4.0}}},
                  Coflow{2, 1.0, 0.0, {{1, 1, 6.0}}}};
  inst.validate();
  CHECK(compute_horizon(inst).L == 4);  // 6 + 10/1 = 16, exactly 2^4

  const Horizon h = compute_horizon(inst);
  REQUIRE(h.tau.size() == 5);
  CHECK(h.tau[0] == 1.0);
  for (int l = 1; l <= h.L; ++l) CHECK(h.tau[l] == 2.0 * h.tau[l - 1]);
}

TEST_CASE("coflow makespan relaxation solves the balance instance to 8/3") {
  RelaxationLp rel = build_indivisible_makespan_lp(two_by_two());
  LpSolution sol = solve_lp(rel.lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == Catch::Approx(8.0 / 3.0).margin(1e-6));

  FractionalAssignment frac = decode_solution(rel, sol);
  CHECK(frac.makespan == Catch::Approx(8.0 / 3.0).margin(1e-6));
  for (const FlowKey& item : frac.items())
    CHECK(frac.total_mass(item) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("single core makespan equals port load over speed") {
  CoflowInstance inst;
  inst.num_ports = 2;
  inst.cores = {{1, 2.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 3.0}, {1, 2, 4.0}}}};
  inst.validate();
  LpSolution sol = solve_lp(build_indivisible_makespan_lp(inst).lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == Catch::Approx(7.0 / 2.0).margin(1e-9));
}

TEST_CASE("makespan lower bound against aggregate capacity") {
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 15; ++trial) {
    CoflowInstance inst = testutil::random_instance(rng);
    const PortLoads loads = port_loads(inst);
    double speed_sum = 0.0;
    for (const Core& c : inst.cores) speed_sum += c.speed;
    double worst_port = 0.0;
    for (int p = 1; p <= inst.num_ports; ++p) {
      double s = 0.0;
      for (int f = 0; f < inst.coflow_count(); ++f) s += loads.input(f, p);
      worst_port = std::max(worst_port, s);
    }
    LpSolution sol = solve_lp(build_indivisible_makespan_lp(inst).lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective_value >= worst_port / speed_sum - 1e-6);
  }
}

TEST_CASE("coflow TWCT relaxation on a single small coflow") {
  SECTION("released at zero: completion equals transfer time") {
    CoflowInstance inst = single_coflow(2.0, 1.0);
    RelaxationLp rel = build_indivisible_twct_lp(inst, compute_horizon(inst));
    LpSolution sol = solve_lp(rel.lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective_value == Catch::Approx(2.0).margin(1e-9));
  }
  SECTION("release shifts the completion") {
    CoflowInstance inst = single_coflow(2.0, 1.0, /*release=*/3.0);
    RelaxationLp rel = build_indivisible_twct_lp(inst, compute_horizon(inst));
    LpSolution sol = solve_lp(rel.lp);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective_value == Catch::Approx(5.0).margin(1e-9));
  }
}

TEST_CASE("two unit coflows on one port stay in the fractional band") {
  CoflowInstance inst;
  inst.num_ports = 1;
  inst.cores = {{1, 1.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 1.0}}},
                  Coflow{2, 1.0, 0.0, {{1, 1, 1.0}}}};
  inst.validate();
  LpSolution sol = solve_lp(build_indivisible_twct_lp(inst, compute_horizon(inst)).lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value >= 2.0 - 1e-9);
  CHECK(sol.objective_value <= 3.0 + 1e-9);
}

TEST_CASE("flow makespan relaxation splits mass onto the fast core") {
  RelaxationLp rel = build_divisible_makespan_lp(two_by_two());
  LpSolution sol = solve_lp(rel.lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == Catch::Approx(8.0 / 3.0).margin(1e-6));

  FractionalAssignment frac = decode_solution(rel, sol);
  for (const FlowKey& item : frac.items()) {
    auto marg = frac.core_marginals(item);
    double sum = 0.0;
    for (const auto& [core, v] : marg) sum += v;
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
    CHECK(marg[2] == Catch::Approx(2.0 / 3.0).margin(1e-6));
  }
}

TEST_CASE("single flow makespan never beats the fastest core") {
  CoflowInstance inst;
  inst.num_ports = 1;
  inst.cores = {{1, 1.0}, {2, 2.0}, {3, 4.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 5.0}}}};
  inst.validate();
  LpSolution sol = solve_lp(build_divisible_makespan_lp(inst).lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value <= 5.0 / 4.0 + 1e-9);
  CHECK(sol.objective_value >= 5.0 / 4.0 - 1e-6);  // the transfer row binds
}

TEST_CASE("disjoint-port coflows on one core have no contention") {
  CoflowInstance inst;
  inst.num_ports = 2;
  inst.cores = {{1, 2.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 6.0}}},
                  Coflow{2, 1.0, 0.0, {{2, 2, 4.0}}}};
  inst.validate();
  LpSolution sol = solve_lp(build_divisible_makespan_lp(inst).lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective_value == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("flow TWCT relaxation matches the coflow one on single-flow coflows") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    testutil::RandomSpec spec;
    spec.max_flows_per_coflow = 1;
    spec.max_release = 6.0;
    CoflowInstance inst = testutil::random_instance(rng, spec);
    const Horizon h = compute_horizon(inst);
    LpSolution a = solve_lp(build_indivisible_twct_lp(inst, h).lp);
    LpSolution b = solve_lp(build_divisible_twct_lp(inst, h).lp);
    REQUIRE(a.status == LpStatus::optimal);
    REQUIRE(b.status == LpStatus::optimal);
    CHECK(a.objective_value == Catch::Approx(b.objective_value).margin(1e-5));
  }
}

TEST_CASE("coflow completion is the max of its flow completions") {
  CoflowInstance inst;
  inst.num_ports = 2;
  inst.cores = {{1, 1.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 1, 2.0}, {2, 2, 8.0}}}};
  inst.validate();
  RelaxationLp rel = build_divisible_twct_lp(inst, compute_horizon(inst));
  LpSolution sol = solve_lp(rel.lp);
  REQUIRE(sol.status == LpStatus::optimal);
  FractionalAssignment frac = decode_solution(rel, sol);

  double max_flow = 0.0;
  for (const auto& [key, c] : frac.completion)
    if (key.src != 0) max_flow = std::max(max_flow, c);
  CHECK(frac.completion.at(coflow_key(1)) == Catch::Approx(max_flow).margin(1e-7));
  CHECK(frac.completion.at(coflow_key(1)) == Catch::Approx(8.0).margin(1e-6));
}

TEST_CASE("doubling weights doubles the TWCT objective") {
  std::mt19937_64 rng(1234);
  CoflowInstance inst = testutil::random_instance(rng);
  const Horizon h = compute_horizon(inst);
  LpSolution base = solve_lp(build_divisible_twct_lp(inst, h).lp);

  CoflowInstance doubled = inst;
  for (Coflow& c : doubled.coflows) c.weight *= 2.0;
  LpSolution twice = solve_lp(build_divisible_twct_lp(doubled, h).lp);
  REQUIRE(base.status == LpStatus::optimal);
  REQUIRE(twice.status == LpStatus::optimal);
  CHECK(twice.objective_value == Catch::Approx(2.0 * base.objective_value).margin(1e-6));
}

TEST_CASE("decode recovers the trivial assignment and flags corrupt mass") {
  CoflowInstance inst = single_coflow(5.0, 1.0);
  RelaxationLp rel = build_indivisible_makespan_lp(inst);
  LpSolution sol = solve_lp(rel.lp);
  REQUIRE(sol.status == LpStatus::optimal);
  FractionalAssignment frac = decode_solution(rel, sol);
  CHECK(frac.x.at(XVarKey{coflow_key(1), 1, 0}) == Catch::Approx(1.0));
  CHECK(frac.completion.at(coflow_key(1)) == Catch::Approx(frac.makespan));

  LpSolution corrupt = sol;
  corrupt.primal[rel.x_col.at(XVarKey{coflow_key(1), 1, 0})] = 0.9;
  CHECK_THROWS_AS(decode_solution(rel, corrupt), LpError);
}

TEST_CASE("divisible relaxation never exceeds the indivisible one") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 12; ++trial) {
    CoflowInstance inst = testutil::random_instance(rng);
    LpSolution indiv = solve_lp(build_indivisible_makespan_lp(inst).lp);
    LpSolution div = solve_lp(build_divisible_makespan_lp(inst).lp);
    REQUIRE(indiv.status == LpStatus::optimal);
    REQUIRE(div.status == LpStatus::optimal);
    CHECK(div.objective_value <= indiv.objective_value + 1e-6);
  }
}

TEST_CASE("TWCT objective dominates the release-plus-bottleneck bound") {
  std::mt19937_64 rng(8888);
  for (int trial = 0; trial < 8; ++trial) {
    testutil::RandomSpec spec;
    spec.max_release = 10.0;
    CoflowInstance inst = testutil::random_instance(rng, spec);
    const PortLoads loads = port_loads(inst);
    const Horizon h = compute_horizon(inst);

    for (bool divisible : {false, true}) {
      // The transfer rows force each completion past release plus the
      // fastest-core transfer of its bottleneck: the busiest port for a
      // whole coflow, the largest single flow when flows may split.
      double bound = 0.0;
      for (int f = 0; f < inst.coflow_count(); ++f) {
        double bneck = 0.0;
        if (divisible) {
          for (const Flow& fl : inst.coflows[f].flows)
            bneck = std::max(bneck, fl.size);
        } else {
          bneck = loads.bottleneck(f);
        }
        bound += inst.coflows[f].weight *
                 (inst.coflows[f].release + bneck / inst.max_speed());
      }
      LpSolution sol = solve_lp(divisible ? build_divisible_twct_lp(inst, h).lp
                                          : build_indivisible_twct_lp(inst, h).lp);
      REQUIRE(sol.status == LpStatus::optimal);
      CHECK(sol.objective_value >= bound - 1e-6);
    }
  }
}

TEST_CASE("decoded TWCT solutions satisfy every capacity prefix") {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 6; ++trial) {
    testutil::RandomSpec spec;
    spec.max_release = 5.0;
    CoflowInstance inst = testutil::random_instance(rng, spec);
    const Horizon h = compute_horizon(inst);
    for (bool divisible : {false, true}) {
      RelaxationLp rel = divisible ? build_divisible_twct_lp(inst, h)
                                   : build_indivisible_twct_lp(inst, h);
      LpSolution sol = solve_lp(rel.lp);
      REQUIRE(sol.status == LpStatus::optimal);
      FractionalAssignment frac = decode_solution(rel, sol);
      CHECK(prefix_capacity_violation(inst, frac, h) <= 1e-6);
    }
  }
}

TEST_CASE("divisible TWCT variable count matches the builder formula") {
  CoflowInstance inst;
  inst.num_ports = 2;
  inst.cores = {{1, 1.0}, {2, 2.0}};
  inst.coflows = {Coflow{1, 1.0, 0.0, {{1, 2, 3.0}, {2, 1, 5.0}}},
                  Coflow{2, 2.0, 1.0, {{1, 1, 2.0}}}};
  inst.validate();
  const Horizon h = compute_horizon(inst);
  RelaxationLp rel = build_divisible_twct_lp(inst, h);
  const int expected = inst.core_count() * inst.flow_count() * h.L +
                       inst.flow_count() + inst.coflow_count();
  CHECK(rel.lp.num_variables() == expected);

  // Round-trips through the textual export.
  LinearProgram back = parse_lp(export_lp(rel.lp));
  CHECK(back.num_variables() == rel.lp.num_variables());
  CHECK(back.num_rows() == rel.lp.num_rows());
}

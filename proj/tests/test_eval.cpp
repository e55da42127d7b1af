#include <doctest.h>

#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "shoprl/errors.hpp"
#include "shoprl/eval.hpp"
#include "shoprl/train.hpp"

using namespace shoprl;

namespace {

PullFn bernoulli_arms(std::vector<double> means) {
  return [means](std::size_t arm, Rng& rng) {
    const bool s = rng.bernoulli(means[arm]);
    return RolloutOutcome{s ? 1.0 : 0.25, s, 3};
  };
}

ArmStats arm(const std::string& label, std::size_t pulls, std::size_t successes, double score_sum) {
  ArmStats a;
  a.label = label;
  for (std::size_t i = 0; i < pulls; ++i) a.record(i < successes, i == 0 ? score_sum : 0.0);
  return a;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("posterior updates") {
    ArmStats a;
    a.record(true, 1.0);
    CHECK(a.alpha == 2.0);
    CHECK(a.beta_param == 1.0);
    a.record(false, 0.5);
    CHECK(a.alpha == 2.0);
    CHECK(a.beta_param == 2.0);
    CHECK(a.pulls == 2);
    CHECK(a.successes == 1);
    CHECK(a.score_sum == 1.5);
    CHECK(a.score_sq_sum == 1.25);
    CHECK(a.consistent());
    a.alpha = 5.0;
    CHECK(!a.consistent());
  }

  TEST_CASE("one arm takes every pull") {
    const std::vector<std::string> labels{"only"};
    Rng rng(1);
    const auto arms = thompson_run(labels, bernoulli_arms({0.3}), 250, rng);
    REQUIRE(arms.size() == 1);
    CHECK(arms[0].pulls == 250);
    CHECK(arms[0].consistent());
  }

  TEST_CASE("the better arm dominates") {
    const std::vector<std::string> labels{"good", "bad"};
    double share = 0.0;
    for (std::uint64_t r = 0; r < 20; ++r) {
      Rng rng(derive_seed(77, r));
      const auto arms = thompson_run(labels, bernoulli_arms({0.8, 0.2}), 1000, rng);
      CHECK(arms[0].pulls + arms[1].pulls == 1000);
      CHECK(arms[0].consistent());
      CHECK(arms[1].consistent());
      share += static_cast<double>(arms[0].pulls) / 1000.0 / 20.0;
    }
    CHECK(share >= 0.8);

    // Order of the arms does not matter.
    const std::vector<std::string> flipped{"bad", "good"};
    Rng rng(5);
    const auto arms = thompson_run(flipped, bernoulli_arms({0.2, 0.8}), 1000, rng);
    CHECK(arms[1].pulls > 800);
  }

  TEST_CASE("identical arms share the pulls") {
    const std::vector<std::string> labels{"a", "b", "c"};
    Rng rng(3);
    const auto arms = thompson_run(labels, bernoulli_arms({0.4, 0.4, 0.4}), 1000, rng);
    for (const auto& a : arms) CHECK(a.pulls >= 100);
  }

  TEST_CASE("argument checks") {
    Rng rng(0);
    CHECK_THROWS_AS(thompson_run(std::vector<std::string>{}, bernoulli_arms({}), 10, rng), ParameterError);
    CHECK_THROWS_AS(thompson_run(std::vector<std::string>{"a"}, bernoulli_arms({0.5}), 0, rng), ParameterError);
    const auto& w = fixtures::small_world();
    const auto p = PolicyParams::zeros(64, 2);
    const std::vector<Agent> agents{{"z", &p}};
    CHECK_THROWS_AS(thompson_run(std::span<const Agent>{}, w.env, w.goals, 10, rng), ParameterError);
    CHECK_THROWS_AS(thompson_run(agents, w.env, std::span<const Goal>{}, 10, rng), ParameterError);
  }

  TEST_CASE("greedy rollouts") {
    const auto& w = fixtures::small_world();
    const auto random = fixtures::random_params(256, 8, 1.0, 4);
    for (const auto& g : w.goals) {
      const auto a = rollout(random, w.env, g);
      const auto b = rollout(random, w.env, g);
      CHECK(a.length <= w.env.max_steps());
      CHECK(a.length >= 1);
      CHECK(a.score == b.score);
      CHECK(a.length == b.length);
      CHECK(a.success == (a.score == 1.0));
    }

    // Imitation on a goal's noise-free demonstration solves that goal greedily.
    const Goal* g = nullptr;
    for (const auto& x : w.goals) {
      if (oracle_can_solve(x, w.env)) {
        g = &x;
        break;
      }
    }
    REQUIRE(g != nullptr);
    Rng rng(1);
    const std::vector<Trajectory> demo{oracle_trajectory(*g, w.env, OracleConfig{0.0, 0}, rng)};
    TrainConfig cfg;
    cfg.learning_rate = 2.0;
    cfg.n_steps = 500;
    const auto fitted = train_il(PolicyParams::init(1024, 16, 2), demo, cfg);
    const auto out = rollout(fitted, w.env, *g);
    CHECK(out.success);
    CHECK(out.score == 1.0);
    CHECK(out.length == demo[0].steps.size());
  }

  TEST_CASE("experiments on real agents are deterministic and complete") {
    const auto& w = fixtures::small_world();
    const auto a = fixtures::random_params(256, 8, 1.0, 1);
    const auto b = PolicyParams::zeros(256, 8);
    const std::vector<Agent> agents{{"random", &a}, {"uniform", &b}};
    const auto runs = thompson_experiment(agents, w.env, w.goals, 3, 200, 42);
    const auto again = thompson_experiment(agents, w.env, w.goals, 3, 200, 42);
    CHECK(runs == again);
    REQUIRE(runs.size() == 3);
    for (const auto& run : runs) {
      CHECK(run[0].pulls + run[1].pulls == 200);
      for (const auto& s : run) CHECK(s.consistent());
    }
    const auto report = aggregate_runs(runs);
    CHECK(report.runs == 3);
    CHECK(report.rollouts_per_run == 200);
    for (const auto& s : report.agents) {
      CHECK((s.success_rate >= 0.0 && s.success_rate <= 1.0));
      CHECK(s.success_std >= 0.0);
      CHECK(s.score_std >= 0.0);
    }
    CHECK(thompson_experiment(agents, w.env, w.goals, 3, 200, 43) != runs);
  }

  TEST_CASE("aggregation arithmetic") {
    const auto one = aggregate_runs({{arm("x", 10, 1, 4.0)}});
    CHECK(one.agent("x").success_rate == doctest::Approx(0.1));
    CHECK(one.agent("x").success_std == 0.0);
    CHECK(one.agent("x").mean_score == doctest::Approx(0.4));
    CHECK_THROWS_AS(one.agent("y"), NotFoundError);

    const auto two = aggregate_runs({{arm("x", 10, 1, 1.0)}, {arm("x", 10, 2, 3.0)}});
    const auto& s = two.agent("x");
    CHECK(s.success_rate == doctest::Approx(0.15));
    CHECK(s.success_std == doctest::Approx(0.05));
    CHECK(s.mean_score == doctest::Approx(0.2));
    CHECK(s.score_std == doctest::Approx(0.1));
    CHECK(s.pulls_per_run == std::vector<std::size_t>{10, 10});
    CHECK(s.excluded_runs == 0);
  }

  TEST_CASE("runs without pulls are left out") {
    const auto rep = aggregate_runs({{arm("x", 10, 5, 5.0), arm("y", 0, 0, 0.0)},
                                     {arm("x", 4, 1, 1.0), arm("y", 6, 3, 3.0)}});
    const auto& y = rep.agent("y");
    CHECK(y.excluded_runs == 1);
    CHECK(y.success_rate == doctest::Approx(0.5));
    CHECK(y.success_std == 0.0);
    CHECK(y.pulls_per_run == std::vector<std::size_t>{0, 6});
    CHECK(rep.agent("x").excluded_runs == 0);
    CHECK(rep.agent("x").success_rate == doctest::Approx(0.375));
  }

  TEST_CASE("mismatched runs are rejected") {
    CHECK_THROWS_AS(aggregate_runs({{arm("x", 1, 1, 1.0)}, {arm("y", 1, 1, 1.0)}}), ParameterError);
    CHECK_THROWS_AS(aggregate_runs({{arm("x", 1, 1, 1.0)}, {arm("x", 1, 1, 1.0), arm("y", 1, 0, 0.0)}}),
                    ParameterError);
    CHECK_THROWS_AS(aggregate_runs({}), ParameterError);
  }

  TEST_CASE("runs CSV round trip and markdown") {
    const std::vector<std::vector<ArmStats>> runs{{arm("il", 7, 3, 2.5), arm("dpo", 3, 1, 1.0 / 3.0)},
                                                  {arm("il", 0, 0, 0.0), arm("dpo", 10, 9, 9.5)}};
    std::stringstream ss;
    write_runs_csv(ss, runs);
    CHECK(ss.str().rfind("agent,run,pulls,successes,success_rate,mean_score\n", 0) == 0);
    const auto back = read_runs_csv(ss);
    REQUIRE(back.size() == 2);
    const auto a = aggregate_runs(runs), b = aggregate_runs(back);
    for (const auto& label : {"il", "dpo"}) {
      CHECK(a.agent(label).success_rate == b.agent(label).success_rate);
      CHECK(a.agent(label).mean_score == doctest::Approx(b.agent(label).mean_score).epsilon(1e-15));
      CHECK(a.agent(label).pulls_per_run == b.agent(label).pulls_per_run);
    }

    std::stringstream bad("agent,run,pulls\nil,0,3\n");
    CHECK_THROWS_AS(read_runs_csv(bad), FormatError);
    std::stringstream junk("agent,run,pulls,successes,success_rate,mean_score\nil,zero,1,1,1,1\n");
    CHECK_THROWS_AS(read_runs_csv(junk), FormatError);

    const auto md = render_markdown(a, "algorithms");
    CHECK(md.find("## algorithms") != std::string::npos);
    CHECK(md.find("| il |") != std::string::npos);
    CHECK(md.find("| dpo |") != std::string::npos);
    CHECK(md.find("+-") != std::string::npos);
  }
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shoprl/policy.hpp"
#include "shoprl/trajectory.hpp"

namespace shoprl {

/// Beta-Bernoulli posterior of one arm plus score side metrics.
/// alpha = 1 + successes, beta_param = 1 + pulls - successes.
struct ArmStats {
  std::string label;
  double alpha = 1.0;
  double beta_param = 1.0;
  std::size_t pulls = 0;
  std::size_t successes = 0;
  double score_sum = 0.0;
  double score_sq_sum = 0.0;

  void record(bool success, double score);
  bool consistent() const;

  bool operator==(const ArmStats&) const = default;
};

struct RolloutOutcome {
  double score = 0.0;
  bool success = false;
  std::size_t length = 0;
};

/// Greedy episode from reset(goal); success means a score of exactly 1.
RolloutOutcome rollout(const PolicyParams& params, const Env& env, const Goal& goal);

struct Agent {
  std::string label;
  const PolicyParams* params = nullptr;
};

/// Pulls one arm; the Rng is the run's stream.
using PullFn = std::function<RolloutOutcome(std::size_t arm, Rng& rng)>;

/// Thompson sampling with Beta(1, 1) priors: each round draws from every
/// arm's posterior, pulls the argmax (ties to the lower index) and updates it
/// with the Bernoulli success.
std::vector<ArmStats> thompson_run(std::span<const std::string> labels, const PullFn& pull,
                                   std::size_t n_rollouts, Rng& rng);

/// Agents as arms; each pull draws a goal uniformly and runs a greedy rollout.
/// Throws ParameterError without agents, goals or rollouts.
std::vector<ArmStats> thompson_run(std::span<const Agent> agents, const Env& env,
                                   std::span<const Goal> goals, std::size_t n_rollouts, Rng& rng);

/// n_runs independent runs, run r seeded with derive_seed(seed, r).
std::vector<std::vector<ArmStats>> thompson_experiment(std::span<const Agent> agents, const Env& env,
                                                       std::span<const Goal> goals,
                                                       std::size_t n_runs, std::size_t n_rollouts,
                                                       std::uint64_t seed);

struct AgentSummary {
  std::string label;
  double mean_score = 0.0;
  double score_std = 0.0;
  double success_rate = 0.0;
  double success_std = 0.0;
  std::vector<std::size_t> pulls_per_run;
  /// Runs in which the agent was never pulled; left out of its mean and std.
  std::size_t excluded_runs = 0;
};

struct EvalReport {
  std::vector<AgentSummary> agents;
  std::size_t runs = 0;
  std::size_t rollouts_per_run = 0;

  /// Throws NotFoundError.
  const AgentSummary& agent(const std::string& label) const;
};

/// Per-run success rate and mean score, then mean and population std across
/// runs. Throws ParameterError when runs disagree on agent labels.
EvalReport aggregate_runs(const std::vector<std::vector<ArmStats>>& run_results);

/// Columns: agent, run, pulls, successes, success_rate, mean_score.
void write_runs_csv(std::ostream& os, const std::vector<std::vector<ArmStats>>& run_results);
std::vector<std::vector<ArmStats>> read_runs_csv(std::istream& is);

/// Per-agent mean +- std of score and success rate.
std::string render_markdown(const EvalReport& report, const std::string& title);

}  // namespace shoprl

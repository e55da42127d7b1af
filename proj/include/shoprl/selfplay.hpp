#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shoprl/policy.hpp"
#include "shoprl/trajectory.hpp"

namespace shoprl {

struct OracleConfig {
  /// Per-step probability of a uniformly random non-purchase detour.
  double noise = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Scripted demonstrator with full goal knowledge: search, page to the first
/// ranked product with the best achievable score, open it, select the target
/// options, purchase. Detours are followed by re-planning from the new state.
/// Throws GenerationError when no search result can score 1.
Trajectory oracle_trajectory(const Goal& goal, const Env& env, const OracleConfig& cfg, Rng& rng);

/// True when some result of the goal's canonical query scores 1.
bool oracle_can_solve(const Goal& goal, const Env& env);

/// n oracle trajectories over goals[i % goals.size()], each with its own
/// stream derived from cfg.seed.
std::vector<Trajectory> generate_oracle_trajectories(std::span<const Goal> goals, const Env& env,
                                                     const OracleConfig& cfg, std::size_t n);

/// Deletes the steps between repeated visits of the same obs_key, keeping the
/// later visit's outgoing action. Final reward is unchanged.
Trajectory prune_loops(const Trajectory& traj);

/// prune_loops, then replays the result; throws PruningError if it is not a
/// legal episode reproducing the recorded observations and reward.
Trajectory prune_loops(const Trajectory& traj, const Env& env, const Goal& goal);

struct SelfplayStats {
  std::size_t attempts = 0;
  std::size_t kept = 0;
  std::size_t steps_before_pruning = 0;
  std::size_t steps_after_pruning = 0;
};

/// Samples episodes under `params` on uniformly drawn goals and keeps those
/// with final reward exactly 1, until n are kept or max_attempts rollouts are
/// spent. Returned trajectories are labeled selfplay and, when `prune` is set,
/// loop-pruned and replay-verified. Throws ParameterError unless
/// 1 <= n <= max_attempts.
std::vector<Trajectory> generate_perfect_trajectories(const PolicyParams& params, const Env& env,
                                                      std::span<const Goal> goals, std::size_t n,
                                                      std::size_t max_attempts, Rng& rng,
                                                      bool prune = true,
                                                      SelfplayStats* stats = nullptr);

}  // namespace shoprl

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shoprl/env.hpp"

namespace shoprl {

enum class TrajectorySource { Oracle, Policy, Selfplay };

std::string_view source_name(TrajectorySource source);
TrajectorySource parse_source(std::string_view name);

struct TrajectoryStep {
  Observation observation;
  std::string action_id;
};

/// One episode from reset to purchase or truncation. The observation of each
/// step is the one the action was chosen at.
struct Trajectory {
  GoalId goal_id = 0;
  std::vector<TrajectoryStep> steps;
  double final_reward = 0.0;
  std::optional<RewardBreakdown> breakdown;
  TrajectorySource source = TrajectorySource::Policy;

  bool purchased() const { return !steps.empty() && steps.back().action_id == "purchase"; }
  std::vector<std::string> action_ids() const;
};

using ActionChooser = std::function<std::string(const Observation&)>;

/// Runs one episode, asking `choose` for an action id at every step.
Trajectory run_episode(const Env& env, const Goal& goal, const ActionChooser& choose,
                       TrajectorySource source);

/// Re-executes a recorded action sequence. Throws InvalidActionError or
/// StateError if the sequence is not legal from reset(goal).
Trajectory replay(const Env& env, const Goal& goal, std::span<const std::string> action_ids,
                  TrajectorySource source);

/// True when replaying `traj` reproduces its obs_keys and final reward.
bool replays_exactly(const Env& env, const Goal& goal, const Trajectory& traj);

}  // namespace shoprl

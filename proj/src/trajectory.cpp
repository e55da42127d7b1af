#include "shoprl/trajectory.hpp"

#include "shoprl/errors.hpp"

namespace shoprl {

std::string_view source_name(TrajectorySource source) {
  switch (source) {
    case TrajectorySource::Oracle: return "oracle";
    case TrajectorySource::Policy: return "policy";
    case TrajectorySource::Selfplay: return "selfplay";
  }
  return "unknown";
}

TrajectorySource parse_source(std::string_view name) {
  for (auto s : {TrajectorySource::Oracle, TrajectorySource::Policy, TrajectorySource::Selfplay}) {
    if (source_name(s) == name) return s;
  }
  throw FormatError("unknown trajectory source '" + std::string(name) + "'");
}

std::vector<std::string> Trajectory::action_ids() const {
  std::vector<std::string> ids;
  ids.reserve(steps.size());
  for (const auto& s : steps) ids.push_back(s.action_id);
  return ids;
}

Trajectory run_episode(const Env& env, const Goal& goal, const ActionChooser& choose,
                       TrajectorySource source) {
  auto [state, obs] = env.reset(goal);
  Trajectory traj;
  traj.goal_id = goal.id;
  traj.source = source;
  while (!state.done) {
    std::string id = choose(obs);
    auto out = env.step(state, id);
    traj.steps.push_back({std::move(obs), std::move(id)});
    obs = std::move(out.observation);
    if (out.done) {
      traj.final_reward = out.reward;
      traj.breakdown = out.breakdown;
    }
  }
  return traj;
}

Trajectory replay(const Env& env, const Goal& goal, std::span<const std::string> action_ids,
                  TrajectorySource source) {
  std::size_t next = 0;
  auto traj = run_episode(
      env, goal,
      [&](const Observation&) -> std::string {
        if (next >= action_ids.size()) {
          throw StateError("replay: action sequence ended before the episode");
        }
        return action_ids[next++];
      },
      source);
  if (next != action_ids.size()) {
    throw StateError("replay: episode ended with " + std::to_string(action_ids.size() - next) +
                     " actions left");
  }
  return traj;
}

bool replays_exactly(const Env& env, const Goal& goal, const Trajectory& traj) {
  const auto ids = traj.action_ids();
  Trajectory again;
  try {
    again = replay(env, goal, ids, traj.source);
  } catch (const std::exception&) {
    return false;
  }
  if (again.final_reward != traj.final_reward) return false;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    if (again.steps[i].observation.obs_key != traj.steps[i].observation.obs_key) return false;
  }
  return true;
}

}  // namespace shoprl

#include "shoprl/selfplay.hpp"

#include <map>
#include <optional>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

struct OraclePlan {
  ProductId target = 0;
  std::size_t target_page = 0;
  OptionChoice options;
};

OraclePlan plan_for(const Goal& goal, const Env& env) {
  const auto results = search(env.index(), query_from_instruction(goal));
  std::optional<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < results.ranked.size(); ++i) {
    const auto& p = env.catalog().product(results.ranked[i].id);
    const double s = score_purchase(goal, p, best_options(goal, p)).score;
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (!best || best_score < 1.0) {
    throw GenerationError("goal " + std::to_string(goal.id) +
                          " has no perfect-scoring product among its search results");
  }
  const auto& p = env.catalog().product(results.ranked[*best].id);
  return {p.id, *best / QueryResult::kPageSize, best_options(goal, p)};
}

std::string scripted_action(const EnvState& state, const OraclePlan& plan) {
  switch (state.page) {
    case PageType::Search:
      return "search";
    case PageType::Results:
      if (state.result_page_index == plan.target_page) {
        return action_id(act::ClickResult{plan.target, {}});
      }
      return state.result_page_index < plan.target_page ? "next_page" : "prev_page";
    case PageType::Product: {
      if (state.current_product != plan.target) return "back_to_results";
      for (const auto& [name, value] : plan.options) {
        auto it = state.selected_options.find(name);
        if (it == state.selected_options.end() || it->second != value) {
          return action_id(act::ClickOption{name, value});
        }
      }
      return "purchase";
    }
    case PageType::Detail:
      return "back_to_product";
  }
  return "search";
}

// Steps through `ids`, checking each recorded obs_key; a purchased trajectory
// must also finish with the recorded reward.
bool verify_replay(const Env& env, const Goal& goal, const Trajectory& traj) {
  auto [state, obs] = env.reset(goal);
  try {
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      if (state.done || obs.obs_key != traj.steps[i].observation.obs_key) return false;
      auto out = env.step(state, traj.steps[i].action_id);
      obs = std::move(out.observation);
      if (out.done && traj.purchased()) {
        return i + 1 == traj.steps.size() && out.reward == traj.final_reward;
      }
    }
  } catch (const std::exception&) {
    return false;
  }
  return !traj.purchased();
}

}  // namespace

void OracleConfig::validate() const {
  if (!(noise >= 0.0 && noise <= 1.0)) throw ParameterError("oracle noise must be in [0, 1]");
}

bool oracle_can_solve(const Goal& goal, const Env& env) {
  try {
    plan_for(goal, env);
    return true;
  } catch (const GenerationError&) {
    return false;
  }
}

Trajectory oracle_trajectory(const Goal& goal, const Env& env, const OracleConfig& cfg, Rng& rng) {
  cfg.validate();
  const OraclePlan plan = plan_for(goal, env);

  auto [state, obs] = env.reset(goal);
  Trajectory traj;
  traj.goal_id = goal.id;
  traj.source = TrajectorySource::Oracle;
  while (!state.done) {
    std::string id = scripted_action(state, plan);
    if (cfg.noise > 0.0 && rng.bernoulli(cfg.noise)) {
      std::vector<std::string> detours;
      for (auto& a : obs.action_ids()) {
        if (a != "purchase") detours.push_back(std::move(a));
      }
      if (!detours.empty()) id = detours[rng.index(detours.size())];
    }
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

std::vector<Trajectory> generate_oracle_trajectories(std::span<const Goal> goals, const Env& env,
                                                     const OracleConfig& cfg, std::size_t n) {
  if (goals.empty()) throw ParameterError("generate_oracle_trajectories: no goals");
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    out.push_back(oracle_trajectory(goals[i % goals.size()], env, cfg, rng));
  }
  return out;
}

Trajectory prune_loops(const Trajectory& traj) {
  Trajectory out = traj;
  out.steps.clear();
  std::map<std::uint64_t, std::size_t> first_seen;
  for (const auto& st : traj.steps) {
    auto it = first_seen.find(st.observation.obs_key);
    if (it != first_seen.end()) {
      // Drop the earlier visit and everything after it; the later visit
      // (with its outgoing action) takes its place.
      const std::size_t i = it->second;
      for (std::size_t j = i; j < out.steps.size(); ++j) {
        first_seen.erase(out.steps[j].observation.obs_key);
      }
      out.steps.resize(i);
    }
    first_seen[st.observation.obs_key] = out.steps.size();
    out.steps.push_back(st);
  }
  return out;
}

Trajectory prune_loops(const Trajectory& traj, const Env& env, const Goal& goal) {
  auto pruned = prune_loops(traj);
  if (!verify_replay(env, goal, pruned)) {
    throw PruningError("pruned trajectory for goal " + std::to_string(goal.id) +
                       " does not replay");
  }
  return pruned;
}

std::vector<Trajectory> generate_perfect_trajectories(const PolicyParams& params, const Env& env,
                                                      std::span<const Goal> goals, std::size_t n,
                                                      std::size_t max_attempts, Rng& rng,
                                                      bool prune, SelfplayStats* stats) {
  if (n < 1) throw ParameterError("generate_perfect_trajectories: n must be >= 1");
  if (max_attempts < n) throw ParameterError("generate_perfect_trajectories: max_attempts < n");
  if (goals.empty()) throw ParameterError("generate_perfect_trajectories: no goals");

  SelfplayStats local;
  SelfplayStats& st = stats ? *stats : local;
  st = {};
  const std::uint64_t base = rng.next();
  std::vector<Trajectory> kept;
  for (std::size_t attempt = 0; attempt < max_attempts && kept.size() < n; ++attempt) {
    Rng ep_rng(derive_seed(base, static_cast<std::uint64_t>(attempt)));
    const Goal& goal = goals[ep_rng.index(goals.size())];
    ++st.attempts;
    auto traj = run_episode(
        env, goal,
        [&](const Observation& obs) { return sample_action(action_distribution(params, obs), ep_rng); },
        TrajectorySource::Selfplay);
    if (traj.final_reward != 1.0) continue;
    st.steps_before_pruning += traj.steps.size();
    if (prune) traj = prune_loops(traj, env, goal);
    st.steps_after_pruning += traj.steps.size();
    kept.push_back(std::move(traj));
  }
  st.kept = kept.size();
  return kept;
}

}  // namespace shoprl

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shoprl/metrics.hpp"
#include "shoprl/policy.hpp"
#include "shoprl/trajectory.hpp"

namespace shoprl {

struct TrainConfig {
  double learning_rate = 0.05;
  double beta = 0.1;      // DPO temperature
  double epsilon = 0.2;   // PPO clip range
  double c_value = 0.5;
  double c_entropy = 0.01;
  double c_il = 0.1;
  std::size_t batch_size = 32;
  std::size_t n_steps = 1000;
  std::size_t ppo_epochs = 4;
  std::uint64_t seed = 0;

  /// Throws ParameterError unless learning_rate > 0, beta > 0, 0 < epsilon < 1.
  void validate() const;
};

/// One DPO training atom: at `observation`, `preferred` beats `dispreferred`.
struct PreferencePair {
  Observation observation;
  std::string preferred;
  std::string dispreferred;
};

/// Imitation: minibatch SGD on mean -ln pi(a_demo | o). Steps with a single
/// available action carry no gradient and are not sampled. Logs step, loss.
/// Throws ParameterError on an empty trajectory list.
PolicyParams train_il(PolicyParams params, std::span<const Trajectory> trajectories,
                      const TrainConfig& cfg, MetricsLog* log = nullptr);

/// Bradley-Terry: exp(r_w) / (exp(r_w) + exp(r_l)) = sigmoid(r_w - r_l).
/// Complementary calls sum to exactly 1.
double bt_preference_prob(double reward_preferred, double reward_dispreferred);

/// One pair per decision step: the demonstrated action is preferred and the
/// dispreferred one is drawn from the reference policy renormalized over the
/// remaining actions. Throws ParameterError for a policy-sourced trajectory.
std::vector<PreferencePair> build_preference_pairs(const Trajectory& traj,
                                                   const PolicyParams& ref_params, Rng& rng);

struct DpoLoss {
  double loss = 0.0;
  Gradient grad;
  /// Mean implicit-reward margin (h / beta) over the pairs.
  double margin = 0.0;
};

/// Mean of -ln sigmoid(h), h = beta * [(ln pi(w) - ln ref(w)) - (ln pi(l) - ln ref(l))].
/// Throws ParameterError on an empty pair list.
DpoLoss dpo_loss_and_grad(const PolicyParams& params, const PolicyParams& ref_params,
                          std::span<const PreferencePair> pairs, double beta);

/// n_steps episodes: draw a trajectory, build its pairs against the frozen
/// reference, take one SGD step on the episode's mean DPO loss.
/// Logs step, loss, margin, running_margin. Built pairs are appended to
/// `pair_log` when given.
PolicyParams train_dpo(PolicyParams params, const PolicyParams& ref_params,
                       std::span<const Trajectory> trajectories, const TrainConfig& cfg,
                       MetricsLog* log = nullptr, std::vector<PreferencePair>* pair_log = nullptr);

struct PpoSample {
  Observation observation;
  std::string action_id;
  double ret = 0.0;
};

struct PpoLoss {
  double total = 0.0;
  double policy = 0.0;     // mean of -min(z A, clip(z, 1-eps, 1+eps) A)
  double value = 0.0;      // mean (V - R)^2, unweighted
  double entropy = 0.0;    // mean H, unweighted
  double imitation = 0.0;  // mean -ln pi(a | o), unweighted
  Gradient grad;
};

/// min(z A, clip(z, 1 - eps, 1 + eps) A).
double clipped_surrogate(double ratio, double advantage, double epsilon);

/// total = policy + c_value * value - c_entropy * entropy + c_il * imitation.
/// Advantages use the value head of `old_params`, held constant.
/// Throws ParameterError on an empty batch.
PpoLoss ppo_loss_and_grad(const PolicyParams& params, const PolicyParams& old_params,
                          std::span<const PpoSample> batch, const TrainConfig& cfg);

/// Alternates on-policy collection of batch_size sampled episodes (R_t = final
/// reward) with ppo_epochs full-batch gradient steps, until n_steps gradient
/// steps are spent. Logs step, total, policy, value, entropy, imitation,
/// batch_reward. Throws ParameterError on an empty goal list.
PolicyParams train_ppo(PolicyParams params, const Env& env, std::span<const Goal> goals,
                       const TrainConfig& cfg, MetricsLog* log = nullptr);

}  // namespace shoprl

#include "shoprl/train.hpp"

#include <algorithm>
#include <cmath>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct EncodedStep {
  EncodedObservation enc;
  std::size_t action = 0;
};

struct EncodedPpoSample {
  EncodedObservation enc;
  std::size_t action = 0;
  double ret = 0.0;
  double old_logprob = 0.0;
  double old_value = 0.0;
};

EncodedPpoSample encode_sample(const PolicyParams& old_params, const Observation& obs,
                               std::string_view action, double ret) {
  EncodedPpoSample s;
  s.enc = encode(obs, old_params.d);
  const auto fwd = forward(old_params, s.enc);
  s.action = fwd.dist.index_of(action);
  s.ret = ret;
  s.old_logprob = fwd.dist.logprobs[s.action];
  s.old_value = fwd.value;
  return s;
}

PpoLoss ppo_loss_encoded(const PolicyParams& params, std::span<const EncodedPpoSample> batch,
                         const TrainConfig& cfg) {
  PpoLoss out;
  out.grad = Gradient(params.d, params.k);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : batch) {
    const auto fwd = forward(params, s.enc);
    const auto& dist = fwd.dist;
    const double logprob = dist.logprobs[s.action];
    const double ratio = std::exp(logprob - s.old_logprob);
    const double adv = s.ret - s.old_value;
    const double unclipped = ratio * adv;
    const double surrogate = clipped_surrogate(ratio, adv, cfg.epsilon);
    const double entropy = dist.entropy();

    out.policy -= surrogate * inv_n;
    out.value += (fwd.value - s.ret) * (fwd.value - s.ret) * inv_n;
    out.entropy += entropy * inv_n;
    out.imitation -= logprob * inv_n;

    // The surrogate is flat in theta when the clipped branch is the minimum.
    const double surrogate_weight = unclipped <= surrogate ? -adv * ratio : 0.0;
    const double lp_weight = surrogate_weight - cfg.c_il;
    auto dlogits = logprob_dlogits(dist, s.action);
    const auto dent = entropy_dlogits(dist);
    for (std::size_t a = 0; a < dlogits.size(); ++a) {
      dlogits[a] = lp_weight * dlogits[a] - cfg.c_entropy * dent[a];
    }
    accumulate_logit_grad(s.enc, fwd, dlogits, inv_n, out.grad);

    const double dv = 2.0 * cfg.c_value * (fwd.value - s.ret) * inv_n;
    for (std::size_t n = 0; n < s.enc.obs.nnz(); ++n) {
      out.grad.add_v(s.enc.obs.index[n], dv * s.enc.obs.value[n]);
    }
  }
  out.total = out.policy + cfg.c_value * out.value - cfg.c_entropy * out.entropy +
              cfg.c_il * out.imitation;
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
  if (!(beta > 0.0)) throw ParameterError("beta must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must be in (0, 1)");
  if (batch_size < 1) throw ParameterError("batch_size must be >= 1");
  if (ppo_epochs < 1) throw ParameterError("ppo_epochs must be >= 1");
}

PolicyParams train_il(PolicyParams params, std::span<const Trajectory> trajectories,
                      const TrainConfig& cfg, MetricsLog* log) {
  if (trajectories.empty()) throw ParameterError("train_il: no trajectories");
  cfg.validate();
  if (log && log->columns.empty()) log->columns = {"step", "loss"};

  std::vector<EncodedStep> steps;
  for (const auto& traj : trajectories) {
    for (const auto& st : traj.steps) {
      if (st.observation.available_actions.size() < 2) continue;
      EncodedStep e;
      e.enc = encode(st.observation, params.d);
      e.action = static_cast<std::size_t>(
          std::find(e.enc.action_ids.begin(), e.enc.action_ids.end(), st.action_id) -
          e.enc.action_ids.begin());
      if (e.action == e.enc.action_ids.size()) {
        throw InvalidActionError("train_il: demonstrated action '" + st.action_id +
                                 "' is not available");
      }
      steps.push_back(std::move(e));
    }
  }
  if (steps.empty() || cfg.n_steps == 0) return params;

  Rng rng(cfg.seed);
  const double inv_b = 1.0 / static_cast<double>(cfg.batch_size);
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    Gradient grad(params.d, params.k);
    double loss = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const auto& s = steps[rng.index(steps.size())];
      const auto fwd = forward(params, s.enc);
      loss -= fwd.dist.logprobs[s.action] * inv_b;
      accumulate_logit_grad(s.enc, fwd, logprob_dlogits(fwd.dist, s.action), -inv_b, grad);
    }
    grad.apply(params, cfg.learning_rate);
    if (log) log->add({static_cast<double>(step), loss});
  }
  params.seed_lineage.push_back("il:" + std::to_string(cfg.seed));
  return params;
}

double bt_preference_prob(double reward_preferred, double reward_dispreferred) {
  const double diff = reward_preferred - reward_dispreferred;
  // Evaluate on the non-negative side and complement, so P(a>b) + P(b>a) == 1.
  if (diff >= 0.0) return 1.0 / (1.0 + std::exp(-diff));
  return 1.0 - 1.0 / (1.0 + std::exp(diff));
}

std::vector<PreferencePair> build_preference_pairs(const Trajectory& traj,
                                                   const PolicyParams& ref_params, Rng& rng) {
  if (traj.source == TrajectorySource::Policy) {
    throw ParameterError("build_preference_pairs: trajectory must come from the oracle or self-play");
  }
  std::vector<PreferencePair> pairs;
  for (const auto& st : traj.steps) {
    const auto& obs = st.observation;
    if (obs.available_actions.size() < 2) continue;
    const auto dist = action_distribution(ref_params, obs);
    const std::size_t chosen = dist.index_of(st.action_id);

    double mass = 0.0;
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
      if (i != chosen) mass += dist.probs[i];
    }
    const double u = rng.uniform() * mass;
    double cum = 0.0;
    std::size_t pick = dist.probs.size();
    for (std::size_t i = 0; i < dist.probs.size(); ++i) {
      if (i == chosen) continue;
      cum += dist.probs[i];
      pick = i;
      if (u < cum) break;
    }
    pairs.push_back({obs, st.action_id, dist.action_ids[pick]});
  }
  return pairs;
}

DpoLoss dpo_loss_and_grad(const PolicyParams& params, const PolicyParams& ref_params,
                          std::span<const PreferencePair> pairs, double beta) {
  if (pairs.empty()) throw ParameterError("dpo_loss_and_grad: no preference pairs");
  DpoLoss out;
  out.grad = Gradient(params.d, params.k);
  const double inv_n = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pair : pairs) {
    const auto enc = encode(pair.observation, params.d);
    const auto fwd = forward(params, enc);
    const auto ref = forward(ref_params, enc);
    const std::size_t w = fwd.dist.index_of(pair.preferred);
    const std::size_t l = fwd.dist.index_of(pair.dispreferred);
    if (w == l) throw ParameterError("preference pair with identical actions");

    const double margin = (fwd.dist.logprobs[w] - ref.dist.logprobs[w]) -
                          (fwd.dist.logprobs[l] - ref.dist.logprobs[l]);
    const double h = beta * margin;
    out.loss += softplus(-h) * inv_n;
    out.margin += margin * inv_n;

    // d/dlogits of ln pi(w) - ln pi(l) is e_w - e_l; the softmax terms cancel.
    std::vector<double> dlogits(fwd.dist.probs.size(), 0.0);
    const double coeff = -sigmoid(-h) * beta;
    dlogits[w] = coeff;
    dlogits[l] = -coeff;
    accumulate_logit_grad(enc, fwd, dlogits, inv_n, out.grad);
  }
  return out;
}

PolicyParams train_dpo(PolicyParams params, const PolicyParams& ref_params,
                       std::span<const Trajectory> trajectories, const TrainConfig& cfg,
                       MetricsLog* log, std::vector<PreferencePair>* pair_log) {
  if (trajectories.empty()) throw ParameterError("train_dpo: no trajectories");
  cfg.validate();
  if (params.d != ref_params.d || params.k != ref_params.k) {
    throw ParameterError("train_dpo: policy and reference shapes differ");
  }
  if (log && log->columns.empty()) log->columns = {"step", "loss", "margin", "running_margin"};
  if (cfg.n_steps == 0) return params;

  Rng rng(cfg.seed);
  double running = 0.0;
  std::size_t updates = 0;
  for (std::size_t episode = 0; episode < cfg.n_steps; ++episode) {
    const auto& traj = trajectories[rng.index(trajectories.size())];
    auto pairs = build_preference_pairs(traj, ref_params, rng);
    if (pairs.empty()) continue;
    auto res = dpo_loss_and_grad(params, ref_params, pairs, cfg.beta);
    res.grad.apply(params, cfg.learning_rate);
    ++updates;
    running += (res.margin - running) / static_cast<double>(updates);
    if (log) log->add({static_cast<double>(episode), res.loss, res.margin, running});
    if (pair_log) {
      for (auto& p : pairs) pair_log->push_back(std::move(p));
    }
  }
  params.seed_lineage.push_back("dpo:" + std::to_string(cfg.seed));
  return params;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

PpoLoss ppo_loss_and_grad(const PolicyParams& params, const PolicyParams& old_params,
                          std::span<const PpoSample> batch, const TrainConfig& cfg) {
  if (batch.empty()) throw ParameterError("ppo_loss_and_grad: empty batch");
  std::vector<EncodedPpoSample> enc;
  enc.reserve(batch.size());
  for (const auto& s : batch) enc.push_back(encode_sample(old_params, s.observation, s.action_id, s.ret));
  return ppo_loss_encoded(params, enc, cfg);
}

PolicyParams train_ppo(PolicyParams params, const Env& env, std::span<const Goal> goals,
                       const TrainConfig& cfg, MetricsLog* log) {
  if (goals.empty()) throw ParameterError("train_ppo: no goals");
  cfg.validate();
  if (log && log->columns.empty()) {
    log->columns = {"step", "total", "policy", "value", "entropy", "imitation", "batch_reward"};
  }
  if (cfg.n_steps == 0) return params;

  Rng goal_rng(derive_seed(cfg.seed, "goals"));
  const std::uint64_t episode_seed = derive_seed(cfg.seed, "episodes");
  std::uint64_t episode = 0;
  std::size_t steps_done = 0;
  while (steps_done < cfg.n_steps) {
    const PolicyParams old_params = params;

    std::vector<EncodedPpoSample> batch;
    double reward_sum = 0.0;
    for (std::size_t e = 0; e < cfg.batch_size; ++e) {
      const Goal& goal = goals[goal_rng.index(goals.size())];
      Rng ep_rng(derive_seed(episode_seed, episode++));
      auto traj = run_episode(
          env, goal,
          [&](const Observation& obs) {
            return sample_action(action_distribution(old_params, obs), ep_rng);
          },
          TrajectorySource::Policy);
      reward_sum += traj.final_reward;
      for (const auto& st : traj.steps) {
        batch.push_back(encode_sample(old_params, st.observation, st.action_id, traj.final_reward));
      }
    }
    const double batch_reward = reward_sum / static_cast<double>(cfg.batch_size);

    for (std::size_t epoch = 0; epoch < cfg.ppo_epochs && steps_done < cfg.n_steps; ++epoch) {
      auto res = ppo_loss_encoded(params, batch, cfg);
      res.grad.apply(params, cfg.learning_rate);
      if (log) {
        log->add({static_cast<double>(steps_done), res.total, res.policy, res.value, res.entropy,
                  res.imitation, batch_reward});
      }
      ++steps_done;
    }
  }
  params.seed_lineage.push_back("ppo:" + std::to_string(cfg.seed));
  return params;
}

}  // namespace shoprl

#include "shoprl/eval.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd population_stats(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(var / static_cast<double>(xs.size()));
  return out;
}

std::string fmt(double x, const char* spec = "%.4f") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

}  // namespace

void ArmStats::record(bool success, double score) {
  ++pulls;
  if (success) {
    ++successes;
    alpha += 1.0;
  } else {
    beta_param += 1.0;
  }
  score_sum += score;
  score_sq_sum += score * score;
}

bool ArmStats::consistent() const {
  return successes <= pulls && alpha == 1.0 + static_cast<double>(successes) &&
         beta_param == 1.0 + static_cast<double>(pulls - successes);
}

RolloutOutcome rollout(const PolicyParams& params, const Env& env, const Goal& goal) {
  auto traj = run_episode(
      env, goal, [&](const Observation& obs) { return greedy_action(action_distribution(params, obs)); },
      TrajectorySource::Policy);
  return {traj.final_reward, traj.final_reward == 1.0, traj.steps.size()};
}

std::vector<ArmStats> thompson_run(std::span<const std::string> labels, const PullFn& pull,
                                   std::size_t n_rollouts, Rng& rng) {
  if (labels.empty()) throw ParameterError("thompson_run: no arms");
  if (n_rollouts < 1) throw ParameterError("thompson_run: n_rollouts must be >= 1");
  std::vector<ArmStats> arms;
  for (const auto& l : labels) arms.push_back(ArmStats{.label = l});
  for (std::size_t t = 0; t < n_rollouts; ++t) {
    std::size_t best = 0;
    double best_draw = -1.0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const double draw = rng.beta(arms[i].alpha, arms[i].beta_param);
      if (draw > best_draw) {
        best_draw = draw;
        best = i;
      }
    }
    const auto outcome = pull(best, rng);
    arms[best].record(outcome.success, outcome.score);
  }
  return arms;
}

std::vector<ArmStats> thompson_run(std::span<const Agent> agents, const Env& env,
                                   std::span<const Goal> goals, std::size_t n_rollouts, Rng& rng) {
  if (agents.empty()) throw ParameterError("thompson_run: no agents");
  if (goals.empty()) throw ParameterError("thompson_run: no goals");
  std::vector<std::string> labels;
  for (const auto& a : agents) labels.push_back(a.label);
  // Greedy rollouts are deterministic per (agent, goal).
  std::map<std::pair<std::size_t, std::size_t>, RolloutOutcome> cache;
  return thompson_run(
      labels,
      [&](std::size_t arm, Rng& r) {
        const std::size_t g = r.index(goals.size());
        auto it = cache.find({arm, g});
        if (it == cache.end()) {
          it = cache.emplace(std::pair{arm, g}, rollout(*agents[arm].params, env, goals[g])).first;
        }
        return it->second;
      },
      n_rollouts, rng);
}

std::vector<std::vector<ArmStats>> thompson_experiment(std::span<const Agent> agents, const Env& env,
                                                       std::span<const Goal> goals,
                                                       std::size_t n_runs, std::size_t n_rollouts,
                                                       std::uint64_t seed) {
  std::vector<std::vector<ArmStats>> runs;
  for (std::size_t r = 0; r < n_runs; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    runs.push_back(thompson_run(agents, env, goals, n_rollouts, rng));
  }
  return runs;
}

const AgentSummary& EvalReport::agent(const std::string& label) const {
  for (const auto& a : agents) {
    if (a.label == label) return a;
  }
  throw NotFoundError("no agent '" + label + "' in report");
}

EvalReport aggregate_runs(const std::vector<std::vector<ArmStats>>& run_results) {
  if (run_results.empty()) throw ParameterError("aggregate_runs: no runs");
  const auto& first = run_results.front();
  for (const auto& run : run_results) {
    bool same = run.size() == first.size();
    for (std::size_t i = 0; same && i < run.size(); ++i) same = run[i].label == first[i].label;
    if (!same) throw ParameterError("aggregate_runs: runs disagree on agent labels");
  }

  EvalReport report;
  report.runs = run_results.size();
  for (const auto& arm : first) report.rollouts_per_run += arm.pulls;
  for (std::size_t i = 0; i < first.size(); ++i) {
    AgentSummary s;
    s.label = first[i].label;
    std::vector<double> rates, scores;
    for (const auto& run : run_results) {
      const auto& arm = run[i];
      s.pulls_per_run.push_back(arm.pulls);
      if (arm.pulls == 0) {
        ++s.excluded_runs;
        continue;
      }
      rates.push_back(static_cast<double>(arm.successes) / static_cast<double>(arm.pulls));
      scores.push_back(arm.score_sum / static_cast<double>(arm.pulls));
    }
    const auto r = population_stats(rates);
    const auto sc = population_stats(scores);
    s.success_rate = r.mean;
    s.success_std = r.std;
    s.mean_score = sc.mean;
    s.score_std = sc.std;
    report.agents.push_back(std::move(s));
  }
  return report;
}

void write_runs_csv(std::ostream& os, const std::vector<std::vector<ArmStats>>& run_results) {
  os << "agent,run,pulls,successes,success_rate,mean_score\n";
  for (std::size_t r = 0; r < run_results.size(); ++r) {
    for (const auto& arm : run_results[r]) {
      const double pulls = static_cast<double>(arm.pulls);
      const double rate = arm.pulls ? static_cast<double>(arm.successes) / pulls : 0.0;
      const double mean = arm.pulls ? arm.score_sum / pulls : 0.0;
      os << arm.label << "," << r << "," << arm.pulls << "," << arm.successes << ","
         << fmt(rate, "%.17g") << "," << fmt(mean, "%.17g") << "\n";
    }
  }
}

std::vector<std::vector<ArmStats>> read_runs_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "agent,run,pulls,successes,success_rate,mean_score") {
    throw FormatError("runs CSV: unexpected header");
  }
  std::vector<std::vector<ArmStats>> runs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw FormatError("runs CSV: expected 6 columns in '" + line + "'");
    try {
      const std::size_t run = std::stoul(cells[1]);
      ArmStats arm;
      arm.label = cells[0];
      arm.pulls = std::stoul(cells[2]);
      arm.successes = std::stoul(cells[3]);
      if (arm.successes > arm.pulls) throw FormatError("runs CSV: successes exceed pulls");
      arm.alpha = 1.0 + static_cast<double>(arm.successes);
      arm.beta_param = 1.0 + static_cast<double>(arm.pulls - arm.successes);
      arm.score_sum = std::stod(cells[5]) * static_cast<double>(arm.pulls);
      if (run >= runs.size()) runs.resize(run + 1);
      runs[run].push_back(std::move(arm));
    } catch (const std::logic_error&) {
      throw FormatError("runs CSV: bad number in '" + line + "'");
    }
  }
  return runs;
}

std::string render_markdown(const EvalReport& report, const std::string& title) {
  std::ostringstream os;
  os << "## " << title << "\n\n";
  os << report.runs << " Thompson-sampling runs x " << report.rollouts_per_run
     << " rollouts.\n\n";
  os << "| agent | score (mean +- std) | success rate (mean +- std) | pulls per run |\n";
  os << "|---|---|---|---|\n";
  for (const auto& a : report.agents) {
    os << "| " << a.label << " | " << fmt(a.mean_score) << " +- " << fmt(a.score_std) << " | "
       << fmt(a.success_rate) << " +- " << fmt(a.success_std) << " | ";
    for (std::size_t i = 0; i < a.pulls_per_run.size(); ++i) {
      os << (i ? " " : "") << a.pulls_per_run[i];
    }
    if (a.excluded_runs) os << " (" << a.excluded_runs << " runs unpulled)";
    os << " |\n";
  }
  return os.str();
}

}  // namespace shoprl

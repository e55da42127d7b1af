#include "shoprl/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shoprl/io.hpp"
#include "shoprl/search.hpp"
#include "shoprl/selfplay.hpp"

namespace shoprl {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kManifest = "manifest.json";

class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config: '" + name_ + "' must be an object");
  }

  void get(const char* key, std::size_t& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw type_error(key, "a non-negative integer");
      dst = v->get<std::size_t>();
    }
  }
  void get_u64(const char* key, std::uint64_t& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw type_error(key, "a non-negative integer");
      dst = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, double& dst) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw type_error(key, "a number");
      dst = v->get<double>();
    }
  }
  void get(const char* key, bool& dst) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw type_error(key, "a boolean");
      dst = v->get<bool>();
    }
  }
  void get(const char* key, std::string& dst) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw type_error(key, "a string");
      dst = v->get<std::string>();
    }
  }
  void get(const char* key, OptionMap& dst) {
    if (const json* v = find(key)) {
      OptionMap m;
      if (!v->is_object()) throw type_error(key, "an object of string lists");
      for (const auto& [name, values] : v->items()) {
        if (!values.is_array()) throw type_error(key, "an object of string lists");
        for (const auto& x : values) {
          if (!x.is_string()) throw type_error(key, "an object of string lists");
          m[name].push_back(x.get<std::string>());
        }
      }
      dst = std::move(m);
    }
  }
  const json* section(const char* key) { return find(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("config: unknown key '" + prefix() + key + "'");
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }
  ConfigError type_error(const char* key, const char* expected) const {
    return ConfigError("config: '" + prefix() + key + "' must be " + expected);
  }

  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void parse_train(Section& top, const char* name, TrainConfig& cfg) {
  const json* j = top.section(name);
  if (!j) return;
  Section s(*j, name);
  s.get("learning_rate", cfg.learning_rate);
  s.get("beta", cfg.beta);
  s.get("epsilon", cfg.epsilon);
  s.get("c_value", cfg.c_value);
  s.get("c_entropy", cfg.c_entropy);
  s.get("c_il", cfg.c_il);
  s.get("batch_size", cfg.batch_size);
  s.get("n_steps", cfg.n_steps);
  s.get("ppo_epochs", cfg.ppo_epochs);
  s.finish();
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + name + ": " + e.what());
  }
  if (cfg.batch_size < 1) throw ConfigError(std::string("config: ") + name + ".batch_size must be >= 1");
}

json train_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["beta"] = c.beta;
  j["epsilon"] = c.epsilon;
  j["c_value"] = c.c_value;
  j["c_entropy"] = c.c_entropy;
  j["c_il"] = c.c_il;
  j["batch_size"] = c.batch_size;
  j["n_steps"] = c.n_steps;
  j["ppo_epochs"] = c.ppo_epochs;
  return j;
}

void require_positive(std::size_t value, const char* key) {
  if (value < 1) throw ConfigError(std::string("config: '") + key + "' must be >= 1");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  out << text;
}

const fs::path& require_input(const fs::path& path, std::string_view what, std::string_view producer) {
  if (!fs::is_regular_file(path)) {
    throw MissingInputError("missing " + std::string(what) + " '" + path.string() + "' (produced by " +
                            std::string(producer) + ")");
  }
  return path;
}

/// Catalog, index and environment loaded from an output directory. Env keeps
/// pointers into the other two members, so a World never moves.
struct World {
  Catalog catalog;
  SearchIndex index;
  Env env;

  World(Catalog c, std::size_t max_steps)
      : catalog(std::move(c)), index(build_index(catalog)), env(catalog, index, EnvConfig{max_steps}) {}
  World(const World&) = delete;
  World& operator=(const World&) = delete;
};

json report_json(const EvalReport& r) {
  json j;
  j["v"] = 1;
  j["runs"] = r.runs;
  j["rollouts_per_run"] = r.rollouts_per_run;
  json agents = json::array();
  for (const auto& a : r.agents) {
    json x;
    x["label"] = a.label;
    x["mean_score"] = a.mean_score;
    x["score_std"] = a.score_std;
    x["success_rate"] = a.success_rate;
    x["success_std"] = a.success_std;
    x["pulls_per_run"] = a.pulls_per_run;
    x["excluded_runs"] = a.excluded_runs;
    agents.push_back(std::move(x));
  }
  j["agents"] = std::move(agents);
  return j;
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.il.n_steps = 2000;
  cfg.ppo.n_steps = 3000;
  cfg.dpo.n_steps = 3000;

  Section top(j, "");
  if (!j.is_object() || !j.contains("master_seed")) throw ConfigError("config: 'master_seed' is required");
  top.get_u64("master_seed", cfg.master_seed);
  std::string out_dir = cfg.output_dir.string();
  top.get("output_dir", out_dir);
  cfg.output_dir = out_dir;

  if (const json* s = top.section("catalog")) {
    Section c(*s, "catalog");
    c.get("n_products", cfg.n_products);
    c.get("n_categories", cfg.n_categories);
    c.get("attr_vocab_size", cfg.attr_vocab_size);
    c.get("option_vocab", cfg.option_vocab);
    c.finish();
  }
  if (const json* s = top.section("goals")) {
    Section c(*s, "goals");
    c.get("n_train", cfg.n_train_goals);
    c.get("n_eval", cfg.n_eval_goals);
    c.finish();
  }
  if (const json* s = top.section("env")) {
    Section c(*s, "env");
    c.get("max_steps", cfg.max_steps);
    c.finish();
  }
  if (const json* s = top.section("oracle")) {
    Section c(*s, "oracle");
    c.get("noise", cfg.oracle_noise);
    c.get("n_trajectories", cfg.n_oracle_trajectories);
    c.finish();
  }
  if (const json* s = top.section("policy")) {
    Section c(*s, "policy");
    c.get("d", cfg.d);
    c.get("k", cfg.k);
    c.finish();
  }
  parse_train(top, "il", cfg.il);
  parse_train(top, "ppo", cfg.ppo);
  parse_train(top, "dpo", cfg.dpo);
  if (const json* s = top.section("selfplay")) {
    Section c(*s, "selfplay");
    c.get("n", cfg.selfplay_n);
    c.get("max_attempts", cfg.selfplay_max_attempts);
    c.get("prune", cfg.selfplay_prune);
    c.finish();
  }
  if (const json* s = top.section("eval")) {
    Section c(*s, "eval");
    c.get("runs", cfg.eval_runs);
    c.get("rollouts", cfg.eval_rollouts);
    c.finish();
  }
  top.finish();

  require_positive(cfg.n_products, "catalog.n_products");
  require_positive(cfg.n_categories, "catalog.n_categories");
  require_positive(cfg.attr_vocab_size, "catalog.attr_vocab_size");
  require_positive(cfg.n_train_goals, "goals.n_train");
  require_positive(cfg.n_eval_goals, "goals.n_eval");
  require_positive(cfg.max_steps, "env.max_steps");
  require_positive(cfg.n_oracle_trajectories, "oracle.n_trajectories");
  require_positive(cfg.k, "policy.k");
  require_positive(cfg.selfplay_n, "selfplay.n");
  require_positive(cfg.eval_runs, "eval.runs");
  require_positive(cfg.eval_rollouts, "eval.rollouts");
  if (cfg.d < 1 || (cfg.d & (cfg.d - 1)) != 0) throw ConfigError("config: 'policy.d' must be a power of two");
  if (!(cfg.oracle_noise >= 0.0 && cfg.oracle_noise <= 1.0)) {
    throw ConfigError("config: 'oracle.noise' must be in [0, 1]");
  }
  if (cfg.selfplay_max_attempts < cfg.selfplay_n) {
    throw ConfigError("config: 'selfplay.max_attempts' must be >= 'selfplay.n'");
  }
  for (const auto& [name, values] : cfg.option_vocab) {
    if (values.empty()) throw ConfigError("config: option '" + name + "' has no values");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingInputError("missing config file '" + path.string() + "'");
  return parse_config(read_text(path));
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["master_seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir.generic_string();
  j["catalog"] = {{"n_products", cfg.n_products},
                  {"n_categories", cfg.n_categories},
                  {"attr_vocab_size", cfg.attr_vocab_size},
                  {"option_vocab", cfg.option_vocab}};
  j["goals"] = {{"n_train", cfg.n_train_goals}, {"n_eval", cfg.n_eval_goals}};
  j["env"] = {{"max_steps", cfg.max_steps}};
  j["oracle"] = {{"noise", cfg.oracle_noise}, {"n_trajectories", cfg.n_oracle_trajectories}};
  j["policy"] = {{"d", cfg.d}, {"k", cfg.k}};
  j["il"] = train_json(cfg.il);
  j["ppo"] = train_json(cfg.ppo);
  j["dpo"] = train_json(cfg.dpo);
  j["selfplay"] = {{"n", cfg.selfplay_n},
                   {"max_attempts", cfg.selfplay_max_attempts},
                   {"prune", cfg.selfplay_prune}};
  j["eval"] = {{"runs", cfg.eval_runs}, {"rollouts", cfg.eval_rollouts}};
  return j.dump(2) + "\n";
}

std::uint64_t stage_seed(const ExperimentConfig& cfg, std::string_view stage) {
  return derive_seed(cfg.master_seed, stage);
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + file.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest init failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::vector<ManifestEntry> scan_artifacts(const fs::path& dir) {
  std::vector<ManifestEntry> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir).generic_string();
    if (rel == kManifest) continue;
    out.push_back({rel, sha256_hex(e.path()), e.file_size()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

void write_manifest(const fs::path& dir) {
  json arts = json::array();
  for (const auto& a : scan_artifacts(dir)) {
    arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  }
  json j;
  j["v"] = 1;
  j["artifacts"] = std::move(arts);
  write_text(dir / kManifest, j.dump(2) + "\n");
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  const auto text = read_text(require_input(dir / kManifest, "manifest", "any subcommand"));
  try {
    const auto j = json::parse(text);
    std::vector<ManifestEntry> out;
    for (const auto& a : j.at("artifacts")) {
      out.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                     a.at("bytes").get<std::uintmax_t>()});
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

Pipeline::Pipeline(ExperimentConfig cfg, fs::path out_dir, std::ostream& log)
    : cfg_(std::move(cfg)), out_(std::move(out_dir)), log_(&log) {
  fs::create_directories(out_);
}

void Pipeline::finish(std::string_view stage) {
  write_text(path("config.json"), dump_config(cfg_));
  write_manifest(out_);
  *log_ << "[" << stage << "] done\n";
}

namespace {

std::unique_ptr<World> load_world(const Pipeline& p) {
  auto catalog = read_catalog(require_input(p.path("catalog.jsonl"), "catalog", "gen-catalog"));
  return std::make_unique<World>(std::move(catalog), p.config().max_steps);
}

std::vector<Goal> load_goals(const Pipeline& p, const char* file) {
  return read_goals(require_input(p.path(file), "goals", "gen-goals"));
}

PolicyParams load_policy(const fs::path& path, std::string_view what) {
  return read_checkpoint(require_input(path, what, "a train-* subcommand"));
}

void write_metrics(const fs::path& path, const MetricsLog& log) {
  std::ostringstream ss;
  log.write_csv(ss);
  write_text(path, ss.str());
}

}  // namespace

void Pipeline::gen_catalog() {
  const auto catalog = generate_catalog(stage_seed(cfg_, "catalog"), cfg_.n_products, cfg_.n_categories,
                                        cfg_.attr_vocab_size, cfg_.option_vocab);
  write_catalog(path("catalog.jsonl"), catalog);
  *log_ << "[gen-catalog] " << catalog.products.size() << " products, " << catalog.categories.size()
        << " categories\n";
  finish("gen-catalog");
}

void Pipeline::gen_goals() {
  const auto world = load_world(*this);
  const std::size_t want = cfg_.n_train_goals + cfg_.n_eval_goals;
  // Goals whose canonical query surfaces no perfect product are unsolvable
  // by every agent; they are dropped and ids are reassigned densely.
  const auto drawn = generate_goals(world->catalog, stage_seed(cfg_, "goals"), 2 * want);
  std::vector<Goal> kept;
  std::size_t dropped = 0;
  for (const auto& g : drawn) {
    if (kept.size() == want) break;
    if (!oracle_can_solve(g, world->env)) {
      ++dropped;
      continue;
    }
    kept.push_back(g);
    kept.back().id = static_cast<GoalId>(kept.size() - 1);
  }
  if (kept.size() < want) {
    throw GenerationError("gen-goals: only " + std::to_string(kept.size()) + " of " + std::to_string(want) +
                          " goals are solvable from their search results");
  }
  const std::span<const Goal> all(kept);
  write_goals(path("goals.jsonl"), all.first(cfg_.n_train_goals));
  write_goals(path("eval_goals.jsonl"), all.subspan(cfg_.n_train_goals));
  *log_ << "[gen-goals] " << cfg_.n_train_goals << " train, " << cfg_.n_eval_goals << " eval goals ("
        << dropped << " unsolvable draws skipped)\n";
  finish("gen-goals");
}

void Pipeline::gen_oracle() {
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "goals.jsonl");
  OracleConfig oc{cfg_.oracle_noise, stage_seed(cfg_, "oracle")};
  const auto trajs = generate_oracle_trajectories(goals, world->env, oc, cfg_.n_oracle_trajectories);
  double reward = 0.0;
  for (const auto& t : trajs) reward += t.final_reward;
  write_trajectories(path("oracle.jsonl"), trajs);
  *log_ << "[gen-oracle] " << trajs.size() << " trajectories, mean reward "
        << reward / static_cast<double>(trajs.size()) << "\n";
  finish("gen-oracle");
}

void Pipeline::train_il(const fs::path& trajectories) {
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "goals.jsonl");
  const auto trajs =
      read_trajectories(require_input(trajectories, "trajectories", "gen-oracle"), world->env, goals);
  auto cfg = cfg_.il;
  cfg.seed = stage_seed(cfg_, "train-il");
  MetricsLog log;
  auto params = shoprl::train_il(PolicyParams::init(cfg_.d, cfg_.k, stage_seed(cfg_, "policy-init")), trajs,
                                 cfg, &log);
  write_checkpoint(path("checkpoints/il.json"), params);
  write_metrics(path("metrics/il.csv"), log);
  *log_ << "[train-il] " << cfg.n_steps << " steps, loss " << log.mean_head(1, 50) << " -> "
        << log.mean_tail(1, 50) << "\n";
  finish("train-il");
}

void Pipeline::train_ppo(const fs::path& init) {
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "goals.jsonl");
  auto params = load_policy(init, "initial checkpoint");
  auto cfg = cfg_.ppo;
  cfg.seed = stage_seed(cfg_, "train-ppo");
  MetricsLog log;
  params = shoprl::train_ppo(std::move(params), world->env, goals, cfg, &log);
  write_checkpoint(path("checkpoints/ppo.json"), params);
  write_metrics(path("metrics/ppo.csv"), log);
  *log_ << "[train-ppo] " << cfg.n_steps << " steps, batch reward " << log.mean_head(6, 50) << " -> "
        << log.mean_tail(6, 50) << "\n";
  finish("train-ppo");
}

void Pipeline::train_dpo(const fs::path& trajectories, const fs::path& ref, const std::string& name) {
  if (name.empty() || name.find_first_of("/\\. ") != std::string::npos) {
    throw ConfigError("train-dpo: invalid run name '" + name + "'");
  }
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "goals.jsonl");
  const auto ref_params = load_policy(ref, "reference checkpoint");
  const auto trajs = read_trajectories(require_input(trajectories, "trajectories", "gen-oracle or gen-selfplay"),
                                       world->env, goals);
  auto cfg = cfg_.dpo;
  cfg.seed = stage_seed(cfg_, "train-dpo:" + name);
  MetricsLog log;
  std::vector<PreferencePair> pairs;
  const auto params = shoprl::train_dpo(ref_params, ref_params, trajs, cfg, &log, &pairs);
  write_checkpoint(path("checkpoints/" + name + ".json"), params);
  write_metrics(path("metrics/" + name + ".csv"), log);
  write_pairs(path("pairs/" + name + ".jsonl"), pairs);
  *log_ << "[train-dpo] " << name << ": " << cfg.n_steps << " episodes on " << trajs.size()
        << " trajectories, loss " << log.mean_head(1, 50) << " -> " << log.mean_tail(1, 50) << "\n";
  finish("train-dpo");
}

void Pipeline::gen_selfplay(const fs::path& policy) {
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "goals.jsonl");
  const auto params = load_policy(policy, "policy checkpoint");
  Rng rng(stage_seed(cfg_, "gen-selfplay"));
  SelfplayStats stats;
  const auto trajs = generate_perfect_trajectories(params, world->env, goals, cfg_.selfplay_n,
                                                   cfg_.selfplay_max_attempts, rng, cfg_.selfplay_prune, &stats);
  write_trajectories(path("selfplay.jsonl"), trajs);
  json j;
  j["v"] = 1;
  j["requested"] = cfg_.selfplay_n;
  j["kept"] = stats.kept;
  j["attempts"] = stats.attempts;
  j["steps_before_pruning"] = stats.steps_before_pruning;
  j["steps_after_pruning"] = stats.steps_after_pruning;
  write_text(path("selfplay_stats.json"), j.dump(2) + "\n");
  *log_ << "[gen-selfplay] kept " << stats.kept << " of " << stats.attempts << " attempts\n";
  if (trajs.empty()) throw GenerationError("gen-selfplay: no perfect-reward trajectory found");
  finish("gen-selfplay");
}

EvalReport Pipeline::eval_thompson(const std::vector<std::pair<std::string, fs::path>>& agents,
                                   const std::string& name) {
  if (agents.empty()) throw ConfigError("eval-thompson: at least one --agent is required");
  if (name.empty() || name.find_first_of("/\\. ") != std::string::npos) {
    throw ConfigError("eval-thompson: invalid experiment name '" + name + "'");
  }
  std::set<std::string> labels;
  for (const auto& [label, p] : agents) {
    if (label.empty() || label.find_first_of(", ") != std::string::npos || !labels.insert(label).second) {
      throw ConfigError("eval-thompson: agent labels must be unique, non-empty, without commas or spaces");
    }
  }
  const auto world = load_world(*this);
  const auto goals = load_goals(*this, "eval_goals.jsonl");
  std::vector<PolicyParams> params;
  for (const auto& [label, p] : agents) params.push_back(load_policy(p, "agent checkpoint"));
  std::vector<Agent> arms;
  for (std::size_t i = 0; i < agents.size(); ++i) arms.push_back({agents[i].first, &params[i]});

  const auto runs = thompson_experiment(arms, world->env, goals, cfg_.eval_runs, cfg_.eval_rollouts,
                                        stage_seed(cfg_, "eval-thompson:" + name));
  const auto report = aggregate_runs(runs);
  std::ostringstream csv;
  write_runs_csv(csv, runs);
  write_text(path("eval/" + name + "_runs.csv"), csv.str());
  write_text(path("eval/" + name + "_report.json"), report_json(report).dump(2) + "\n");
  for (const auto& a : report.agents) {
    *log_ << "[eval-thompson] " << name << " " << a.label << ": success " << a.success_rate << " +- "
          << a.success_std << ", score " << a.mean_score << "\n";
  }
  finish("eval-thompson");
  return report;
}

void Pipeline::report(const std::vector<fs::path>& run_csvs) {
  if (run_csvs.empty()) throw ConfigError("report: at least one --runs CSV is required");
  std::string md = "# Evaluation report\n\n";
  for (const auto& csv : run_csvs) {
    std::ifstream in(require_input(csv, "runs CSV", "eval-thompson"));
    const auto report = aggregate_runs(read_runs_csv(in));
    auto title = csv.stem().string();
    if (title.size() > 5 && title.ends_with("_runs")) title.resize(title.size() - 5);
    md += render_markdown(report, title) + "\n";
  }
  write_text(path("report.md"), md);
  *log_ << md;
  finish("report");
}

void Pipeline::repro() {
  gen_catalog();
  gen_goals();
  gen_oracle();
  train_il(path("oracle.jsonl"));
  train_ppo(path("checkpoints/il.json"));
  train_dpo(path("oracle.jsonl"), path("checkpoints/il.json"), "dpo_human");
  gen_selfplay(path("checkpoints/il.json"));
  train_dpo(path("selfplay.jsonl"), path("checkpoints/il.json"), "dpo_selfplay");
  eval_thompson({{"il", path("checkpoints/il.json")},
                 {"ppo", path("checkpoints/ppo.json")},
                 {"dpo_human", path("checkpoints/dpo_human.json")}},
                "algorithms");
  eval_thompson({{"dpo_human", path("checkpoints/dpo_human.json")},
                 {"dpo_selfplay", path("checkpoints/dpo_selfplay.json")}},
                "selfplay");
  report({path("eval/algorithms_runs.csv"), path("eval/selfplay_runs.csv")});
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Web-shopping agent training pipeline: IL, PPO and DPO on a simulated store", "shoprl"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
    sub->add_option("-o,--out", out_override, "Output directory (overrides the config)");
  };

  auto* gen_catalog = app.add_subcommand("gen-catalog", "Generate the synthetic product catalog");
  auto* gen_goals = app.add_subcommand("gen-goals", "Generate training and evaluation goals");
  auto* gen_oracle = app.add_subcommand("gen-oracle", "Generate oracle demonstration trajectories");
  auto* train_il = app.add_subcommand("train-il", "Imitation learning on demonstrations");
  auto* train_ppo = app.add_subcommand("train-ppo", "PPO fine-tuning from a checkpoint");
  auto* train_dpo = app.add_subcommand("train-dpo", "DPO fine-tuning against a reference checkpoint");
  auto* gen_selfplay = app.add_subcommand("gen-selfplay", "Harvest perfect-reward self-play trajectories");
  auto* eval = app.add_subcommand("eval-thompson", "Thompson-sampling evaluation of agents");
  auto* report = app.add_subcommand("report", "Summarize Thompson run CSVs as markdown");
  auto* repro = app.add_subcommand("repro", "Run the full pipeline from one config");
  for (auto* s : {gen_catalog, gen_goals, gen_oracle, train_il, train_ppo, train_dpo, gen_selfplay, eval,
                  report, repro}) {
    add_common(s);
  }

  std::string trajectories, ref, init, policy, name;
  std::vector<std::string> agent_specs, run_csvs;
  train_il->add_option("--trajectories", trajectories, "Demonstrations (default: <out>/oracle.jsonl)");
  train_ppo->add_option("--init", init, "Initial checkpoint (default: <out>/checkpoints/il.json)");
  train_dpo->add_option("--trajectories", trajectories, "Preferred trajectories")->required();
  train_dpo->add_option("--ref", ref, "Reference checkpoint (frozen; also the starting point)");
  train_dpo->add_option("--name", name, "Run name for outputs")->default_val("dpo");
  gen_selfplay->add_option("--policy", policy, "Sampling checkpoint (default: <out>/checkpoints/il.json)");
  eval->add_option("--agent", agent_specs, "label=checkpoint, repeatable")->required();
  eval->add_option("--name", name, "Experiment name for outputs")->default_val("thompson");
  report->add_option("--runs", run_csvs, "Runs CSV from eval-thompson, repeatable")->required();

  std::vector<std::string> argv_store;
  argv_store.emplace_back("shoprl");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = load_config(config_path);
    const fs::path out_dir = out_override.empty() ? cfg.output_dir : fs::path(out_override);
    Pipeline p(std::move(cfg), out_dir, err);
    auto or_default = [&](const std::string& given, const char* fallback) {
      return given.empty() ? p.path(fallback) : fs::path(given);
    };

    if (gen_catalog->parsed()) {
      p.gen_catalog();
    } else if (gen_goals->parsed()) {
      p.gen_goals();
    } else if (gen_oracle->parsed()) {
      p.gen_oracle();
    } else if (train_il->parsed()) {
      p.train_il(or_default(trajectories, "oracle.jsonl"));
    } else if (train_ppo->parsed()) {
      p.train_ppo(or_default(init, "checkpoints/il.json"));
    } else if (train_dpo->parsed()) {
      if (ref.empty()) {
        throw MissingInputError("train-dpo: missing reference checkpoint; pass --ref <checkpoint>");
      }
      p.train_dpo(trajectories, ref, name);
    } else if (gen_selfplay->parsed()) {
      p.gen_selfplay(or_default(policy, "checkpoints/il.json"));
    } else if (eval->parsed()) {
      std::vector<std::pair<std::string, fs::path>> agents;
      for (const auto& spec : agent_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("eval-thompson: --agent expects label=checkpoint");
        agents.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
      }
      p.eval_thompson(agents, name);
    } else if (report->parsed()) {
      std::vector<fs::path> csvs(run_csvs.begin(), run_csvs.end());
      p.report(csvs);
    } else if (repro->parsed()) {
      p.repro();
    }
    out << p.out_dir().string() << "\n";
    return 0;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const MissingInputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace shoprl

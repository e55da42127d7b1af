#include "shoprl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

using json = nlohmann::ordered_json;

constexpr int kVersion = 1;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFoundError("cannot write " + path.string());
  return out;
}

json parse_line(const std::string& line, const char* what) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("v") || j["v"] != kVersion) {
    throw FormatError(std::string(what) + ": missing or unsupported schema version");
  }
  return j;
}

template <typename F>
void for_each_line(std::istream& is, const char* what, F&& f) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, what);
    try {
      f(j);
    } catch (const json::exception& e) {
      throw FormatError(std::string(what) + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw FormatError("bad obs_key '" + s + "'");
  try {
    return std::stoull(s, nullptr, 16);
  } catch (const std::logic_error&) {
    throw FormatError("bad obs_key '" + s + "'");
  }
}

json to_json(const Product& p) {
  json j;
  j["v"] = kVersion;
  j["id"] = p.id;
  j["category"] = p.category;
  j["title"] = p.title_tokens;
  j["description"] = p.description_tokens;
  j["attributes"] = p.attributes;
  j["options"] = p.options;
  j["price"] = p.price;
  return j;
}

Product product_from_json(const json& j) {
  Product p;
  p.id = j.at("id").get<ProductId>();
  p.category = j.at("category").get<std::string>();
  p.title_tokens = j.at("title").get<Tokens>();
  p.description_tokens = j.at("description").get<Tokens>();
  p.attributes = j.at("attributes").get<std::set<std::string>>();
  p.options = j.at("options").get<OptionMap>();
  p.price = j.at("price").get<double>();
  return p;
}

json to_json(const Goal& g) {
  json j;
  j["v"] = kVersion;
  j["id"] = g.id;
  j["instruction"] = g.instruction_tokens;
  j["category"] = g.target_category;
  j["attributes"] = g.target_attributes;
  j["options"] = g.target_options;
  j["budget"] = g.budget;
  j["anchor"] = g.anchor_product;
  return j;
}

Goal goal_from_json(const json& j) {
  Goal g;
  g.id = j.at("id").get<GoalId>();
  g.instruction_tokens = j.at("instruction").get<Tokens>();
  g.target_category = j.at("category").get<std::string>();
  g.target_attributes = j.at("attributes").get<std::set<std::string>>();
  g.target_options = j.at("options").get<OptionChoice>();
  g.budget = j.at("budget").get<double>();
  g.anchor_product = j.at("anchor").get<ProductId>();
  return g;
}

json to_json(const RewardBreakdown& b) {
  json j;
  j["type_match"] = b.type_match;
  j["attr_matched"] = b.attr_matched;
  j["opt_matched"] = b.opt_matched;
  j["price_ok"] = b.price_ok;
  j["score"] = b.score;
  return j;
}

RewardBreakdown breakdown_from_json(const json& j) {
  RewardBreakdown b;
  b.type_match = j.at("type_match").get<int>();
  b.attr_matched = j.at("attr_matched").get<int>();
  b.opt_matched = j.at("opt_matched").get<int>();
  b.price_ok = j.at("price_ok").get<int>();
  b.score = j.at("score").get<double>();
  return b;
}

void write_line(std::ostream& os, const json& j) { os << j.dump() << '\n'; }

}  // namespace

void write_catalog(std::ostream& os, const Catalog& catalog) {
  for (const auto& p : catalog.products) write_line(os, to_json(p));
}

Catalog read_catalog(std::istream& is) {
  Catalog c;
  for_each_line(is, "catalog", [&](const json& j) { c.products.push_back(product_from_json(j)); });
  for (std::size_t i = 0; i < c.products.size(); ++i) {
    if (c.products[i].id != i) throw FormatError("catalog: product ids must be 0..N-1 in order");
  }
  c.rebuild_vocabularies();
  return c;
}

void write_catalog(const std::filesystem::path& path, const Catalog& catalog) {
  auto out = open_out(path);
  write_catalog(out, catalog);
}

Catalog read_catalog(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_catalog(in);
}

void write_goals(std::ostream& os, std::span<const Goal> goals) {
  for (const auto& g : goals) write_line(os, to_json(g));
}

std::vector<Goal> read_goals(std::istream& is) {
  std::vector<Goal> goals;
  for_each_line(is, "goals", [&](const json& j) { goals.push_back(goal_from_json(j)); });
  return goals;
}

void write_goals(const std::filesystem::path& path, std::span<const Goal> goals) {
  auto out = open_out(path);
  write_goals(out, goals);
}

std::vector<Goal> read_goals(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_goals(in);
}

void write_trajectories(std::ostream& os, std::span<const Trajectory> trajectories) {
  for (const auto& t : trajectories) {
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      json j;
      j["v"] = kVersion;
      j["goal_id"] = t.goal_id;
      j["step"] = i;
      j["obs_key"] = hex64(s.observation.obs_key);
      j["page"] = page_name(s.observation.page);
      j["observation"] = s.observation.tokens();
      j["available"] = s.observation.action_ids();
      j["action"] = s.action_id;
      write_line(os, j);
    }
    json fin;
    fin["v"] = kVersion;
    fin["goal_id"] = t.goal_id;
    fin["final"] = true;
    fin["source"] = source_name(t.source);
    fin["n_steps"] = t.steps.size();
    fin["reward"] = t.final_reward;
    fin["breakdown"] = t.breakdown ? to_json(*t.breakdown) : json(nullptr);
    write_line(os, fin);
  }
}

void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories) {
  auto out = open_out(path);
  write_trajectories(out, trajectories);
}

std::vector<Trajectory> read_trajectories(std::istream& is, const Env& env,
                                          std::span<const Goal> goals) {
  std::map<GoalId, const Goal*> by_id;
  for (const auto& g : goals) by_id[g.id] = &g;

  std::vector<Trajectory> out;
  std::vector<std::string> actions;
  std::vector<std::uint64_t> keys;
  bool open = false;
  GoalId current = 0;

  for_each_line(is, "trajectories", [&](const json& j) {
    const auto goal_id = j.at("goal_id").get<GoalId>();
    if (open && current != goal_id) throw FormatError("trajectories: goal id changes mid-episode");
    open = true;
    current = goal_id;
    if (!j.value("final", false)) {
      if (j.at("step").get<std::size_t>() != actions.size()) {
        throw FormatError("trajectories: step indices out of order");
      }
      actions.push_back(j.at("action").get<std::string>());
      keys.push_back(parse_hex64(j.at("obs_key").get<std::string>()));
      return;
    }
    if (j.at("n_steps").get<std::size_t>() != actions.size()) {
      throw FormatError("trajectories: n_steps disagrees with step lines");
    }
    auto it = by_id.find(goal_id);
    if (it == by_id.end()) throw FormatError("trajectories: unknown goal id " + std::to_string(goal_id));
    const auto source = parse_source(j.at("source").get<std::string>());
    Trajectory t;
    try {
      t = replay(env, *it->second, actions, source);
    } catch (const std::runtime_error& e) {
      throw FormatError(std::string("trajectories: replay failed: ") + e.what());
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (t.steps[i].observation.obs_key != keys[i]) {
        throw FormatError("trajectories: replay diverges at step " + std::to_string(i));
      }
    }
    if (t.final_reward != j.at("reward").get<double>()) {
      throw FormatError("trajectories: replayed reward disagrees with the log");
    }
    const auto& b = j.at("breakdown");
    if (b.is_null() != !t.breakdown || (t.breakdown && breakdown_from_json(b) != *t.breakdown)) {
      throw FormatError("trajectories: replayed breakdown disagrees with the log");
    }
    out.push_back(std::move(t));
    actions.clear();
    keys.clear();
    open = false;
  });
  if (open) throw FormatError("trajectories: last episode has no final line");
  return out;
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path, const Env& env,
                                          std::span<const Goal> goals) {
  auto in = open_in(path);
  return read_trajectories(in, env, goals);
}

void write_pairs(std::ostream& os, std::span<const PreferencePair> pairs) {
  for (const auto& p : pairs) {
    json j;
    j["v"] = kVersion;
    j["obs_key"] = hex64(p.observation.obs_key);
    j["observation"] = p.observation.tokens();
    j["available"] = p.observation.action_ids();
    j["preferred"] = p.preferred;
    j["dispreferred"] = p.dispreferred;
    write_line(os, j);
  }
}

void write_pairs(const std::filesystem::path& path, std::span<const PreferencePair> pairs) {
  auto out = open_out(path);
  write_pairs(out, pairs);
}

void write_checkpoint(std::ostream& os, const PolicyParams& params) {
  std::vector<double> p(params.d * params.k), q(params.d * params.k);
  for (std::size_t r = 0; r < params.k; ++r) {
    for (std::size_t c = 0; c < params.d; ++c) {
      p[r * params.d + c] = params.p(r, c);
      q[r * params.d + c] = params.q(r, c);
    }
  }
  json j;
  j["v"] = kVersion;
  j["d"] = params.d;
  j["k"] = params.k;
  j["P"] = std::move(p);
  j["Q"] = std::move(q);
  j["v_head"] = params.v;
  j["seed_lineage"] = params.seed_lineage;
  os << j.dump() << '\n';
}

PolicyParams read_checkpoint(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  if (!j.is_object() || !j.contains("v") || j["v"] != kVersion) {
    throw FormatError("checkpoint: missing or unsupported schema version");
  }
  try {
    const auto d = j.at("d").get<std::size_t>();
    const auto k = j.at("k").get<std::size_t>();
    auto params = PolicyParams::zeros(d, k);
    const auto p = j.at("P").get<std::vector<double>>();
    const auto q = j.at("Q").get<std::vector<double>>();
    params.v = j.at("v_head").get<std::vector<double>>();
    if (p.size() != d * k || q.size() != d * k || params.v.size() != d) {
      throw FormatError("checkpoint: matrix sizes disagree with d and k");
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        params.p(r, c) = p[r * d + c];
        params.q(r, c) = q[r * d + c];
      }
    }
    params.seed_lineage = j.at("seed_lineage").get<std::vector<std::string>>();
    if (!params.finite()) throw FormatError("checkpoint: non-finite weights");
    return params;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void write_checkpoint(const std::filesystem::path& path, const PolicyParams& params) {
  auto out = open_out(path);
  write_checkpoint(out, params);
}

PolicyParams read_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_checkpoint(in);
}

}  // namespace shoprl

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "shoprl/catalog.hpp"
#include "shoprl/env.hpp"
#include "shoprl/policy.hpp"
#include "shoprl/search.hpp"
#include "shoprl/selfplay.hpp"

namespace shoprl::fixtures {

/// Three products: a red wool sweater, a blue cotton sweater and a red mug.
inline Catalog tiny_catalog() {
  Catalog c;
  c.products = {
      {0, {"acme", "red", "wool", "sweater"}, {"soft", "warm"}, "sweater", {"red", "wool"},
       {{"color", {"navy", "red"}}, {"size", {"large", "small"}}}, 40.00},
      {1, {"zeta", "blue", "cotton", "sweater"}, {"light"}, "sweater", {"blue", "cotton"},
       {{"size", {"medium"}}}, 25.50},
      {2, {"acme", "red", "ceramic", "mug"}, {"dishwasher", "safe"}, "mug", {"ceramic", "red"}, {}, 9.99},
  };
  c.rebuild_vocabularies();
  return c;
}

/// Red wool sweater in navy under 45 dollars; product 0 scores 1.
inline Goal tiny_goal() {
  Goal g;
  g.id = 7;
  g.target_category = "sweater";
  g.target_attributes = {"red", "wool"};
  g.target_options = {{"color", "navy"}};
  g.budget = 45.0;
  g.anchor_product = 0;
  g.instruction_tokens = render_instruction(g.target_category, g.target_attributes, g.target_options, g.budget);
  return g;
}

/// A generated catalog with its index, env and goals. Env points into the
/// catalog and index, so a World never moves.
struct World {
  Catalog catalog;
  SearchIndex index;
  Env env;
  std::vector<Goal> goals;

  World(Catalog c, std::uint64_t goal_seed, std::size_t n_goals)
      : catalog(std::move(c)),
        index(build_index(catalog)),
        env(catalog, index),
        goals(generate_goals(catalog, goal_seed, n_goals)) {}
  World(const World&) = delete;
  World& operator=(const World&) = delete;
};

/// 200 products, 8 categories, 40 attributes, 60 goals.
inline const World& small_world() {
  static const auto w = std::make_unique<World>(
      generate_catalog(3, 200, 8, 40, default_option_vocab()), 4, 60);
  return *w;
}

/// The desk-scale catalog shape: 1000 products, 40 categories, 96 attributes.
inline const World& desk_world() {
  static const auto w = std::make_unique<World>(
      generate_catalog(7, 1000, 40, 96, default_option_vocab()), 8, 1000);
  return *w;
}

/// Decision-step observations (two or more actions) from noisy oracle runs.
inline std::vector<Observation> sample_observations(const World& w, std::size_t n, std::uint64_t seed) {
  std::vector<Observation> out;
  OracleConfig cfg{0.3, seed};
  for (std::size_t i = 0; out.size() < n && i < 10 * n; ++i) {
    const Goal& g = w.goals[i % w.goals.size()];
    if (!oracle_can_solve(g, w.env)) continue;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (auto& st : oracle_trajectory(g, w.env, cfg, rng).steps) {
      if (st.observation.available_actions.size() >= 2 && out.size() < n) out.push_back(std::move(st.observation));
    }
  }
  return out;
}

/// Parameters with entries uniform in [-scale, scale], value head included.
inline PolicyParams random_params(std::size_t d, std::size_t k, double scale, std::uint64_t seed) {
  auto p = PolicyParams::zeros(d, k);
  Rng rng(seed);
  for (auto& x : p.P) x = rng.uniform(-scale, scale);
  for (auto& x : p.Q) x = rng.uniform(-scale, scale);
  for (auto& x : p.v) x = rng.uniform(-scale, scale);
  return p;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Central finite-difference check of `grad` against `loss` on `n` coordinates
/// drawn from those with a non-negligible analytic gradient. Returns the
/// largest relative error seen.
inline double max_fd_error(PolicyParams params, const std::function<double(const PolicyParams&)>& loss,
                           const Gradient& grad, std::size_t n, std::uint64_t seed, double h = 1e-5) {
  struct Coord {
    int which;
    std::size_t row, col;
  };
  std::vector<Coord> coords;
  for (std::size_t col = 0; col < params.d; ++col) {
    for (std::size_t row = 0; row < params.k; ++row) {
      if (std::abs(grad.p(row, col)) > 1e-6) coords.push_back({0, row, col});
      if (std::abs(grad.q(row, col)) > 1e-6) coords.push_back({1, row, col});
    }
    if (std::abs(grad.v(col)) > 1e-6) coords.push_back({2, 0, col});
  }
  if (coords.empty()) return 0.0;
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Coord c = coords[rng.index(coords.size())];
    double& x = c.which == 0 ? params.p(c.row, c.col) : c.which == 1 ? params.q(c.row, c.col) : params.v[c.col];
    const double analytic = c.which == 0 ? grad.p(c.row, c.col) : c.which == 1 ? grad.q(c.row, c.col) : grad.v(c.col);
    const double saved = x;
    x = saved + h;
    const double up = loss(params);
    x = saved - h;
    const double down = loss(params);
    x = saved;
    worst = std::max(worst, rel_err(analytic, (up - down) / (2.0 * h)));
  }
  return worst;
}

/// A product page with exactly three actions and a handful of page tokens.
inline Observation three_action_observation(const Tokens& goal, const Tokens& page) {
  Observation o;
  o.goal_instruction = goal;
  o.page = PageType::Product;
  o.page_content = page;
  o.available_actions = {act::BackToResults{}, act::ClickOption{"color", "navy"}, act::Purchase{}};
  return o;
}

/// Action that undoes `id` from the state it leads to, or "" when there is none.
inline std::string inverse_action(const EnvState& before, const std::string& id) {
  if (id == "search") return "back_to_search";
  if (id == "back_to_search") return before.result_page_index == 0 ? "search" : "";
  if (id == "description") return "back_to_product";
  if (id == "back_to_product") return "description";
  if (id == "next_page") return "prev_page";
  if (id == "prev_page") return "next_page";
  if (id.rfind("click:", 0) == 0) return "back_to_results";
  if (id == "back_to_results" && before.selected_options.empty() && before.current_product) {
    return action_id(act::ClickResult{*before.current_product, {}});
  }
  return "";
}

/// Action ids of `base` with out-and-back detours spliced in before random
/// steps, each detour leaving the state exactly where it was.
inline std::vector<std::string> inject_loops(const Env& env, const Goal& goal, const std::vector<std::string>& base,
                                             std::size_t n_loops, Rng& rng) {
  std::vector<std::string> out;
  auto [state, obs] = env.reset(goal);
  std::size_t budget = n_loops;
  for (std::size_t i = 0; i < base.size(); ++i) {
    const std::size_t remaining = base.size() - i;
    if (budget > 0 && rng.index(remaining) < budget) {
      const std::size_t detour_len = 1 + rng.index(3);
      std::vector<std::string> undo;
      for (std::size_t d = 0; d < detour_len; ++d) {
        std::vector<std::string> candidates;
        for (const auto& a : obs.action_ids()) {
          if (a != "purchase" && !inverse_action(state, a).empty()) candidates.push_back(a);
        }
        if (candidates.empty()) break;
        const auto a = candidates[rng.index(candidates.size())];
        undo.push_back(inverse_action(state, a));
        obs = env.step(state, a).observation;
        out.push_back(a);
      }
      while (!undo.empty()) {
        obs = env.step(state, undo.back()).observation;
        out.push_back(undo.back());
        undo.pop_back();
      }
      --budget;
    }
    obs = env.step(state, base[i]).observation;
    out.push_back(base[i]);
  }
  return out;
}

/// BM25 scores of every product computed straight from the catalog text,
/// without the index; top 50, score descending then id ascending.
inline std::vector<ScoredDoc> brute_force_search(const Catalog& c, const Tokens& query) {
  auto doc_tokens = [](const Product& p) {
    Tokens t = p.title_tokens;
    t.insert(t.end(), p.description_tokens.begin(), p.description_tokens.end());
    return t;
  };
  const double n = static_cast<double>(c.products.size());
  std::map<std::string, double> df;
  double total_len = 0.0;
  for (const auto& p : c.products) {
    const auto t = doc_tokens(p);
    total_len += static_cast<double>(t.size());
    std::set<std::string> uniq(t.begin(), t.end());
    for (const auto& w : uniq) df[w] += 1.0;
  }
  const double avgdl = total_len / n;
  std::vector<ScoredDoc> out;
  for (const auto& p : c.products) {
    const auto t = doc_tokens(p);
    double s = 0.0;
    for (const auto& q : query) {
      const double tf = static_cast<double>(std::count(t.begin(), t.end(), q));
      if (tf == 0.0) continue;
      const double idf = std::log(1.0 + (n - df[q] + 0.5) / (df[q] + 0.5));
      s += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * static_cast<double>(t.size()) / avgdl));
    }
    if (s > 0.0) out.push_back({p.id, s});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (out.size() > 50) out.resize(50);
  return out;
}

}  // namespace shoprl::fixtures

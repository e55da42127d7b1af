#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "shoprl/env.hpp"
#include "shoprl/errors.hpp"
#include "shoprl/trajectory.hpp"

using namespace shoprl;

namespace {

struct TinyWorld {
  Catalog catalog = fixtures::tiny_catalog();
  SearchIndex index = build_index(catalog);
  Env env{catalog, index};
};

Tokens concat(Tokens a, const Tokens& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_SUITE("env") {
  TEST_CASE("action ids and renderings") {
    CHECK(action_id(act::Search{{"a"}}) == "search");
    CHECK(action_id(act::ClickResult{42, {}}) == "click:000042");
    CHECK(action_id(act::ClickOption{"color", "navy"}) == "option:color=navy");
    CHECK(action_id(act::NextPage{}) == "next_page");
    CHECK(action_id(act::PrevPage{}) == "prev_page");
    CHECK(action_id(act::Description{}) == "description");
    CHECK(action_id(act::BackToResults{}) == "back_to_results");
    CHECK(action_id(act::BackToSearch{}) == "back_to_search");
    CHECK(action_id(act::BackToProduct{}) == "back_to_product");
    CHECK(action_id(act::Purchase{}) == "purchase");
    CHECK(render_action(act::Search{{"red", "mug"}}) == Tokens{"search", "red", "mug"});
    CHECK(render_action(act::ClickResult{1, {"acme", "mug"}}) == Tokens{"click", "acme", "mug"});
    CHECK(render_action(act::ClickOption{"size", "small"}) == Tokens{"option", "size", "small"});
    CHECK(render_action(act::Purchase{}) == Tokens{"buy", "now"});
    for (auto p : {PageType::Search, PageType::Results, PageType::Product, PageType::Detail}) {
      CHECK(parse_page(page_name(p)) == p);
    }
    CHECK_THROWS_AS(parse_page("checkout"), FormatError);
  }

  TEST_CASE("canonical query") {
    Goal g = fixtures::tiny_goal();
    CHECK(query_from_instruction(g) == Tokens{"sweater", "red", "wool"});
    g.target_attributes = {"wool", "memory foam", "blue"};
    CHECK(query_from_instruction(g) == Tokens{"sweater", "blue", "memory", "foam", "wool"});
    CHECK(query_from_instruction(g) == query_from_instruction(g));
  }

  TEST_CASE("reset") {
    TinyWorld w;
    const auto g = fixtures::tiny_goal();
    auto [s1, o1] = w.env.reset(g);
    auto [s2, o2] = w.env.reset(g);
    CHECK(o1.page == PageType::Search);
    CHECK(s1.step_count == 0);
    REQUIRE(o1.available_actions.size() == 1);
    CHECK(std::get<act::Search>(o1.available_actions[0]).query == query_from_instruction(g));
    CHECK(o1.tokens() == o2.tokens());
    CHECK(o1.obs_key == o2.obs_key);
    CHECK(o1.action_ids() == o2.action_ids());

    // The instruction is not part of the key.
    Goal other = g;
    other.target_category = "mug";
    other.instruction_tokens = tokenize("something else entirely");
    CHECK(w.env.reset(other).second.obs_key == o1.obs_key);
  }

  TEST_CASE("scripted episode on the tiny catalog, traced by hand") {
    TinyWorld w;
    const auto g = fixtures::tiny_goal();
    auto [s, obs] = w.env.reset(g);
    CHECK(obs.tokens() == concat(g.instruction_tokens, {"search"}));

    auto out = w.env.step(s, "search");
    CHECK(out.reward == 0.0);
    CHECK(!out.done);
    CHECK(out.observation.page == PageType::Results);
    CHECK(out.observation.page_content ==
          Tokens{"page", "1", "of", "1", "acme", "red", "wool", "sweater", "40.00", "zeta", "blue", "cotton",
                 "sweater", "25.50", "acme", "red", "ceramic", "mug", "9.99"});
    CHECK(out.observation.action_ids() ==
          std::vector<std::string>{"back_to_search", "click:000000", "click:000001", "click:000002"});
    CHECK(render_action(out.observation.available_actions[1]) == Tokens{"click", "acme", "red", "wool", "sweater"});
    const auto results_key = out.observation.obs_key;

    out = w.env.step(s, "click:000000");
    CHECK(out.observation.page == PageType::Product);
    CHECK(out.observation.page_content == Tokens{"acme", "red", "wool", "sweater", "price", "40.00", "color", "navy",
                                                 "red", "size", "large", "small"});
    CHECK(out.observation.action_ids() ==
          std::vector<std::string>{"back_to_results", "description", "option:color=navy", "option:color=red",
                                   "option:size=large", "option:size=small", "purchase"});
    const auto product_key = out.observation.obs_key;

    out = w.env.step(s, "description");
    CHECK(out.observation.page == PageType::Detail);
    CHECK(out.observation.page_content ==
          Tokens{"acme", "red", "wool", "sweater", "soft", "warm", "attributes", "red", "wool"});
    CHECK(out.observation.action_ids() == std::vector<std::string>{"back_to_product"});

    out = w.env.step(s, "back_to_product");
    CHECK(out.observation.obs_key == product_key);

    out = w.env.step(s, "option:color=red");
    CHECK(out.observation.obs_key != product_key);
    out = w.env.step(s, "option:color=navy");
    CHECK(s.selected_options == OptionChoice{{"color", "navy"}});
    CHECK(out.observation.page_content.back() == "navy");
    CHECK(out.observation.page_content[out.observation.page_content.size() - 3] == "selected");

    out = w.env.step(s, "back_to_results");
    CHECK(out.observation.obs_key == results_key);
    CHECK(s.selected_options.empty());

    w.env.step(s, "click:000000");
    w.env.step(s, "option:color=navy");
    out = w.env.step(s, "purchase");
    CHECK(out.done);
    CHECK(out.reward == 1.0);
    REQUIRE(out.breakdown.has_value());
    CHECK(*out.breakdown == RewardBreakdown{1, 2, 1, 1, 1.0});
    CHECK(out.observation.available_actions.empty());
    CHECK(s.step_count == 10);
    CHECK_THROWS_AS(w.env.step(s, "purchase"), StateError);
    CHECK_THROWS_AS(w.env.available_actions(s), StateError);
  }

  TEST_CASE("invalid actions") {
    TinyWorld w;
    auto [s, obs] = w.env.reset(fixtures::tiny_goal());
    CHECK_THROWS_AS(w.env.step(s, "purchase"), InvalidActionError);
    CHECK_THROWS_AS(w.env.step(s, act::NextPage{}), InvalidActionError);
    w.env.step(s, "search");
    CHECK_THROWS_AS(w.env.step(s, "click:000099"), InvalidActionError);
    CHECK_THROWS_AS(w.env.step(s, "search"), InvalidActionError);
  }

  TEST_CASE("product page without options") {
    TinyWorld w;
    Goal g = fixtures::tiny_goal();
    auto [s, obs] = w.env.reset(g);
    w.env.step(s, "search");
    const auto out = w.env.step(s, "click:000002");
    CHECK(out.observation.action_ids() == std::vector<std::string>{"back_to_results", "description", "purchase"});
  }

  TEST_CASE("empty search results still allow going back") {
    Catalog c = fixtures::tiny_catalog();
    const auto idx = build_index(c);
    const Env env(c, idx);
    Goal g = fixtures::tiny_goal();
    g.target_category = "teapot";
    g.target_attributes = {"porcelain"};
    auto [s, obs] = env.reset(g);
    const auto out = env.step(s, "search");
    CHECK(out.observation.page_content == Tokens{"no", "results"});
    CHECK(out.observation.action_ids() == std::vector<std::string>{"back_to_search"});
  }

  TEST_CASE("first results page of a five-page query has twelve actions") {
    const auto& w = fixtures::desk_world();
    bool found = false;
    for (const auto& g : w.goals) {
      if (search(w.index, query_from_instruction(g)).num_pages() != 5) continue;
      auto [s, obs] = w.env.reset(g);
      const auto out = w.env.step(s, "search");
      CHECK(out.observation.available_actions.size() == 12);
      CHECK(std::count_if(out.observation.available_actions.begin(), out.observation.available_actions.end(),
                          [](const Action& a) { return holds<act::ClickResult>(a); }) == 10);
      CHECK(out.observation.find_action("next_page").has_value());
      CHECK(!out.observation.find_action("prev_page").has_value());
      found = true;
      break;
    }
    CHECK(found);
  }

  TEST_CASE("truncation at max_steps") {
    TinyWorld w;
    const Env short_env(w.catalog, w.index, EnvConfig{3});
    auto [s, obs] = short_env.reset(fixtures::tiny_goal());
    short_env.step(s, "search");
    short_env.step(s, "back_to_search");
    const auto out = short_env.step(s, "search");
    CHECK(out.done);
    CHECK(out.reward == 0.0);
    CHECK(!out.breakdown.has_value());
    CHECK(out.observation.page == PageType::Results);
    CHECK_THROWS_AS(short_env.step(s, "back_to_search"), StateError);
    CHECK_THROWS_AS(Env(w.catalog, w.index, EnvConfig{0}), ParameterError);
  }

  TEST_CASE("random walks: determinism, sparse reward, invariants") {
    const auto& w = fixtures::small_world();
    Rng rng(21);
    for (int ep = 0; ep < 200; ++ep) {
      const auto& g = w.goals[rng.index(w.goals.size())];
      std::vector<std::string> ids;
      auto traj = run_episode(
          w.env, g,
          [&](const Observation& o) {
            CHECK(!o.available_actions.empty());
            const auto a = o.action_ids();
            CHECK(std::is_sorted(a.begin(), a.end()));
            ids.push_back(a[rng.index(a.size())]);
            return ids.back();
          },
          TrajectorySource::Policy);
      CHECK(traj.steps.size() <= w.env.max_steps());
      CHECK((traj.final_reward >= 0.0 && traj.final_reward <= 1.0));
      if (!traj.purchased()) CHECK(traj.final_reward == 0.0);

      // Replaying the same ids gives the same keys and reward.
      const auto again = replay(w.env, g, ids, TrajectorySource::Policy);
      REQUIRE(again.steps.size() == traj.steps.size());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        CHECK(again.steps[i].observation.obs_key == traj.steps[i].observation.obs_key);
        CHECK(again.steps[i].observation.tokens() == traj.steps[i].observation.tokens());
      }
      CHECK(again.final_reward == traj.final_reward);
      CHECK(replays_exactly(w.env, g, traj));
    }
  }

  TEST_CASE("intermediate rewards are zero") {
    const auto& w = fixtures::small_world();
    Rng rng(5);
    for (int ep = 0; ep < 100; ++ep) {
      auto [s, obs] = w.env.reset(w.goals[ep % w.goals.size()]);
      while (!s.done) {
        const auto ids = obs.action_ids();
        auto out = w.env.step(s, ids[rng.index(ids.size())]);
        if (!out.done) CHECK(out.reward == 0.0);
        obs = std::move(out.observation);
      }
    }
  }

  TEST_CASE("purchase is reachable within four actions") {
    const auto& w = fixtures::small_world();
    const Env free_env(w.catalog, w.index, EnvConfig{1000});
    Rng rng(8);
    auto shortcut = [](const Observation& o) -> std::string {
      for (const char* id : {"purchase", "back_to_product", "search"}) {
        if (o.find_action(id)) return id;
      }
      for (const auto& id : o.action_ids()) {
        if (id.rfind("click:", 0) == 0) return id;
      }
      return "back_to_search";
    };
    int checked = 0;
    for (int ep = 0; ep < 100; ++ep) {
      const auto& g = w.goals[ep % w.goals.size()];
      if (search(w.index, query_from_instruction(g)).empty()) continue;
      auto [s, obs] = w.env.reset(g);
      while (!s.done) {
        EnvState probe = s;
        Observation po = obs;
        int steps = 0;
        while (!probe.done && steps < 5) {
          po = free_env.step(probe, shortcut(po)).observation;
          ++steps;
        }
        CHECK(probe.done);
        CHECK(steps <= 4);
        ++checked;
        const auto ids = obs.action_ids();
        obs = w.env.step(s, ids[rng.index(ids.size())]).observation;
      }
    }
    CHECK(checked > 500);
  }

  TEST_CASE("option re-selection replaces the earlier value") {
    TinyWorld w;
    auto [s, obs] = w.env.reset(fixtures::tiny_goal());
    w.env.step(s, "search");
    w.env.step(s, "click:000000");
    const auto first = w.env.step(s, "option:color=red").observation.obs_key;
    w.env.step(s, "option:color=navy");
    const auto back = w.env.step(s, "option:color=red").observation.obs_key;
    CHECK(first == back);
    CHECK(s.selected_options == OptionChoice{{"color", "red"}});
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "shoprl/catalog.hpp"
#include "shoprl/errors.hpp"

using namespace shoprl;

namespace {

void check_product_invariants(const Catalog& c, const OptionMap& option_vocab) {
  const std::set<std::string> attrs(c.attribute_vocab.begin(), c.attribute_vocab.end());
  const std::set<std::string> cats(c.categories.begin(), c.categories.end());
  for (std::size_t i = 0; i < c.products.size(); ++i) {
    const auto& p = c.products[i];
    CHECK(p.id == i);
    CHECK(cats.count(p.category) == 1);
    CHECK((p.attributes.size() >= 2 && p.attributes.size() <= 6));
    for (const auto& a : p.attributes) CHECK(attrs.count(a) == 1);
    CHECK(p.options.size() <= 2);
    for (const auto& [name, values] : p.options) {
      REQUIRE(option_vocab.count(name) == 1);
      CHECK(!values.empty());
      for (const auto& v : values) {
        const auto& allowed = option_vocab.at(name);
        CHECK(std::find(allowed.begin(), allowed.end(), v) != allowed.end());
      }
    }
    CHECK((p.price >= 5.0 && p.price <= 200.0));
    CHECK(p.price == round_cents(p.price));
    CHECK(std::find(p.title_tokens.begin(), p.title_tokens.end(), p.category) != p.title_tokens.end());
    for (const auto& a : p.attributes) {
      for (const auto& w : tokenize(a)) {
        CHECK(std::find(p.title_tokens.begin(), p.title_tokens.end(), w) != p.title_tokens.end());
      }
    }
  }
}

}  // namespace

TEST_SUITE("catalog") {
  TEST_CASE("small generated catalog is deterministic and valid") {
    const OptionMap opts{{"color", {"red", "blue"}}};
    const auto a = generate_catalog(7, 10, 2, 8, opts);
    const auto b = generate_catalog(7, 10, 2, 8, opts);
    CHECK(a.products.size() == 10);
    CHECK(a == b);
    check_product_invariants(a, opts);
    CHECK(generate_catalog(8, 10, 2, 8, opts).products != a.products);
  }

  TEST_CASE("desk-scale catalog covers every category") {
    const auto& c = fixtures::desk_world().catalog;
    check_product_invariants(c, default_option_vocab());
    std::map<std::string, int> per_cat;
    for (const auto& p : c.products) ++per_cat[p.category];
    CHECK(per_cat.size() == 40);
    CHECK(c.categories.size() == 40);
  }

  TEST_CASE("invalid catalog sizes are rejected") {
    CHECK_THROWS_AS(generate_catalog(1, 0, 2, 8, {}), ParameterError);
    CHECK_THROWS_AS(generate_catalog(1, 10, 0, 8, {}), ParameterError);
    CHECK_THROWS_AS(generate_catalog(1, 10, 2, 0, {}), ParameterError);
    CHECK_THROWS_AS(generate_catalog(1, 10, 2, 8, {{"color", {}}}), ParameterError);
  }

  TEST_CASE("derive_attributes: fewer bigrams than k") {
    const std::vector<Tokens> docs{{"red", "wool"}};
    const auto stats = BigramStats::build(docs);
    CHECK(derive_attributes(docs[0], stats, 3) == std::vector<std::string>{"red wool"});
    CHECK(derive_attributes({"red"}, stats, 3).empty());
    CHECK(derive_attributes({}, stats, 3).empty());
  }

  TEST_CASE("derive_attributes matches a brute-force tf-idf ranking") {
    const std::vector<Tokens> docs{{"red", "wool", "red", "wool", "sweater"},
                                   {"blue", "wool", "sweater"},
                                   {"red", "cotton", "shirt"}};
    const auto stats = BigramStats::build(docs);
    CHECK(stats.n_docs == 3);
    CHECK(stats.df.at("wool sweater") == 2);
    CHECK(stats.df.at("red wool") == 1);

    // tf-idf by hand: red wool 2 ln 3, wool red ln 3, wool sweater ln 1.5.
    CHECK(derive_attributes(docs[0], stats, 2) == std::vector<std::string>{"red wool", "wool red"});
    CHECK(derive_attributes(docs[0], stats, 3) ==
          std::vector<std::string>{"red wool", "wool red", "wool sweater"});
  }

  TEST_CASE("derive_attributes on identical docs falls back to lexicographic order") {
    const std::vector<Tokens> docs(3, Tokens{"c", "a", "b", "a"});
    const auto stats = BigramStats::build(docs);
    CHECK(derive_attributes(docs[0], stats, 2) == std::vector<std::string>{"a b", "b a"});
  }

  TEST_CASE("instruction template") {
    const auto g = fixtures::tiny_goal();
    CHECK(join(g.instruction_tokens) == "find me a sweater with red wool and color navy under 45.00 dollars");
    CHECK(render_instruction("mug", {"ceramic"}, {}, 9.5) ==
          tokenize("find me a mug with ceramic under 9.50 dollars"));
  }

  TEST_CASE("generated goals are valid, satisfiable and deterministic") {
    const auto& w = fixtures::desk_world();
    const auto again = generate_goals(w.catalog, 8, 1000);
    CHECK(again == w.goals);
    for (std::size_t i = 0; i < w.goals.size(); ++i) {
      const auto& g = w.goals[i];
      const auto& anchor = w.catalog.product(g.anchor_product);
      CHECK(g.id == i);
      CHECK((g.target_attributes.size() >= 1 && g.target_attributes.size() <= 3));
      CHECK(g.target_options.size() <= 1);
      CHECK(g.budget >= anchor.price);
      CHECK(g.budget <= std::ceil(anchor.price * 1.5 * 100.0) / 100.0 + 1e-9);
      CHECK(g.target_category == anchor.category);
      CHECK(g.instruction_tokens ==
            render_instruction(g.target_category, g.target_attributes, g.target_options, g.budget));
      CHECK(score_purchase(g, anchor, best_options(g, anchor)).score == 1.0);
    }
    CHECK_THROWS_AS(generate_goals(w.catalog, 1, 0), ParameterError);
  }

  TEST_CASE("goal satisfiability by brute-force catalog scan") {
    const auto& w = fixtures::small_world();
    for (const auto& g : w.goals) {
      bool found = false;
      for (const auto& p : w.catalog.products) {
        found = found || score_purchase(g, p, best_options(g, p)).score == 1.0;
      }
      CHECK(found);
    }
  }

  TEST_CASE("score_purchase hand cases") {
    const auto c = fixtures::tiny_catalog();
    const auto g = fixtures::tiny_goal();
    const auto full = score_purchase(g, c.product(0), {{"color", "navy"}});
    CHECK(full == RewardBreakdown{1, 2, 1, 1, 1.0});

    Goal two_attr = g;
    two_attr.target_attributes = {"red", "cotton"};
    // Same category, one attribute, option matched, price ok: 3 / 4.
    CHECK(score_purchase(two_attr, c.product(0), {{"color", "navy"}}).score == 0.75);

    // Wrong category with everything else perfect.
    Goal mug = g;
    mug.target_category = "mug";
    CHECK(score_purchase(mug, c.product(0), {{"color", "navy"}}).score == 0.0);

    // No option chosen and over budget: (2 + 0 + 0) / 4.
    Goal cheap = g;
    cheap.budget = 30.0;
    CHECK(score_purchase(cheap, c.product(0), {}).score == 0.5);

    CHECK_THROWS_AS(score_purchase(g, c.product(0), {{"color", "olive"}}), InvalidActionError);
    CHECK_THROWS_AS(score_purchase(g, c.product(2), {{"color", "navy"}}), InvalidActionError);
  }

  TEST_CASE("score_purchase properties on random goal/product pairs") {
    const auto& w = fixtures::small_world();
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
      const auto& g = w.goals[rng.index(w.goals.size())];
      const auto& p = w.catalog.products[rng.index(w.catalog.products.size())];
      const auto opts = best_options(g, p);
      const auto b = score_purchase(g, p, opts);
      CHECK(b == score_purchase(g, p, opts));
      CHECK((b.score >= 0.0 && b.score <= 1.0));
      CHECK(b.attr_matched <= static_cast<int>(g.target_attributes.size()));
      CHECK(b.opt_matched <= static_cast<int>(g.target_options.size()));
      const double denom = static_cast<double>(g.target_attributes.size() + g.target_options.size() + 1);
      CHECK(b.score == doctest::Approx(b.type_match * (b.attr_matched + b.opt_matched + b.price_ok) / denom));
      const bool maximal = b.type_match == 1 && b.attr_matched == static_cast<int>(g.target_attributes.size()) &&
                           b.opt_matched == static_cast<int>(g.target_options.size()) && b.price_ok == 1;
      CHECK((b.score == 1.0) == maximal);

      // One more matched attribute never lowers the score.
      Product richer = p;
      for (const auto& a : g.target_attributes) {
        if (!richer.attributes.count(a)) {
          richer.attributes.insert(a);
          break;
        }
      }
      CHECK(score_purchase(g, richer, opts).score >= b.score);
    }
  }
}

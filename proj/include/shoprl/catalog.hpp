#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "shoprl/text.hpp"

namespace shoprl {

using ProductId = std::uint32_t;
using GoalId = std::uint32_t;

/// Option name -> allowed values (e.g. color -> {black, navy}).
using OptionMap = std::map<std::string, std::vector<std::string>>;
/// Option name -> one chosen value.
using OptionChoice = std::map<std::string, std::string>;

struct Product {
  ProductId id = 0;
  Tokens title_tokens;
  Tokens description_tokens;
  std::string category;
  std::set<std::string> attributes;
  OptionMap options;
  double price = 0.0;

  bool operator==(const Product&) const = default;
};

struct Goal {
  GoalId id = 0;
  Tokens instruction_tokens;
  std::string target_category;
  std::set<std::string> target_attributes;
  OptionChoice target_options;
  double budget = 0.0;
  /// Product the goal was sampled from; it always scores 1.
  ProductId anchor_product = 0;

  bool operator==(const Goal&) const = default;
};

struct RewardBreakdown {
  int type_match = 0;
  int attr_matched = 0;
  int opt_matched = 0;
  int price_ok = 0;
  double score = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

struct Catalog {
  std::vector<Product> products;
  std::vector<std::string> categories;
  std::vector<std::string> attribute_vocab;
  OptionMap option_vocab;

  /// Throws NotFoundError.
  const Product& product(ProductId id) const;
  bool contains(ProductId id) const;

  /// Rebuilds the vocabularies from the product list (used after loading).
  void rebuild_vocabularies();

  bool operator==(const Catalog&) const = default;
};

/// color (7 values) and size (4 values).
OptionMap default_option_vocab();

/// Deterministic synthetic catalog. Each category draws most of its products'
/// attributes from its own weighted attribute pool; titles carry the brand,
/// attribute words and category word so retrieval on category + attributes is
/// informative. Throws ParameterError on zero sizes or an empty option value list.
Catalog generate_catalog(std::uint64_t seed, std::size_t n_products,
                         std::size_t n_categories, std::size_t attr_vocab_size,
                         const OptionMap& option_vocab);

/// Document frequencies of token bigrams ("w1 w2") over a corpus.
struct BigramStats {
  std::size_t n_docs = 0;
  std::map<std::string, std::size_t> df;

  static BigramStats build(std::span<const Tokens> docs);
};

std::vector<std::string> bigrams(const Tokens& doc);

/// Top-k bigrams of `doc` by tf * ln(N / df), ties broken lexicographically.
/// Returned in rank order; fewer than k when the doc has fewer distinct
/// bigrams, empty for a doc with fewer than two tokens.
std::vector<std::string> derive_attributes(const Tokens& doc,
                                           const BigramStats& corpus_stats,
                                           std::size_t k);

/// "find me a {category} with {attrs} [and {option} {value}] under {budget} dollars"
Tokens render_instruction(const std::string& category,
                          const std::set<std::string>& attributes,
                          const OptionChoice& options, double budget);

/// Goals anchored on uniformly drawn products: the anchor's category, 1-3 of
/// its attributes, with probability 1/2 one of its option values, and a budget
/// of anchor price times U[1.0, 1.5] rounded up to the cent.
std::vector<Goal> generate_goals(const Catalog& catalog, std::uint64_t seed,
                                 std::size_t n_goals);

/// type_match * (attr_matched + opt_matched + price_ok) / (|A| + |O| + 1).
/// Throws InvalidActionError when a chosen value is not offered by the product.
RewardBreakdown score_purchase(const Goal& goal, const Product& product,
                               const OptionChoice& chosen_options);

/// Option choice that maximizes score_purchase for this product: the target
/// value for every target option the product offers.
OptionChoice best_options(const Goal& goal, const Product& product);

}  // namespace shoprl

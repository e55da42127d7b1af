#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shoprl/catalog.hpp"
#include "shoprl/search.hpp"

namespace shoprl {

enum class PageType { Search, Results, Product, Detail };

std::string_view page_name(PageType page);
/// Throws FormatError for an unknown name.
PageType parse_page(std::string_view name);

namespace act {
struct Search {
  Tokens query;
};
struct ClickResult {
  ProductId product = 0;
  /// Title shown on the results page; part of the action's rendering.
  Tokens title;
};
struct NextPage {};
struct PrevPage {};
struct ClickOption {
  std::string name;
  std::string value;
};
struct Description {};
struct BackToResults {};
struct BackToSearch {};
/// The single action on the detail page; returns to the product page.
struct BackToProduct {};
struct Purchase {};
}  // namespace act

using Action = std::variant<act::Search, act::ClickResult, act::NextPage, act::PrevPage,
                            act::ClickOption, act::Description, act::BackToResults,
                            act::BackToSearch, act::BackToProduct, act::Purchase>;

/// Stable string id, e.g. "click:000042", "option:color=navy", "purchase".
std::string action_id(const Action& action);
/// Token rendering fed to the policy.
Tokens render_action(const Action& action);

template <typename T>
bool holds(const Action& a) {
  return std::holds_alternative<T>(a);
}

struct Observation {
  Tokens goal_instruction;
  PageType page = PageType::Search;
  Tokens page_content;
  /// Sorted by action id.
  std::vector<Action> available_actions;
  /// Hash of page identity and selected options; independent of the goal.
  std::uint64_t obs_key = 0;

  /// goal_instruction ++ page_content.
  Tokens tokens() const;
  std::vector<std::string> action_ids() const;
  /// Index into available_actions, or nullopt.
  std::optional<std::size_t> find_action(std::string_view id) const;
};

struct EnvState {
  Goal goal;
  PageType page = PageType::Search;
  std::optional<QueryResult> last_query_result;
  std::size_t result_page_index = 0;
  std::optional<ProductId> current_product;
  OptionChoice selected_options;
  std::size_t step_count = 0;
  bool done = false;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  std::optional<RewardBreakdown> breakdown;
};

struct EnvConfig {
  std::size_t max_steps = 30;
};

/// Canonical query: category words, then the words of the target attributes
/// in lexicographic attribute order.
Tokens query_from_instruction(const Goal& goal);

/// Deterministic web-shopping MDP over a shared read-only catalog and index.
/// All episode state lives in EnvState, so one Env serves concurrent episodes.
class Env {
 public:
  Env(const Catalog& catalog, const SearchIndex& index, EnvConfig config = {});

  std::pair<EnvState, Observation> reset(const Goal& goal) const;
  /// Throws StateError on a finished episode.
  std::vector<Action> available_actions(const EnvState& state) const;
  /// Throws InvalidActionError for an unavailable action, StateError after done.
  StepOutcome step(EnvState& state, const Action& action) const;
  /// Looks the action up among the available ones by id.
  StepOutcome step(EnvState& state, std::string_view action_id) const;
  Observation observe(const EnvState& state) const;

  const Catalog& catalog() const { return *catalog_; }
  const SearchIndex& index() const { return *index_; }
  std::size_t max_steps() const { return config_.max_steps; }

 private:
  Tokens page_content(const EnvState& state) const;
  std::uint64_t obs_key(const EnvState& state) const;

  const Catalog* catalog_;
  const SearchIndex* index_;
  EnvConfig config_;
};

}  // namespace shoprl

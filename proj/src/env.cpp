#include "shoprl/env.hpp"

#include <algorithm>
#include <cstdio>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string pad_id(ProductId id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06u", static_cast<unsigned>(id));
  return buf;
}

void append(Tokens& out, const Tokens& more) { out.insert(out.end(), more.begin(), more.end()); }

void sort_by_id(std::vector<Action>& actions) {
  std::vector<std::pair<std::string, Action>> keyed;
  keyed.reserve(actions.size());
  for (auto& a : actions) keyed.emplace_back(action_id(a), std::move(a));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  actions.clear();
  for (auto& [id, a] : keyed) actions.push_back(std::move(a));
}

std::string selected_key(const OptionChoice& selected) {
  std::string s;
  for (const auto& [name, value] : selected) s += name + "=" + value + ";";
  return s;
}

}  // namespace

std::string_view page_name(PageType page) {
  switch (page) {
    case PageType::Search: return "search";
    case PageType::Results: return "results";
    case PageType::Product: return "product";
    case PageType::Detail: return "detail";
  }
  return "unknown";
}

PageType parse_page(std::string_view name) {
  for (auto p : {PageType::Search, PageType::Results, PageType::Product, PageType::Detail}) {
    if (page_name(p) == name) return p;
  }
  throw FormatError("unknown page type '" + std::string(name) + "'");
}

std::string action_id(const Action& action) {
  return std::visit(
      overloaded{
          [](const act::Search&) -> std::string { return "search"; },
          [](const act::ClickResult& a) -> std::string { return "click:" + pad_id(a.product); },
          [](const act::NextPage&) -> std::string { return "next_page"; },
          [](const act::PrevPage&) -> std::string { return "prev_page"; },
          [](const act::ClickOption& a) -> std::string {
            return "option:" + a.name + "=" + a.value;
          },
          [](const act::Description&) -> std::string { return "description"; },
          [](const act::BackToResults&) -> std::string { return "back_to_results"; },
          [](const act::BackToSearch&) -> std::string { return "back_to_search"; },
          [](const act::BackToProduct&) -> std::string { return "back_to_product"; },
          [](const act::Purchase&) -> std::string { return "purchase"; },
      },
      action);
}

Tokens render_action(const Action& action) {
  return std::visit(
      overloaded{
          [](const act::Search& a) {
            Tokens t{"search"};
            append(t, a.query);
            return t;
          },
          [](const act::ClickResult& a) {
            Tokens t{"click"};
            append(t, a.title);
            return t;
          },
          [](const act::NextPage&) { return Tokens{"next", "page"}; },
          [](const act::PrevPage&) { return Tokens{"previous", "page"}; },
          [](const act::ClickOption& a) {
            Tokens t{"option"};
            append(t, tokenize(a.name));
            append(t, tokenize(a.value));
            return t;
          },
          [](const act::Description&) { return Tokens{"description"}; },
          [](const act::BackToResults&) { return Tokens{"back", "to", "results"}; },
          [](const act::BackToSearch&) { return Tokens{"back", "to", "search"}; },
          [](const act::BackToProduct&) { return Tokens{"back", "to", "product"}; },
          [](const act::Purchase&) { return Tokens{"buy", "now"}; },
      },
      action);
}

Tokens Observation::tokens() const {
  Tokens t = goal_instruction;
  append(t, page_content);
  return t;
}

std::vector<std::string> Observation::action_ids() const {
  std::vector<std::string> ids;
  ids.reserve(available_actions.size());
  for (const auto& a : available_actions) ids.push_back(action_id(a));
  return ids;
}

std::optional<std::size_t> Observation::find_action(std::string_view id) const {
  for (std::size_t i = 0; i < available_actions.size(); ++i) {
    if (action_id(available_actions[i]) == id) return i;
  }
  return std::nullopt;
}

Tokens query_from_instruction(const Goal& goal) {
  Tokens q = tokenize(goal.target_category);
  // std::set iterates in lexicographic order.
  for (const auto& attr : goal.target_attributes) append(q, tokenize(attr));
  return q;
}

Env::Env(const Catalog& catalog, const SearchIndex& index, EnvConfig config)
    : catalog_(&catalog), index_(&index), config_(config) {
  if (config_.max_steps < 1) throw ParameterError("max_steps must be >= 1");
}

std::pair<EnvState, Observation> Env::reset(const Goal& goal) const {
  EnvState s;
  s.goal = goal;
  Observation obs = observe(s);
  return {std::move(s), std::move(obs)};
}

std::vector<Action> Env::available_actions(const EnvState& state) const {
  if (state.done) throw StateError("available_actions: episode is done");
  std::vector<Action> out;
  switch (state.page) {
    case PageType::Search:
      out.emplace_back(act::Search{query_from_instruction(state.goal)});
      break;
    case PageType::Results: {
      const auto& res = *state.last_query_result;
      if (!res.empty()) {
        for (const auto& hit : res.page(state.result_page_index)) {
          out.emplace_back(act::ClickResult{hit.id, catalog_->product(hit.id).title_tokens});
        }
        if (state.result_page_index + 1 < res.num_pages()) out.emplace_back(act::NextPage{});
        if (state.result_page_index > 0) out.emplace_back(act::PrevPage{});
      }
      out.emplace_back(act::BackToSearch{});
      break;
    }
    case PageType::Product: {
      const auto& p = catalog_->product(*state.current_product);
      for (const auto& [name, values] : p.options) {
        for (const auto& v : values) out.emplace_back(act::ClickOption{name, v});
      }
      out.emplace_back(act::Description{});
      out.emplace_back(act::Purchase{});
      out.emplace_back(act::BackToResults{});
      break;
    }
    case PageType::Detail:
      out.emplace_back(act::BackToProduct{});
      break;
  }
  sort_by_id(out);
  return out;
}

Tokens Env::page_content(const EnvState& state) const {
  Tokens t;
  switch (state.page) {
    case PageType::Search:
      t.emplace_back("search");
      break;
    case PageType::Results: {
      const auto& res = *state.last_query_result;
      if (res.empty()) {
        t = {"no", "results"};
        break;
      }
      t = {"page", std::to_string(state.result_page_index + 1), "of",
           std::to_string(res.num_pages())};
      for (const auto& hit : res.page(state.result_page_index)) {
        const auto& p = catalog_->product(hit.id);
        append(t, p.title_tokens);
        t.push_back(format_price(p.price));
      }
      break;
    }
    case PageType::Product: {
      const auto& p = catalog_->product(*state.current_product);
      append(t, p.title_tokens);
      t.emplace_back("price");
      t.push_back(format_price(p.price));
      for (const auto& [name, values] : p.options) {
        t.push_back(name);
        append(t, values);
      }
      for (const auto& [name, value] : state.selected_options) {
        t.emplace_back("selected");
        t.push_back(name);
        t.push_back(value);
      }
      break;
    }
    case PageType::Detail: {
      const auto& p = catalog_->product(*state.current_product);
      append(t, p.title_tokens);
      append(t, p.description_tokens);
      t.emplace_back("attributes");
      for (const auto& a : p.attributes) append(t, tokenize(a));
      break;
    }
  }
  return t;
}

std::uint64_t Env::obs_key(const EnvState& state) const {
  std::string key(page_name(state.page));
  switch (state.page) {
    case PageType::Search:
      break;
    case PageType::Results: {
      key += "|" + std::to_string(state.result_page_index) + "|";
      const auto& res = *state.last_query_result;
      if (!res.empty()) {
        for (const auto& hit : res.page(state.result_page_index)) key += pad_id(hit.id) + ",";
      }
      break;
    }
    case PageType::Product:
    case PageType::Detail:
      key += "|" + pad_id(*state.current_product) + "|" + selected_key(state.selected_options);
      break;
  }
  return fnv1a64(key);
}

Observation Env::observe(const EnvState& state) const {
  Observation obs;
  obs.goal_instruction = state.goal.instruction_tokens;
  obs.page = state.page;
  obs.page_content = page_content(state);
  if (!state.done) obs.available_actions = available_actions(state);
  obs.obs_key = obs_key(state);
  return obs;
}

StepOutcome Env::step(EnvState& state, std::string_view id) const {
  if (state.done) throw StateError("step: episode is done");
  for (const auto& a : available_actions(state)) {
    if (action_id(a) == id) return step(state, a);
  }
  throw InvalidActionError("action '" + std::string(id) + "' not available on " +
                           std::string(page_name(state.page)) + " page");
}

StepOutcome Env::step(EnvState& state, const Action& action) const {
  if (state.done) throw StateError("step: episode is done");
  const std::string id = action_id(action);
  const auto avail = available_actions(state);
  const bool ok = std::any_of(avail.begin(), avail.end(),
                              [&](const Action& a) { return action_id(a) == id; });
  if (!ok) {
    throw InvalidActionError("action '" + id + "' not available on " +
                             std::string(page_name(state.page)) + " page");
  }

  StepOutcome out;
  ++state.step_count;
  std::visit(overloaded{
                 [&](const act::Search& a) {
                   state.last_query_result = search(*index_, a.query);
                   state.result_page_index = 0;
                   state.current_product.reset();
                   state.selected_options.clear();
                   state.page = PageType::Results;
                 },
                 [&](const act::ClickResult& a) {
                   state.current_product = a.product;
                   state.selected_options.clear();
                   state.page = PageType::Product;
                 },
                 [&](const act::NextPage&) { ++state.result_page_index; },
                 [&](const act::PrevPage&) { --state.result_page_index; },
                 [&](const act::ClickOption& a) { state.selected_options[a.name] = a.value; },
                 [&](const act::Description&) { state.page = PageType::Detail; },
                 [&](const act::BackToResults&) {
                   state.current_product.reset();
                   state.selected_options.clear();
                   state.page = PageType::Results;
                 },
                 [&](const act::BackToSearch&) {
                   state.last_query_result.reset();
                   state.result_page_index = 0;
                   state.page = PageType::Search;
                 },
                 [&](const act::BackToProduct&) { state.page = PageType::Product; },
                 [&](const act::Purchase&) {
                   const auto& p = catalog_->product(*state.current_product);
                   out.breakdown = score_purchase(state.goal, p, state.selected_options);
                   out.reward = out.breakdown->score;
                   state.done = true;
                 },
             },
             action);

  if (!state.done && state.step_count >= config_.max_steps) {
    state.done = true;
    out.reward = 0.0;
  }
  out.done = state.done;
  out.observation = observe(state);
  return out;
}

}  // namespace shoprl

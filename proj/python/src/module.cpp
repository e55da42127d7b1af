#include <memory>
#include <optional>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shoprl/cli.hpp"
#include "shoprl/eval.hpp"
#include "shoprl/io.hpp"
#include "shoprl/search.hpp"
#include "shoprl/text.hpp"

namespace py = pybind11;
using namespace shoprl;

namespace {

py::dict observation_dict(const Observation& o) {
  py::dict d;
  d["page"] = std::string(page_name(o.page));
  d["instruction"] = join(o.goal_instruction);
  d["content"] = join(o.page_content);
  d["actions"] = o.action_ids();
  d["obs_key"] = o.obs_key;
  return d;
}

/// A generated catalog, its index and goals behind one stepping interface.
class Shop {
 public:
  Shop(std::uint64_t seed, std::size_t n_products, std::size_t n_categories, std::size_t n_attributes,
       std::size_t n_goals, std::size_t max_steps)
      : catalog_(std::make_unique<Catalog>(generate_catalog(derive_seed(seed, "catalog"), n_products, n_categories,
                                                            n_attributes, default_option_vocab()))),
        index_(std::make_unique<SearchIndex>(build_index(*catalog_))),
        env_(std::make_unique<Env>(*catalog_, *index_, EnvConfig{max_steps})),
        goals_(generate_goals(*catalog_, derive_seed(seed, "goals"), n_goals)) {}

  std::size_t n_products() const { return catalog_->products.size(); }
  std::size_t n_goals() const { return goals_.size(); }

  std::vector<std::pair<ProductId, double>> query(const std::string& text) const {
    std::vector<std::pair<ProductId, double>> out;
    for (const auto& r : shoprl::search(*index_, tokenize(text)).ranked) out.emplace_back(r.id, r.score);
    return out;
  }

  py::dict reset(std::size_t goal) {
    auto [state, obs] = env_->reset(goals_.at(goal));
    state_ = std::move(state);
    return observation_dict(obs);
  }

  py::tuple step(const std::string& action_id) {
    if (!state_) throw StateError("reset() has not been called");
    const auto out = env_->step(*state_, action_id);
    return py::make_tuple(observation_dict(out.observation), out.reward, out.done);
  }

  py::dict greedy_rollout(const std::string& checkpoint, std::size_t goal) const {
    const auto params = read_checkpoint(checkpoint);
    const auto r = rollout(params, *env_, goals_.at(goal));
    py::dict d;
    d["score"] = r.score;
    d["success"] = r.success;
    d["length"] = r.length;
    return d;
  }

 private:
  std::unique_ptr<Catalog> catalog_;
  std::unique_ptr<SearchIndex> index_;
  std::unique_ptr<Env> env_;
  std::vector<Goal> goals_;
  std::optional<EnvState> state_;
};

}  // namespace

PYBIND11_MODULE(_shoprl, m) {
  m.doc() = "Bindings for the shoprl core library";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<InvalidActionError>(m, "InvalidActionError", PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_LookupError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "derive_seed", [](std::uint64_t master, const std::string& stage) { return derive_seed(master, stage); },
      py::arg("master"), py::arg("stage"));
  m.def(
      "featurize",
      [](const std::vector<std::string>& tokens, std::size_t d) {
        const auto f = featurize(tokens, d);
        return std::make_pair(std::vector<std::uint32_t>(f.index.begin(), f.index.end()),
                              std::vector<double>(f.value.begin(), f.value.end()));
      },
      py::arg("tokens"), py::arg("d"));
  m.def("bt_preference_prob", &bt_preference_prob, py::arg("reward_preferred"), py::arg("reward_dispreferred"));
  m.def("clipped_surrogate", &clipped_surrogate, py::arg("ratio"), py::arg("advantage"), py::arg("epsilon"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the shoprl tool in-process; returns (exit_code, stdout, stderr).");

  py::class_<Shop>(m, "Shop")
      .def(py::init<std::uint64_t, std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>(),
           py::arg("seed"), py::arg("n_products") = 1000, py::arg("n_categories") = 40,
           py::arg("n_attributes") = 96, py::arg("n_goals") = 100, py::arg("max_steps") = 30)
      .def_property_readonly("n_products", &Shop::n_products)
      .def_property_readonly("n_goals", &Shop::n_goals)
      .def("search", &Shop::query, py::arg("query"))
      .def("reset", &Shop::reset, py::arg("goal"))
      .def("step", &Shop::step, py::arg("action_id"))
      .def("greedy_rollout", &Shop::greedy_rollout, py::arg("checkpoint"), py::arg("goal"));
}

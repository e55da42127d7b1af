#include "shoprl/policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

void check_shape(std::size_t d, std::size_t k) {
  if (d == 0 || !std::has_single_bit(d)) throw ParameterError("feature dimension must be a power of two");
  if (k == 0) throw ParameterError("embedding dimension must be >= 1");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> embed(const std::vector<double>& m, std::size_t k, const FeatureVector& f) {
  std::vector<double> out(k, 0.0);
  for (std::size_t n = 0; n < f.nnz(); ++n) {
    const double* col = m.data() + static_cast<std::size_t>(f.index[n]) * k;
    const double x = f.value[n];
    for (std::size_t i = 0; i < k; ++i) out[i] += col[i] * x;
  }
  return out;
}

void add_column(std::unordered_map<std::uint32_t, std::vector<double>>& cols, std::size_t k,
                std::uint32_t col, std::span<const double> values, double scale) {
  auto& c = cols[col];
  if (c.empty()) c.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) c[i] += scale * values[i];
}

}  // namespace

double FeatureVector::at(std::uint32_t i) const {
  auto it = std::lower_bound(index.begin(), index.end(), i);
  if (it == index.end() || *it != i) return 0.0;
  return value[static_cast<std::size_t>(it - index.begin())];
}

double FeatureVector::dot(const FeatureVector& other) const {
  double s = 0.0;
  std::size_t a = 0, b = 0;
  while (a < nnz() && b < other.nnz()) {
    if (index[a] == other.index[b]) {
      s += value[a++] * other.value[b++];
    } else if (index[a] < other.index[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  return s;
}

double FeatureVector::norm() const {
  double s = 0.0;
  for (double x : value) s += x * x;
  return std::sqrt(s);
}

FeatureVector featurize(const Tokens& tokens, std::size_t d) {
  if (d == 0 || !std::has_single_bit(d)) throw ParameterError("featurize: d must be a power of two");
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    const std::uint64_t h = fnv1a64(t);
    const auto bucket = static_cast<std::uint32_t>(h & (d - 1));
    counts[bucket] += (std::popcount(h) % 2 == 0) ? 1.0 : -1.0;
  }
  FeatureVector f;
  f.dim = d;
  double sq = 0.0;
  for (const auto& [i, c] : counts) {
    if (c == 0.0) continue;  // colliding tokens with opposite signs cancel
    f.index.push_back(i);
    f.value.push_back(c);
    sq += c * c;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : f.value) x *= inv;
  }
  return f;
}

PolicyParams PolicyParams::zeros(std::size_t d, std::size_t k) {
  check_shape(d, k);
  PolicyParams p;
  p.d = d;
  p.k = k;
  p.P.assign(d * k, 0.0);
  p.Q.assign(d * k, 0.0);
  p.v.assign(d, 0.0);
  return p;
}

PolicyParams PolicyParams::init(std::size_t d, std::size_t k, std::uint64_t seed) {
  PolicyParams p = zeros(d, k);
  Rng rng(seed);
  for (double& x : p.P) x = rng.uniform(-0.01, 0.01);
  for (double& x : p.Q) x = rng.uniform(-0.01, 0.01);
  p.seed_lineage.push_back("init:" + std::to_string(seed));
  return p;
}

bool PolicyParams::finite() const {
  auto ok = [](const std::vector<double>& xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(P) && ok(Q) && ok(v);
}

bool PolicyParams::same_weights(const PolicyParams& o) const {
  return d == o.d && k == o.k && P == o.P && Q == o.Q && v == o.v;
}

void Gradient::add_p_column(std::uint32_t col, std::span<const double> values, double scale) {
  add_column(p_, k_, col, values, scale);
}

void Gradient::add_q_column(std::uint32_t col, std::span<const double> values, double scale) {
  add_column(q_, k_, col, values, scale);
}

void Gradient::add_v(std::uint32_t col, double value) { v_[col] += value; }

void Gradient::add(const Gradient& other, double scale) {
  if (d_ == 0 && k_ == 0) {
    d_ = other.d_;
    k_ = other.k_;
  }
  if (other.d_ != d_ || other.k_ != k_) throw ParameterError("gradient shape mismatch");
  for (const auto& [col, values] : other.p_) add_column(p_, k_, col, values, scale);
  for (const auto& [col, values] : other.q_) add_column(q_, k_, col, values, scale);
  for (const auto& [col, value] : other.v_) v_[col] += scale * value;
}

void Gradient::scale(double s) {
  for (auto& [col, values] : p_) {
    for (double& x : values) x *= s;
  }
  for (auto& [col, values] : q_) {
    for (double& x : values) x *= s;
  }
  for (auto& [col, value] : v_) value *= s;
}

double Gradient::p(std::size_t row, std::size_t col) const {
  auto it = p_.find(static_cast<std::uint32_t>(col));
  return it == p_.end() ? 0.0 : it->second[row];
}

double Gradient::q(std::size_t row, std::size_t col) const {
  auto it = q_.find(static_cast<std::uint32_t>(col));
  return it == q_.end() ? 0.0 : it->second[row];
}

double Gradient::v(std::size_t col) const {
  auto it = v_.find(static_cast<std::uint32_t>(col));
  return it == v_.end() ? 0.0 : it->second;
}

double Gradient::squared_norm() const {
  double s = 0.0;
  for (const auto& [col, values] : p_) {
    for (double x : values) s += x * x;
  }
  for (const auto& [col, values] : q_) {
    for (double x : values) s += x * x;
  }
  for (const auto& [col, value] : v_) s += value * value;
  return s;
}

void Gradient::apply(PolicyParams& params, double learning_rate) const {
  if (params.d != d_ || params.k != k_) throw ParameterError("gradient shape mismatch");
  for (const auto& [col, values] : p_) {
    double* dst = params.P.data() + static_cast<std::size_t>(col) * k_;
    for (std::size_t i = 0; i < k_; ++i) dst[i] -= learning_rate * values[i];
  }
  for (const auto& [col, values] : q_) {
    double* dst = params.Q.data() + static_cast<std::size_t>(col) * k_;
    for (std::size_t i = 0; i < k_; ++i) dst[i] -= learning_rate * values[i];
  }
  for (const auto& [col, value] : v_) params.v[col] -= learning_rate * value;
}

std::size_t ActionDistribution::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < action_ids.size(); ++i) {
    if (action_ids[i] == id) return i;
  }
  throw InvalidActionError("action '" + std::string(id) + "' is not available");
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) h -= probs[i] * logprobs[i];
  return h;
}

ActionDistribution ActionDistribution::from_logits(std::vector<std::string> ids,
                                                   std::vector<double> logits) {
  if (ids.empty()) throw StateError("action distribution over an empty action set");
  ActionDistribution dist;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - m);
  const double lse = m + std::log(z);
  dist.logprobs.reserve(logits.size());
  dist.probs.reserve(logits.size());
  for (double l : logits) {
    dist.logprobs.push_back(l - lse);
    dist.probs.push_back(std::exp(l - lse));
  }
  dist.action_ids = std::move(ids);
  dist.logits = std::move(logits);
  return dist;
}

EncodedObservation encode(const Observation& obs, std::size_t d) {
  EncodedObservation enc;
  enc.obs = featurize(obs.tokens(), d);
  enc.actions.reserve(obs.available_actions.size());
  enc.action_ids.reserve(obs.available_actions.size());
  for (const auto& a : obs.available_actions) {
    enc.actions.push_back(featurize(render_action(a), d));
    enc.action_ids.push_back(action_id(a));
  }
  return enc;
}

PolicyForward forward(const PolicyParams& params, const EncodedObservation& enc) {
  if (enc.obs.dim != params.d) throw ParameterError("feature dimension does not match policy");
  PolicyForward fwd;
  fwd.obs_embedding = embed(params.P, params.k, enc.obs);
  std::vector<double> logits;
  logits.reserve(enc.actions.size());
  fwd.action_embeddings.reserve(enc.actions.size());
  for (const auto& a : enc.actions) {
    fwd.action_embeddings.push_back(embed(params.Q, params.k, a));
    logits.push_back(dot(fwd.obs_embedding, fwd.action_embeddings.back()));
  }
  fwd.dist = ActionDistribution::from_logits(enc.action_ids, std::move(logits));
  for (std::size_t n = 0; n < enc.obs.nnz(); ++n) {
    fwd.value += params.v[enc.obs.index[n]] * enc.obs.value[n];
  }
  return fwd;
}

void accumulate_logit_grad(const EncodedObservation& enc, const PolicyForward& fwd,
                           std::span<const double> dlogits, double scale, Gradient& grad) {
  const std::size_t k = fwd.obs_embedding.size();
  // d logit(a) / dP = (Q psi_a) phi^T ; d logit(a) / dQ = (P phi) psi_a^T.
  std::vector<double> obs_dir(k, 0.0);
  for (std::size_t a = 0; a < dlogits.size(); ++a) {
    if (dlogits[a] == 0.0) continue;
    const auto& w = fwd.action_embeddings[a];
    for (std::size_t i = 0; i < k; ++i) obs_dir[i] += dlogits[a] * w[i];
  }
  for (std::size_t n = 0; n < enc.obs.nnz(); ++n) {
    grad.add_p_column(enc.obs.index[n], obs_dir, scale * enc.obs.value[n]);
  }
  for (std::size_t a = 0; a < dlogits.size(); ++a) {
    if (dlogits[a] == 0.0) continue;
    const auto& psi = enc.actions[a];
    for (std::size_t n = 0; n < psi.nnz(); ++n) {
      grad.add_q_column(psi.index[n], fwd.obs_embedding, scale * dlogits[a] * psi.value[n]);
    }
  }
}

std::vector<double> logprob_dlogits(const ActionDistribution& dist, std::size_t action) {
  std::vector<double> c(dist.probs.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (i == action ? 1.0 : 0.0) - dist.probs[i];
  return c;
}

std::vector<double> entropy_dlogits(const ActionDistribution& dist) {
  const double h = dist.entropy();
  std::vector<double> c(dist.probs.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = -dist.probs[i] * (dist.logprobs[i] + h);
  return c;
}

ActionDistribution action_distribution(const PolicyParams& params, const Observation& obs) {
  if (obs.available_actions.empty()) throw StateError("observation has no available actions");
  return forward(params, encode(obs, params.d)).dist;
}

std::string sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    cum += dist.probs[i];
    if (u < cum) return dist.action_ids[i];
  }
  // Round-off left u above the final partial sum; take the last action with mass.
  for (std::size_t i = dist.probs.size(); i-- > 0;) {
    if (dist.probs[i] > 0.0) return dist.action_ids[i];
  }
  return dist.action_ids.back();
}

std::string greedy_action(const ActionDistribution& dist) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.probs.size(); ++i) {
    if (dist.probs[i] > dist.probs[best] ||
        (dist.probs[i] == dist.probs[best] && dist.action_ids[i] < dist.action_ids[best])) {
      best = i;
    }
  }
  return dist.action_ids[best];
}

double state_value(const PolicyParams& params, const Observation& obs) {
  const auto phi = featurize(obs.tokens(), params.d);
  double v = 0.0;
  for (std::size_t n = 0; n < phi.nnz(); ++n) v += params.v[phi.index[n]] * phi.value[n];
  return v;
}

std::pair<double, Gradient> logprob_and_grad(const PolicyParams& params, const Observation& obs,
                                             std::string_view action_id) {
  if (obs.available_actions.empty()) throw StateError("observation has no available actions");
  const auto enc = encode(obs, params.d);
  const auto fwd = forward(params, enc);
  const std::size_t a = fwd.dist.index_of(action_id);
  Gradient g(params.d, params.k);
  accumulate_logit_grad(enc, fwd, logprob_dlogits(fwd.dist, a), 1.0, g);
  return {fwd.dist.logprobs[a], std::move(g)};
}

std::pair<double, Gradient> entropy_and_grad(const PolicyParams& params, const Observation& obs) {
  if (obs.available_actions.empty()) throw StateError("observation has no available actions");
  const auto enc = encode(obs, params.d);
  const auto fwd = forward(params, enc);
  Gradient g(params.d, params.k);
  accumulate_logit_grad(enc, fwd, entropy_dlogits(fwd.dist), 1.0, g);
  return {fwd.dist.entropy(), std::move(g)};
}

std::pair<double, Gradient> value_and_grad(const PolicyParams& params, const Observation& obs) {
  const auto phi = featurize(obs.tokens(), params.d);
  Gradient g(params.d, params.k);
  double v = 0.0;
  for (std::size_t n = 0; n < phi.nnz(); ++n) {
    v += params.v[phi.index[n]] * phi.value[n];
    g.add_v(phi.index[n], phi.value[n]);
  }
  return {v, std::move(g)};
}

}  // namespace shoprl

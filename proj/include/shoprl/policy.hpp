#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "shoprl/env.hpp"
#include "shoprl/random.hpp"

namespace shoprl {

/// Sparse, L2-normalized signed feature-hashing vector.
struct FeatureVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> index;  // ascending, unique
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
  bool empty() const { return index.empty(); }
  double at(std::uint32_t i) const;
  double dot(const FeatureVector& other) const;
  double norm() const;
};

/// Hashed bag of words. Each token is hashed with 64-bit FNV-1a (offset basis
/// 0xcbf29ce484222325, prime 0x100000001b3); the bucket is hash mod d and the
/// sign is +1 when popcount(hash) is even, -1 otherwise. Signed counts are
/// accumulated then L2-normalized; no tokens gives the zero vector.
/// Throws ParameterError unless d is a power of two.
FeatureVector featurize(const Tokens& tokens, std::size_t d);

/// Bilinear scorer logit(a) = (P phi(o)) . (Q psi(a)) plus linear value head
/// V(o) = v . phi(o). P and Q are k x d, stored feature-major: the k entries of
/// column j are contiguous.
struct PolicyParams {
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<double> P;
  std::vector<double> Q;
  std::vector<double> v;
  std::vector<std::string> seed_lineage;

  static PolicyParams zeros(std::size_t d, std::size_t k);
  /// P, Q i.i.d. U[-0.01, 0.01]; v = 0.
  static PolicyParams init(std::size_t d, std::size_t k, std::uint64_t seed);

  double p(std::size_t row, std::size_t col) const { return P[col * k + row]; }
  double q(std::size_t row, std::size_t col) const { return Q[col * k + row]; }
  double& p(std::size_t row, std::size_t col) { return P[col * k + row]; }
  double& q(std::size_t row, std::size_t col) { return Q[col * k + row]; }
  const double* p_column(std::size_t col) const { return P.data() + col * k; }
  const double* q_column(std::size_t col) const { return Q.data() + col * k; }

  bool finite() const;
  /// Weights equal bit for bit (lineage ignored).
  bool same_weights(const PolicyParams& other) const;
};

/// Same shape as PolicyParams; only the columns actually touched are stored.
class Gradient {
 public:
  Gradient() = default;
  Gradient(std::size_t d, std::size_t k) : d_(d), k_(k) {}

  std::size_t d() const { return d_; }
  std::size_t k() const { return k_; }

  void add_p_column(std::uint32_t col, std::span<const double> values, double scale);
  void add_q_column(std::uint32_t col, std::span<const double> values, double scale);
  void add_v(std::uint32_t col, double value);
  /// this += scale * other. Throws ParameterError on shape mismatch.
  void add(const Gradient& other, double scale = 1.0);
  void scale(double s);

  double p(std::size_t row, std::size_t col) const;
  double q(std::size_t row, std::size_t col) const;
  double v(std::size_t col) const;
  double squared_norm() const;

  /// params -= learning_rate * this.
  void apply(PolicyParams& params, double learning_rate) const;

 private:
  std::size_t d_ = 0;
  std::size_t k_ = 0;
  std::unordered_map<std::uint32_t, std::vector<double>> p_;
  std::unordered_map<std::uint32_t, std::vector<double>> q_;
  std::unordered_map<std::uint32_t, double> v_;
};

struct ActionDistribution {
  std::vector<std::string> action_ids;
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> logprobs;

  /// Throws InvalidActionError for an id not in the distribution.
  std::size_t index_of(std::string_view id) const;
  double entropy() const;

  /// Softmax via log-sum-exp. Throws StateError on an empty action set.
  static ActionDistribution from_logits(std::vector<std::string> ids, std::vector<double> logits);
};

/// Featurized observation and actions, reusable across parameter updates.
struct EncodedObservation {
  FeatureVector obs;
  std::vector<FeatureVector> actions;
  std::vector<std::string> action_ids;
};

EncodedObservation encode(const Observation& obs, std::size_t d);

/// Intermediate values of one policy evaluation.
struct PolicyForward {
  std::vector<double> obs_embedding;                   // P phi, length k
  std::vector<std::vector<double>> action_embeddings;  // Q psi_a, length k each
  ActionDistribution dist;
  double value = 0.0;
};

PolicyForward forward(const PolicyParams& params, const EncodedObservation& enc);

/// grad += scale * sum_a dlogits[a] * d logit(a) / d(P, Q).
void accumulate_logit_grad(const EncodedObservation& enc, const PolicyForward& fwd,
                           std::span<const double> dlogits, double scale, Gradient& grad);

/// d ln pi(a) / d logit(a') = 1[a' = a] - pi(a').
std::vector<double> logprob_dlogits(const ActionDistribution& dist, std::size_t action);
/// d H / d logit(a) = -pi(a) (ln pi(a) + H).
std::vector<double> entropy_dlogits(const ActionDistribution& dist);

ActionDistribution action_distribution(const PolicyParams& params, const Observation& obs);
std::string sample_action(const ActionDistribution& dist, Rng& rng);
/// Highest probability; ties go to the lexicographically smallest id.
std::string greedy_action(const ActionDistribution& dist);
double state_value(const PolicyParams& params, const Observation& obs);

/// ln pi(a | o) and its gradient. Throws InvalidActionError for an unavailable action.
std::pair<double, Gradient> logprob_and_grad(const PolicyParams& params, const Observation& obs,
                                             std::string_view action_id);
/// Entropy of pi(. | o) and its gradient.
std::pair<double, Gradient> entropy_and_grad(const PolicyParams& params, const Observation& obs);
/// V(o) and its gradient (phi(o) on the value head).
std::pair<double, Gradient> value_and_grad(const PolicyParams& params, const Observation& obs);

}  // namespace shoprl

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shoprl/catalog.hpp"

namespace shoprl {

struct Posting {
  ProductId doc = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 with the Lucene smoothed idf ln(1 + (N - df + 0.5) / (df + 0.5)).
struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Params&) const = default;
};

/// Inverted index over title + description tokens. Immutable once built.
class SearchIndex {
 public:
  /// Throws ParameterError on an empty catalog.
  static SearchIndex build(const Catalog& catalog);

  std::span<const Posting> postings(const std::string& term) const;
  /// Equals postings(term).size().
  std::size_t df(const std::string& term) const { return postings(term).size(); }
  /// Throws NotFoundError for an unindexed product.
  std::uint32_t doc_len(ProductId doc) const;
  bool contains(ProductId doc) const { return doc_len_.count(doc) != 0; }
  double avg_doc_len() const { return avg_doc_len_; }
  std::size_t n_docs() const { return doc_len_.size(); }
  std::size_t n_terms() const { return postings_.size(); }
  const std::map<std::string, std::vector<Posting>>& all_postings() const { return postings_; }
  const std::map<ProductId, std::uint32_t>& doc_lengths() const { return doc_len_; }
  const Bm25Params& params() const { return params_; }

  bool operator==(const SearchIndex&) const = default;

 private:
  std::map<std::string, std::vector<Posting>> postings_;
  std::map<ProductId, std::uint32_t> doc_len_;
  double avg_doc_len_ = 0.0;
  Bm25Params params_;
};

struct ScoredDoc {
  ProductId id = 0;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Ranked hits (score descending, id ascending), shown 10 per page.
struct QueryResult {
  static constexpr std::size_t kPageSize = 10;
  static constexpr std::size_t kMaxResults = 50;

  std::vector<ScoredDoc> ranked;

  std::size_t num_pages() const { return (ranked.size() + kPageSize - 1) / kPageSize; }
  /// Throws NotFoundError for an out-of-range page.
  std::span<const ScoredDoc> page(std::size_t i) const;
  bool empty() const { return ranked.empty(); }

  bool operator==(const QueryResult&) const = default;
};

SearchIndex build_index(const Catalog& catalog);

/// Sum over query tokens (a bag: duplicates count again) of
/// idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl)).
double bm25_score(const SearchIndex& index, const Tokens& query_tokens, ProductId doc);

/// All documents with positive score, ranked and truncated to top_k
/// (top_k is capped at 50).
QueryResult search(const SearchIndex& index, const Tokens& query_tokens,
                   std::size_t top_k = QueryResult::kMaxResults);

}  // namespace shoprl

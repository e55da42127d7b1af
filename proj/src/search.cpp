#include "shoprl/search.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "shoprl/errors.hpp"

namespace shoprl {
namespace {

double idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs);
  const double d = static_cast<double>(df);
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

// One query term's contribution; shared by scoring and ranking so both sum
// identical terms in identical order.
double term_weight(const SearchIndex& index, std::size_t df, std::uint32_t tf,
                   std::uint32_t dl) {
  const auto& p = index.params();
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - p.b + p.b * static_cast<double>(dl) / index.avg_doc_len();
  return idf(index.n_docs(), df) * f * (p.k1 + 1.0) / (f + p.k1 * norm);
}

}  // namespace

SearchIndex SearchIndex::build(const Catalog& catalog) {
  if (catalog.products.empty()) throw ParameterError("build_index: empty catalog");
  SearchIndex idx;
  std::map<std::string, std::map<ProductId, std::uint32_t>> acc;
  double total = 0.0;
  for (const auto& p : catalog.products) {
    std::uint32_t len = 0;
    for (const auto* part : {&p.title_tokens, &p.description_tokens}) {
      for (const auto& t : *part) {
        ++acc[t][p.id];
        ++len;
      }
    }
    idx.doc_len_[p.id] = len;
    total += len;
  }
  for (auto& [term, docs] : acc) {
    auto& list = idx.postings_[term];
    list.reserve(docs.size());
    for (const auto& [doc, tf] : docs) list.push_back({doc, tf});
  }
  idx.avg_doc_len_ = total / static_cast<double>(idx.doc_len_.size());
  return idx;
}

std::span<const Posting> SearchIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  if (it == postings_.end()) return {};
  return it->second;
}

std::uint32_t SearchIndex::doc_len(ProductId doc) const {
  auto it = doc_len_.find(doc);
  if (it == doc_len_.end()) throw NotFoundError("product " + std::to_string(doc) + " not indexed");
  return it->second;
}

std::span<const ScoredDoc> QueryResult::page(std::size_t i) const {
  if (i >= num_pages()) throw NotFoundError("result page " + std::to_string(i) + " out of range");
  const std::size_t begin = i * kPageSize;
  const std::size_t end = std::min(ranked.size(), begin + kPageSize);
  return std::span<const ScoredDoc>(ranked).subspan(begin, end - begin);
}

SearchIndex build_index(const Catalog& catalog) { return SearchIndex::build(catalog); }

double bm25_score(const SearchIndex& index, const Tokens& query_tokens, ProductId doc) {
  const std::uint32_t dl = index.doc_len(doc);
  double score = 0.0;
  for (const auto& term : query_tokens) {
    const auto list = index.postings(term);
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, ProductId d) { return p.doc < d; });
    if (it == list.end() || it->doc != doc) continue;
    score += term_weight(index, list.size(), it->tf, dl);
  }
  return score;
}

QueryResult search(const SearchIndex& index, const Tokens& query_tokens, std::size_t top_k) {
  if (top_k < 1) throw ParameterError("search: top_k must be >= 1");
  top_k = std::min(top_k, QueryResult::kMaxResults);

  std::unordered_map<ProductId, double> scores;
  for (const auto& term : query_tokens) {
    const auto list = index.postings(term);
    for (const auto& p : list) {
      scores[p.doc] += term_weight(index, list.size(), p.tf, index.doc_len(p.doc));
    }
  }

  QueryResult r;
  r.ranked.reserve(scores.size());
  for (const auto& [doc, s] : scores) {
    if (s > 0.0) r.ranked.push_back({doc, s});
  }
  std::sort(r.ranked.begin(), r.ranked.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (r.ranked.size() > top_k) r.ranked.resize(top_k);
  return r;
}

}  // namespace shoprl

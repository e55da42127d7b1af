#include "shoprl/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string_view>

#include "shoprl/errors.hpp"
#include "shoprl/random.hpp"

namespace shoprl {
namespace {

constexpr std::array<std::string_view, 40> kCategoryWords = {
    "sweater", "jacket",  "boots",    "sneakers", "backpack", "lamp",
    "blender", "kettle",  "headphones", "speaker", "watch",   "wallet",
    "scarf",   "gloves",  "hat",      "sandals",  "dress",    "jeans",
    "pillow",  "blanket", "mug",      "toaster",  "keyboard", "mouse",
    "monitor", "chair",   "desk",     "shelf",    "rug",      "candle",
    "tent",    "bottle",  "umbrella", "belt",     "socks",    "shorts",
    "hoodie",  "vest",    "skillet",  "cookware"};

// Attribute words never overlap with option values, category words or brands.
constexpr std::array<std::string_view, 96> kAttributeWords = {
    "wool",        "cotton",      "leather",    "waterproof",  "lightweight",
    "wireless",    "portable",    "rechargeable", "stainless", "organic",
    "vegan",       "handmade",    "insulated",  "breathable",  "adjustable",
    "foldable",    "ergonomic",   "bamboo",     "ceramic",     "glass",
    "wooden",      "metal",       "plastic",    "silicone",    "linen",
    "silk",        "denim",       "fleece",     "velvet",      "suede",
    "knit",        "quilted",     "padded",     "slim",        "oversized",
    "vintage",     "modern",      "rustic",     "minimalist",  "classic",
    "durable",     "washable",    "nonstick",   "cordless",    "bluetooth",
    "noise",       "cancelling",  "compact",    "heavy",       "duty",
    "thermal",     "reflective",  "antibacterial", "hypoallergenic", "eco",
    "recycled",    "memory",      "foam",       "gel",         "orthopedic",
    "magnetic",    "digital",     "analog",     "solar",       "usb",
    "led",         "dimmable",    "smart",      "programmable", "dishwasher",
    "safe",        "microwave",   "oven",       "scratch",     "resistant",
    "windproof",   "stretch",     "cushioned",  "lined",       "hooded",
    "zippered",    "pocketed",    "reversible", "stackable",   "collapsible",
    "travel",      "outdoor",     "indoor",     "kids",        "unisex",
    "mens",        "womens",      "luxury",     "budget",      "premium",
    "sport"};

constexpr std::array<std::string_view, 24> kBrandWords = {
    "acme",   "nordic",  "zenith", "orbit",  "summit", "harbor",
    "maple",  "granite", "willow", "cobalt", "ember",  "aurora",
    "vertex", "pioneer", "lumen",  "sierra", "tundra", "coral",
    "atlas",  "nimbus",  "quartz", "falcon", "cedar",  "drift"};

constexpr std::array<std::string_view, 32> kFillerWords = {
    "great",    "quality", "for",     "everyday", "use",     "perfect",
    "gift",     "design",  "comfort", "style",    "easy",    "to",
    "clean",    "fits",    "most",    "ideal",    "home",    "office",
    "features", "made",    "from",    "carefully", "selected", "materials",
    "built",    "last",    "with",    "a",        "simple",  "look",
    "and",      "feel"};

std::vector<std::string> make_categories(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < kCategoryWords.size()) {
      out.emplace_back(kCategoryWords[i]);
    } else {
      out.push_back("kind" + std::to_string(i));
    }
  }
  return out;
}

// Single words first, then two-word attributes built from word pairs.
std::vector<std::string> make_attribute_vocab(std::size_t n) {
  std::vector<std::string> out;
  const std::size_t w = kAttributeWords.size();
  for (std::size_t i = 0; i < n && i < w; ++i) out.emplace_back(kAttributeWords[i]);
  for (std::size_t i = 0; out.size() < n && i < w; ++i) {
    for (std::size_t j = 0; out.size() < n && j < w; ++j) {
      if (i == j) continue;
      out.push_back(std::string(kAttributeWords[i]) + " " +
                    std::string(kAttributeWords[j]));
    }
  }
  if (out.size() < n) throw ParameterError("attr_vocab_size too large");
  return out;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.index(i)]);
  }
}

std::size_t weighted_pick(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()),
                               cdf.size() - 1);
}

void append_words(Tokens& out, const std::string& phrase) {
  for (auto& t : tokenize(phrase)) out.push_back(std::move(t));
}

}  // namespace

OptionMap default_option_vocab() {
  return {{"color", {"black", "white", "navy", "grey", "beige", "olive", "maroon"}},
          {"size", {"small", "medium", "large", "xlarge"}}};
}

const Product& Catalog::product(ProductId id) const {
  // Generated and loaded catalogs use dense ids; fall back to a scan otherwise.
  if (id < products.size() && products[id].id == id) return products[id];
  for (const auto& p : products) {
    if (p.id == id) return p;
  }
  throw NotFoundError("unknown product id " + std::to_string(id));
}

bool Catalog::contains(ProductId id) const {
  if (id < products.size() && products[id].id == id) return true;
  return std::any_of(products.begin(), products.end(),
                     [id](const Product& p) { return p.id == id; });
}

void Catalog::rebuild_vocabularies() {
  std::set<std::string> cats, attrs;
  std::map<std::string, std::set<std::string>> opts;
  for (const auto& p : products) {
    cats.insert(p.category);
    attrs.insert(p.attributes.begin(), p.attributes.end());
    for (const auto& [name, values] : p.options) {
      opts[name].insert(values.begin(), values.end());
    }
  }
  categories.assign(cats.begin(), cats.end());
  attribute_vocab.assign(attrs.begin(), attrs.end());
  option_vocab.clear();
  for (const auto& [name, values] : opts) {
    option_vocab[name].assign(values.begin(), values.end());
  }
}

Catalog generate_catalog(std::uint64_t seed, std::size_t n_products,
                         std::size_t n_categories, std::size_t attr_vocab_size,
                         const OptionMap& option_vocab) {
  if (n_products < 1 || n_categories < 1 || attr_vocab_size < 1) {
    throw ParameterError(
        "generate_catalog: n_products, n_categories and attr_vocab_size must be >= 1");
  }
  for (const auto& [name, values] : option_vocab) {
    if (values.empty()) {
      throw ParameterError("option '" + name + "' has no values");
    }
  }

  Rng rng(seed);
  Catalog cat;
  cat.categories = make_categories(n_categories);
  cat.attribute_vocab = make_attribute_vocab(attr_vocab_size);
  cat.option_vocab = option_vocab;

  // Category-conditioned attribute pools with 1/(rank+1) weights.
  const std::size_t pool_size = std::min<std::size_t>(
      attr_vocab_size, std::max<std::size_t>(6, 2 * attr_vocab_size / n_categories));
  std::vector<std::vector<std::size_t>> pools(n_categories);
  std::vector<std::vector<double>> pool_cdf(n_categories);
  for (std::size_t c = 0; c < n_categories; ++c) {
    std::vector<std::size_t> all(attr_vocab_size);
    std::iota(all.begin(), all.end(), std::size_t{0});
    shuffle(all, rng);
    pools[c].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(pool_size));
    double acc = 0.0;
    for (std::size_t r = 0; r < pool_size; ++r) {
      acc += 1.0 / static_cast<double>(r + 1);
      pool_cdf[c].push_back(acc);
    }
  }

  std::vector<std::string> option_names;
  for (const auto& [name, values] : option_vocab) option_names.push_back(name);

  const double log_lo = std::log(5.0);
  const double log_hi = std::log(200.0);

  cat.products.reserve(n_products);
  for (std::size_t i = 0; i < n_products; ++i) {
    Product p;
    p.id = static_cast<ProductId>(i);
    const std::size_t c = i < n_categories ? i : rng.index(n_categories);
    p.category = cat.categories[c];

    const std::size_t want =
        std::min<std::size_t>(rng.range(2, 6), attr_vocab_size);
    std::vector<std::string> chosen;
    for (int attempt = 0; chosen.size() < want && attempt < 100; ++attempt) {
      std::size_t a;
      if (rng.bernoulli(0.85)) {
        a = pools[c][weighted_pick(pool_cdf[c], rng)];
      } else {
        a = rng.index(attr_vocab_size);
      }
      const auto& attr = cat.attribute_vocab[a];
      if (std::find(chosen.begin(), chosen.end(), attr) == chosen.end()) {
        chosen.push_back(attr);
      }
    }
    p.attributes.insert(chosen.begin(), chosen.end());

    p.title_tokens.emplace_back(kBrandWords[rng.index(kBrandWords.size())]);
    for (const auto& attr : chosen) append_words(p.title_tokens, attr);
    append_words(p.title_tokens, p.category);

    const std::size_t n_filler = rng.range(6, 12);
    for (std::size_t f = 0; f < n_filler; ++f) {
      p.description_tokens.emplace_back(kFillerWords[rng.index(kFillerWords.size())]);
    }

    if (!option_names.empty()) {
      const std::size_t n_dims =
          rng.range(0, std::min<std::size_t>(2, option_names.size()));
      auto names = option_names;
      shuffle(names, rng);
      for (std::size_t k = 0; k < n_dims; ++k) {
        const auto& values = option_vocab.at(names[k]);
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        shuffle(idx, rng);
        const std::size_t keep = rng.range(1, values.size());
        idx.resize(keep);
        std::sort(idx.begin(), idx.end());
        auto& allowed = p.options[names[k]];
        for (auto j : idx) allowed.push_back(values[j]);
      }
    }

    p.price = std::clamp(round_cents(std::exp(rng.uniform(log_lo, log_hi))), 5.0, 200.0);
    cat.products.push_back(std::move(p));
  }
  return cat;
}

BigramStats BigramStats::build(std::span<const Tokens> docs) {
  BigramStats stats;
  stats.n_docs = docs.size();
  for (const auto& doc : docs) {
    auto grams = bigrams(doc);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (const auto& g : grams) ++stats.df[g];
  }
  return stats;
}

std::vector<std::string> bigrams(const Tokens& doc) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
    out.push_back(doc[i] + " " + doc[i + 1]);
  }
  return out;
}

std::vector<std::string> derive_attributes(const Tokens& doc,
                                           const BigramStats& corpus_stats,
                                           std::size_t k) {
  if (k < 1) throw ParameterError("derive_attributes: k must be >= 1");
  std::map<std::string, std::size_t> tf;
  for (auto& g : bigrams(doc)) ++tf[g];

  const double n = static_cast<double>(std::max<std::size_t>(corpus_stats.n_docs, 1));
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& [gram, count] : tf) {
    auto it = corpus_stats.df.find(gram);
    const double df = it == corpus_stats.df.end() ? 1.0 : static_cast<double>(it->second);
    scored.emplace_back(static_cast<double>(count) * std::log(n / df), gram);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].second);
  return out;
}

Tokens render_instruction(const std::string& category,
                          const std::set<std::string>& attributes,
                          const OptionChoice& options, double budget) {
  Tokens t = {"find", "me", "a"};
  append_words(t, category);
  t.emplace_back("with");
  for (const auto& a : attributes) append_words(t, a);
  for (const auto& [name, value] : options) {
    t.emplace_back("and");
    append_words(t, name);
    append_words(t, value);
  }
  t.emplace_back("under");
  t.push_back(format_price(budget));
  t.emplace_back("dollars");
  return t;
}

std::vector<Goal> generate_goals(const Catalog& catalog, std::uint64_t seed,
                                 std::size_t n_goals) {
  if (n_goals < 1) throw ParameterError("generate_goals: n_goals must be >= 1");
  if (catalog.products.empty()) throw ParameterError("generate_goals: empty catalog");

  Rng rng(seed);
  std::vector<Goal> goals;
  goals.reserve(n_goals);
  for (std::size_t i = 0; i < n_goals; ++i) {
    const Product& anchor = catalog.products[rng.index(catalog.products.size())];
    Goal g;
    g.id = static_cast<GoalId>(i);
    g.anchor_product = anchor.id;
    g.target_category = anchor.category;

    std::vector<std::string> attrs(anchor.attributes.begin(), anchor.attributes.end());
    shuffle(attrs, rng);
    const std::size_t n_attr = rng.range(1, std::min<std::size_t>(3, attrs.size()));
    g.target_attributes.insert(attrs.begin(), attrs.begin() + static_cast<std::ptrdiff_t>(n_attr));

    if (!anchor.options.empty() && rng.bernoulli(0.5)) {
      auto it = anchor.options.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.index(anchor.options.size())));
      g.target_options[it->first] = it->second[rng.index(it->second.size())];
    }

    const double factor = rng.uniform(1.0, 1.5);
    g.budget = std::max(anchor.price, std::ceil(anchor.price * factor * 100.0) / 100.0);
    g.instruction_tokens =
        render_instruction(g.target_category, g.target_attributes, g.target_options, g.budget);
    goals.push_back(std::move(g));
  }
  return goals;
}

RewardBreakdown score_purchase(const Goal& goal, const Product& product,
                               const OptionChoice& chosen_options) {
  for (const auto& [name, value] : chosen_options) {
    auto it = product.options.find(name);
    if (it == product.options.end() ||
        std::find(it->second.begin(), it->second.end(), value) == it->second.end()) {
      throw InvalidActionError("product " + std::to_string(product.id) +
                               " does not offer " + name + "=" + value);
    }
  }

  RewardBreakdown r;
  r.type_match = product.category == goal.target_category ? 1 : 0;
  for (const auto& a : goal.target_attributes) {
    if (product.attributes.count(a)) ++r.attr_matched;
  }
  for (const auto& [name, value] : goal.target_options) {
    auto it = chosen_options.find(name);
    if (it != chosen_options.end() && it->second == value) ++r.opt_matched;
  }
  r.price_ok = product.price <= goal.budget ? 1 : 0;

  const double denom =
      static_cast<double>(goal.target_attributes.size() + goal.target_options.size() + 1);
  r.score = r.type_match * static_cast<double>(r.attr_matched + r.opt_matched + r.price_ok) / denom;
  return r;
}

OptionChoice best_options(const Goal& goal, const Product& product) {
  OptionChoice out;
  for (const auto& [name, value] : goal.target_options) {
    auto it = product.options.find(name);
    if (it != product.options.end() &&
        std::find(it->second.begin(), it->second.end(), value) != it->second.end()) {
      out[name] = value;
    }
  }
  return out;
}

}  // namespace shoprl

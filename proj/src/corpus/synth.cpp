#include "wikiseo/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "wikiseo/common/error.hpp"
#include "wikiseo/common/random.hpp"
#include "wikiseo/corpus/lexicon.hpp"
#include "wikiseo/corpus/text.hpp"

namespace wikiseo::corpus {
namespace {

const std::vector<std::string> kCategoryNames = {"analgesic",       "antiviral",    "antibiotic",
                                                 "antidepressant",  "antihypertensive", "antihistamine",
                                                 "anticoagulant",   "antidiabetic", "antifungal",
                                                 "anticonvulsant",  "antiemetic",   "antipsychotic"};

const std::vector<std::vector<std::string>> kDrugSuffixes = {
    {"profen", "codone", "fenac"},     {"vir", "ovir", "buvir"},       {"mycin", "cillin", "floxacin"},
    {"oxetine", "ipramine", "afaxine"}, {"pril", "sartan", "olol"},    {"tadine", "fenadine", "izine"},
    {"xaban", "arin", "gatran"},       {"gliptin", "formin", "glitazone"}, {"conazole", "fungin", "afine"},
    {"tiracetam", "amotrigine", "abalin"}, {"setron", "pitant", "peridol"}, {"apine", "idone", "azole"}};

const std::vector<std::string> kBackground = {
    "patients",   "study",      "dose",        "effects",    "treatment",   "use",        "approved",
    "years",      "people",     "common",      "risk",       "condition",   "trial",      "weeks",
    "therapy",    "response",   "adults",      "children",   "levels",      "blood",      "symptoms",
    "cases",      "results",    "evidence",    "function",   "pressure",    "pain",       "chronic",
    "acute",      "severe",     "mild",        "daily",      "oral",        "tablet",     "injection",
    "hospital",   "research",   "data",        "review",     "guidelines",  "safety",     "efficacy",
    "outcomes",   "reports",    "population",  "age",        "women",       "men",        "group",
    "rate",       "months",     "days",        "cells",      "tissue",      "receptor",   "protein",
    "enzyme",     "liver",      "kidney",      "heart",      "brain",       "skin",       "muscle",
    "bone",       "lung",       "stomach",     "immune",     "system",      "activity",   "mechanism",
    "pathway",    "absorption", "metabolism",  "excretion",  "half-life",   "interaction", "combination",
    "formulation", "generic",   "patent",      "market",     "cost",        "access",     "regulation",
    "agency",     "approval",   "label",       "warning",    "adverse",     "events",     "reactions",
    "toxicity",   "overdose",   "dependence",  "withdrawal", "tolerance",   "monitoring", "testing",
    "diagnosis",  "prevention", "management",  "care",       "practice",    "physicians", "nurses",
    "pharmacists", "prescription", "standard", "early",      "long-term",   "primary",    "secondary",
    "first-line", "molecular",  "structure",   "compound",   "derivative",  "class",      "agent"};

const std::vector<std::string> kTitleNouns = {"disease", "syndrome", "therapy",    "disorder",
                                              "infection", "deficiency", "regimen", "trial"};

const std::vector<std::string> kTemplateWords = {"brand", "name", "according", "work", "later", "studies",
                                                 "clinical", "combined", "refers", "associated", "most",
                                                 "patients", "pharmacy", "meds", "drugstore"};

const std::vector<std::string> kSalts = {"sodium", "hydrochloride", "acetate"};

constexpr const char* kConsonants = "bcdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {
    for (const auto& w : kBackground) used_.insert(w);
    for (const auto& w : kTemplateWords) used_.insert(w);
    for (const auto& w : lexicons::stopwords().entries()) used_.insert(w);
    for (const auto& w : lexicons::verbs().entries()) used_.insert(w);
  }

  std::string stem(int syllables) {
    for (;;) {
      std::string w;
      for (int s = 0; s < syllables; ++s) {
        w += kConsonants[rng_.index(15)];
        w += kVowels[rng_.index(5)];
        if (rng_.bernoulli(0.3)) w += "nrlsx"[rng_.index(5)];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::string fresh(const std::string& candidate) {
    return used_.insert(candidate).second ? candidate : std::string();
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string capitalize_words(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (char& c : out) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = (c == ' ');
  }
  return out;
}

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = acc;
    }
    for (auto& v : cdf_) v /= acc;
  }
  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

const std::vector<std::string> kLeadTemplates = {
    "{T} is a {K} {B} associated with {D} and {K}.",
    "{T} refers to a {K} {B} that {V} {K} in {B} {K}.",
};

const std::vector<std::string> kBodyTemplates = {
    "{D} {V} the {K} {B} in patients with {K}.",
    "The {K} of {D} {V} {B} {K} and {K}.",
    "{D} is {P} by {O} in {L}.",
    "{D}, {P} under the brand name {R}, {V} {K} {B}.",
    "Studies of {K} {B} show that {D} {V} {K}.",
    "In {L}, {D} is {P} for {K} {B}.",
    "{D} {V} {K} when combined with {D}.",
    "Clinical {B} of {K} suggest {D} {V} {B} {K}.",
    "The {B} {K} {V} {K} in most {B} {B}.",
    "{D} {V} {K} and {V} {B} {K}.",
};

const std::vector<std::string> kCarryOut = {
    "This {K} was described by {E}.",
    "{D} {V} {K} according to {E}.",
    "The {B} {K} was studied by {E}.",
};

const std::vector<std::string> kCarryIn = {
    "According to {E}, {D} {V} {K} {B}.",
    "Work by {E} {V} {K} in {K} {B}.",
    "Later {E} reported that {D} {V} {K}.",
};

struct ArticlePlan {
  int category = 0;
  std::string primary_drug;
  std::string title;
  std::vector<std::string> entities;
};

class SentenceWriter {
 public:
  SentenceWriter(const Vocabulary& v, const CorpusSpec& spec, Rng& rng)
      : v_(v), spec_(spec), rng_(rng),
        keyword_zipf_(static_cast<std::size_t>(v.spec.keywords_per_category), spec.zipf_exponent),
        drug_zipf_(static_cast<std::size_t>(v.spec.drugs_per_category), spec.zipf_exponent),
        background_zipf_(v.background.size(), 0.6) {}

  std::string fill(const std::string& tmpl, const ArticlePlan& plan, const std::string& entity) {
    std::string out;
    const auto& cat = v_.categories[static_cast<std::size_t>(plan.category)];
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
      if (tmpl[i] != '{') {
        out += tmpl[i];
        continue;
      }
      const char slot = tmpl[i + 1];
      i += 2;
      switch (slot) {
        case 'T': out += plan.title; break;
        case 'K': out += cat.keywords[keyword_zipf_.draw(rng_)]; break;
        case 'B': out += v_.background[background_zipf_.draw(rng_)]; break;
        case 'V': out += rng_.pick(lexicons::verbs().entries()); break;
        case 'D': out += drug(plan); break;
        case 'P': out += rng_.pick(lexicons::promo_keywords().entries()); break;
        case 'O': out += rng_.pick(v_.orgs); break;
        case 'L': out += rng_.pick(v_.locations); break;
        case 'R': out += cat.brands[drug_zipf_.draw(rng_)]; break;
        case 'E': out += entity; break;
        default: throw ContractError("unknown template slot");
      }
    }
    return capitalize(out);
  }

 private:
  std::string drug(const ArticlePlan& plan) {
    const double u = rng_.uniform();
    if (u < spec_.primary_drug_share) return plan.primary_drug;
    if (u < spec_.primary_drug_share + spec_.cross_category_share) {
      const auto& other = v_.categories[rng_.index(v_.categories.size())];
      return other.drugs[drug_zipf_.draw(rng_)];
    }
    return v_.categories[static_cast<std::size_t>(plan.category)].drugs[drug_zipf_.draw(rng_)];
  }

  const Vocabulary& v_;
  const CorpusSpec& spec_;
  Rng& rng_;
  Zipf keyword_zipf_, drug_zipf_, background_zipf_;
};

Article make_article(const std::string& id, const Vocabulary& v, const CorpusSpec& spec, Rng& rng,
                     WordFactory& names, const Zipf& drug_popularity) {
  ArticlePlan plan;
  plan.category = static_cast<int>(rng.index(v.categories.size()));
  const auto& cat = v.categories[static_cast<std::size_t>(plan.category)];
  plan.primary_drug = cat.drugs[drug_popularity.draw(rng)];
  plan.title = capitalize(names.stem(2)) + " " + rng.pick(v.title_nouns);
  const int paragraphs =
      spec.min_paragraphs + static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_paragraphs - spec.min_paragraphs + 1)));
  for (int i = 0; i < paragraphs; ++i) plan.entities.push_back(capitalize(names.stem(2 + static_cast<int>(rng.index(2)))));

  SentenceWriter writer(v, spec, rng);
  Article a;
  a.id = id;
  a.title = plan.title;
  a.category_tags = {cat.name};
  for (int p = 0; p < paragraphs; ++p) {
    const int sentences =
        spec.min_sentences + static_cast<int>(rng.index(static_cast<std::size_t>(spec.max_sentences - spec.min_sentences + 1)));
    std::vector<std::string> out;
    for (int s = 0; s < sentences; ++s) {
      const bool first = s == 0, last = s == sentences - 1;
      if (first && p == 0) {
        out.push_back(writer.fill(rng.pick(kLeadTemplates), plan, ""));
      } else if (first) {
        out.push_back(writer.fill(rng.pick(kCarryIn), plan, plan.entities[static_cast<std::size_t>(p - 1)]));
      } else if (last && p + 1 < paragraphs) {
        out.push_back(writer.fill(rng.pick(kCarryOut), plan, plan.entities[static_cast<std::size_t>(p)]));
      } else {
        out.push_back(writer.fill(rng.pick(kBodyTemplates), plan, ""));
      }
    }
    std::string text;
    for (const auto& s : out) {
      if (!text.empty()) text += ' ';
      text += s;
    }
    a.paragraphs.emplace_back(std::move(text));
  }
  return a;
}

std::string pad_id(char prefix, int i) {
  std::string n = std::to_string(i);
  return std::string(1, prefix) + std::string(n.size() < 5 ? 5 - n.size() : 0, '0') + n;
}

std::vector<double> unit(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    n2 += x * x;
  }
  const double n = std::sqrt(n2);
  for (auto& x : v) x /= n;
  return v;
}

std::vector<double> mix(const std::vector<double>& centre, double weight, Rng& rng, double norm) {
  std::vector<double> noise = unit(rng, static_cast<int>(centre.size()));
  std::vector<double> v(centre.size());
  double n2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = weight * centre[i] + std::sqrt(1.0 - weight * weight) * noise[i];
    n2 += v[i] * v[i];
  }
  const double n = std::sqrt(n2);
  for (auto& x : v) x = norm * x / n;
  return v;
}

}  // namespace

std::vector<std::string> Vocabulary::all_drugs() const {
  std::vector<std::string> out;
  for (const auto& c : categories) out.insert(out.end(), c.drugs.begin(), c.drugs.end());
  return out;
}

int Vocabulary::category_of_drug(const std::string& drug) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& d = categories[i].drugs;
    if (std::find(d.begin(), d.end(), drug) != d.end()) return static_cast<int>(i);
  }
  return -1;
}

Vocabulary build_vocabulary(const VocabularySpec& spec) {
  require(spec.categories >= 2 && spec.categories <= static_cast<int>(kCategoryNames.size()),
          "build_vocabulary: unsupported category count");
  require(spec.keywords_per_category >= 4 && spec.drugs_per_category >= 2, "build_vocabulary: too few words");
  require(spec.dimension >= 8, "build_vocabulary: dimension must be >= 8");
  Rng rng(spec.seed);
  WordFactory words(rng);
  Vocabulary v;
  v.spec = spec;
  v.background = kBackground;
  v.title_nouns = kTitleNouns;
  v.template_words = kTemplateWords;
  for (int c = 0; c < spec.categories; ++c) {
    CategoryVocab cat;
    cat.name = kCategoryNames[static_cast<std::size_t>(c)];
    for (int k = 0; k < spec.keywords_per_category; ++k) cat.keywords.push_back(words.stem(2 + static_cast<int>(rng.index(2))));
    const auto& suffixes = kDrugSuffixes[static_cast<std::size_t>(c)];
    for (int d = 0; d < spec.drugs_per_category; ++d) {
      std::string name;
      while (name.empty()) name = words.fresh(words.stem(2) + suffixes[rng.index(suffixes.size())]);
      const double u = rng.uniform();
      std::string surface = capitalize(name);
      if (u < 0.08) {
        surface = "Co-" + name;
        words.fresh("co-" + name);
      } else if (u < 0.16) {
        surface += " " + kSalts[rng.index(kSalts.size())];
      }
      cat.drugs.push_back(surface);
      cat.brands.push_back(capitalize(words.stem(2) + std::string(rng.bernoulli(0.5) ? "ex" : "al")));
    }
    v.categories.push_back(std::move(cat));
  }
  for (int i = 0; i < 30; ++i) {
    v.orgs.push_back(capitalize(words.stem(2)) + " " + capitalize(rng.pick(lexicons::org_suffixes().entries())));
  }
  for (const auto& loc : lexicons::geo_gazetteer().entries()) v.locations.push_back(capitalize_words(loc));
  const std::vector<std::string> shops = {"Pharmacy", "Meds", "Drugstore"};
  for (int i = 0; i < 40; ++i) v.businesses.push_back(capitalize(words.stem(2)) + " " + shops[rng.index(shops.size())]);
  return v;
}

Corpus synth_corpus(std::uint64_t seed, int n_articles, const Vocabulary& vocab, const CorpusSpec& spec) {
  require(n_articles >= 10, "synth_corpus: need at least 10 articles");
  require(spec.min_paragraphs >= 2 && spec.max_paragraphs >= spec.min_paragraphs, "synth_corpus: paragraph range");
  require(spec.min_sentences >= 2 && spec.max_sentences >= spec.min_sentences, "synth_corpus: sentence range");
  Rng rng(seed);
  Rng name_rng = rng.fork(1);
  WordFactory names(name_rng);
  for (const auto& c : vocab.categories) {
    for (const auto& k : c.keywords) names.fresh(k);
  }
  const Zipf popularity(static_cast<std::size_t>(vocab.spec.drugs_per_category), 0.7);
  Corpus corpus;
  for (int i = 0; i < n_articles; ++i) {
    Rng ar = rng.fork(static_cast<std::uint64_t>(i) + 100);
    corpus.add(make_article(pad_id('A', i), vocab, spec, ar, names, popularity));
  }
  const int pool = spec.pool_articles >= 0 ? spec.pool_articles : n_articles / 2;
  for (int i = 0; i < pool; ++i) {
    Rng ar = rng.fork(static_cast<std::uint64_t>(i) + 10'000'000);
    corpus.add_pool_article(make_article(pad_id('P', i), vocab, spec, ar, names, popularity));
  }
  return corpus;
}

std::vector<std::string> synth_queries(const Vocabulary& vocab, int n, std::uint64_t seed) {
  std::vector<std::string> drugs = vocab.all_drugs();
  require(n >= 1 && n <= static_cast<int>(drugs.size()), "synth_queries: query count exceeds drug vocabulary");
  Rng rng(seed);
  rng.shuffle(drugs);
  drugs.resize(static_cast<std::size_t>(n));
  return drugs;
}

std::vector<std::pair<std::string, std::vector<double>>> synth_word_vectors(const Vocabulary& vocab) {
  const int d = vocab.spec.dimension;
  Rng rng(vocab.spec.seed ^ 0x5EEDULL);
  std::vector<std::pair<std::string, std::vector<double>>> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](const std::string& surface, const std::vector<double>& v) {
    for (const auto& tok : tokenize(surface)) {
      if (seen.insert(tok).second) out.emplace_back(tok, v);
    }
  };
  const std::vector<double> junk = unit(rng, d);
  for (const auto& cat : vocab.categories) {
    const std::vector<double> centre = unit(rng, d);
    for (const auto& k : cat.keywords) emit(k, mix(centre, 0.6, rng, 1.0));
    for (const auto& dr : cat.drugs) {
      const auto toks = tokenize(dr);
      if (seen.insert(toks.front()).second) out.emplace_back(toks.front(), mix(centre, 0.7, rng, 1.0));
    }
    for (const auto& b : cat.brands) emit(b, mix(centre, 0.5, rng, 1.0));
  }
  for (const auto& w : vocab.background) emit(w, unit(rng, d));
  for (const auto& w : vocab.title_nouns) emit(w, unit(rng, d));
  for (const auto& w : kSalts) emit(w, unit(rng, d));
  for (const auto& w : lexicons::verbs().entries()) emit(w, mix(unit(rng, d), 1.0, rng, 0.6));
  for (const auto& w : lexicons::promo_keywords().entries()) emit(w, unit(rng, d));
  for (const auto& w : lexicons::blocklist().entries()) emit(w, mix(junk, 0.7, rng, 1.0));
  for (const auto& w : vocab.orgs) emit(w, unit(rng, d));
  for (const auto& w : vocab.locations) emit(w, unit(rng, d));
  for (const auto& w : vocab.businesses) emit(w, unit(rng, d));
  for (const auto& w : lexicons::stopwords().entries()) emit(w, mix(unit(rng, d), 1.0, rng, 0.25));
  for (const auto& w : vocab.template_words) emit(w, mix(unit(rng, d), 1.0, rng, 0.3));
  return out;
}

}  // namespace wikiseo::corpus

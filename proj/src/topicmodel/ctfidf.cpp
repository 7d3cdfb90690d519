#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/text.hpp"
#include "cbcomm/topicmodel.hpp"

namespace cbcomm::topicmodel {

std::vector<std::string> tokenize(const std::string& text, const VocabularyOptions& opts) {
  std::vector<std::string> out;
  if (opts.lowercase) {
    out = text::word_tokens(text, opts.min_token_length);
  } else {
    std::string cur;
    auto flush = [&] {
      if (cur.size() >= opts.min_token_length) out.push_back(cur);
      cur.clear();
    };
    for (char c : text) {
      if (text::is_word_byte(static_cast<unsigned char>(c)))
        cur.push_back(c);
      else
        flush();
    }
    flush();
  }
  if (!opts.stop_words.empty())
    std::erase_if(out, [&](const std::string& t) { return opts.stop_words.count(t) > 0; });
  return out;
}

int CtfidfResult::term_index(const std::string& term) const {
  auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), term);
  return it != vocabulary.end() && *it == term ? static_cast<int>(it - vocabulary.begin()) : -1;
}

int CtfidfResult::topic_column(int topic) const {
  auto it = std::find(topics.begin(), topics.end(), topic);
  return it == topics.end() ? -1 : static_cast<int>(it - topics.begin());
}

CtfidfResult ctfidf(const std::map<int, std::vector<std::string>>& sentences_by_topic,
                    const VocabularyOptions& opts) {
  if (sentences_by_topic.empty()) throw ParameterError("c-TF-IDF needs at least one topic");
  std::map<std::string, std::map<int, long>> counts;  // term -> topic -> count
  std::map<int, long> totals;
  for (const auto& [topic, sentences] : sentences_by_topic) {
    if (topic == kOutlier) throw ParameterError("the outlier topic is excluded from c-TF-IDF");
    long total = 0;
    for (const auto& s : sentences)
      for (auto& tok : tokenize(s, opts)) {
        ++counts[tok][topic];
        ++total;
      }
    if (total == 0) throw ParameterError(fmt::format("topic {} has no tokens", topic));
    totals[topic] = total;
  }

  CtfidfResult r;
  for (const auto& [topic, _] : sentences_by_topic) r.topics.push_back(topic);
  const auto n_terms = static_cast<Eigen::Index>(counts.size());
  const auto n_topics = static_cast<Eigen::Index>(r.topics.size());
  r.vocabulary.reserve(counts.size());
  r.counts = Matrix::Zero(n_terms, n_topics);
  r.scores = Matrix::Zero(n_terms, n_topics);
  const double t = static_cast<double>(n_topics);
  Eigen::Index row = 0;
  for (const auto& [term, per_topic] : counts) {
    r.vocabulary.push_back(term);
    const double idf = std::log(t / static_cast<double>(per_topic.size()));
    for (const auto& [topic, c] : per_topic) {
      const auto col = r.topic_column(topic);
      r.counts(row, col) = static_cast<double>(c);
      r.scores(row, col) = static_cast<double>(c) / static_cast<double>(totals[topic]) * idf;
    }
    ++row;
  }
  return r;
}

namespace {

const std::map<std::string, PosTag, std::less<>>& closed_class() {
  static const auto table = [] {
    std::map<std::string, PosTag, std::less<>> m;
    auto add = [&](PosTag t, std::initializer_list<const char*> words) {
      for (const char* w : words) m.emplace(w, t);
    };
    add(PosTag::determiner, {"the", "a", "an", "this", "that", "these", "those", "each", "every",
                             "some", "any", "no", "all", "both", "either", "neither", "its", "their",
                             "our", "his", "her", "my", "your", "such", "another", "other", "several",
                             "many", "much", "few", "own", "same"});
    add(PosTag::pronoun, {"it", "they", "we", "he", "she", "you", "them", "us", "him", "me",
                          "who", "whom", "whose", "which", "what", "itself", "themselves",
                          "ourselves", "there", "here", "one", "ones", "something", "anything",
                          "nothing", "everything", "someone", "anyone", "everyone"});
    add(PosTag::preposition, {"of", "in", "on", "at", "by", "for", "with", "from", "to", "into",
                              "onto", "over", "under", "about", "above", "below", "between",
                              "among", "through", "throughout", "during", "before", "after",
                              "against", "within", "without", "across", "towards", "toward", "upon",
                              "per", "since", "until", "till", "amid", "amidst", "despite", "via",
                              "beyond", "along", "around", "behind", "beside", "besides", "near",
                              "off", "out", "up", "down", "like", "unlike", "versus", "vis"});
    add(PosTag::conjunction, {"and", "or", "but", "nor", "so", "yet", "while", "whilst",
                              "although", "because", "if", "whereas", "though", "unless", "as",
                              "than", "whether", "when", "where", "once", "hence", "thus",
                              "therefore"});
    add(PosTag::verb, {"is", "are", "was", "were", "be", "been", "being", "am", "has", "have",
                       "had", "having", "do", "does", "did", "done", "will", "would", "shall",
                       "should", "can", "could", "may", "might", "must", "remain", "remains",
                       "continue", "continues", "expect", "expects", "seem", "seems", "become",
                       "becomes", "became", "rose", "fell", "grew", "kept", "said", "made", "took",
                       "gave", "went", "came", "got", "saw", "seen", "given", "taken", "believe",
                       "think", "know", "want", "include", "includes", "ensure", "ensures",
                       "consider", "considers", "keep", "keeps", "get", "gets", "make", "makes",
                       "take", "takes", "see", "sees", "say", "says", "let", "need", "needs",
                       "become", "tend", "tends", "appear", "appears", "warrant", "warrants",
                       "stay", "stays", "emerge", "emerges", "persist", "persists",
                       "decide", "decides", "voted", "vote", "votes", "go", "goes",
                       "come", "comes", "help", "helps", "bring", "brings", "brought"});
    add(PosTag::adverb, {"not", "very", "also", "further", "still", "already", "just", "only",
                         "even", "however", "more", "most", "less", "least", "again", "now",
                         "then", "too", "well", "often", "soon", "ahead", "rather", "quite",
                         "almost", "nevertheless", "moreover", "furthermore", "meanwhile",
                         "accordingly", "instead", "otherwise", "always", "never", "ever",
                         "sometimes", "somewhat", "about", "away", "back", "forward", "yet",
                         "perhaps", "indeed", "thereby", "overall"});
    add(PosTag::numeral, {"zero", "two", "three", "four", "five", "six", "seven", "eight", "nine",
                          "ten", "hundred", "thousand", "million", "billion", "crore", "lakh",
                          "first", "second", "third", "fourth", "half"});
    add(PosTag::proper_noun,
        {"india", "indian", "rbi", "mpc", "covid", "january", "february", "march", "april", "june",
         "july", "august", "september", "october", "november", "december", "monday", "tuesday",
         "wednesday", "thursday", "friday", "saturday", "sunday", "sensex", "nifty", "fed", "ecb",
         "us", "usa", "uk", "china", "europe", "governor", "rupee", "gdp", "cpi", "wpi"});
    add(PosTag::adjective,
        {"high", "low", "strong", "weak", "robust", "stable", "new", "recent", "key", "real",
         "nominal", "core", "good", "large", "small", "firm", "steady", "soft", "hard", "sharp",
         "broad", "major", "significant", "current", "resilient", "persistent", "elevated",
         "adverse", "benign", "moderate", "modest", "tight", "loose", "easy", "higher", "lower",
         "stronger", "weaker", "better", "worse", "best", "worst", "larger", "smaller", "further",
         "last", "next", "previous", "upward", "downward", "uneven", "sluggish", "buoyant",
         "subdued", "early", "late", "likely", "unlikely", "daily", "weekly", "monthly",
         "quarterly", "yearly", "annual", "neutral", "hawkish", "dovish", "headline", "global",
         "domestic", "rural", "urban", "fiscal", "monetary", "external", "financial", "sustained",
         "sustainable", "accommodative", "prudent", "vigilant", "ample", "surplus", "volatile"});
    return m;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suf) {
  return s.size() > suf.size() && s.substr(s.size() - suf.size()) == suf;
}

bool in(std::string_view s, std::initializer_list<std::string_view> words) {
  return std::find(words.begin(), words.end(), s) != words.end();
}

}  // namespace

PosTag pos_tag(const std::string& raw) {
  const auto term = text::to_lower(raw);
  if (term.empty()) return PosTag::other;
  if (auto it = closed_class().find(term); it != closed_class().end()) return it->second;
  if (std::all_of(term.begin(), term.end(), [](unsigned char c) { return std::isdigit(c) || c == '_'; }))
    return PosTag::numeral;
  if (std::isdigit(static_cast<unsigned char>(term[0]))) return PosTag::numeral;

  if (ends_with(term, "ly") &&
      !in(term, {"supply", "italy", "family", "ally", "rally", "apply", "reply", "monopoly",
                 "anomaly", "assembly", "july", "oligopoly", "jelly", "belly", "bully", "fly"}))
    return PosTag::adverb;
  if (ends_with(term, "ing") &&
      !in(term, {"banking", "lending", "pricing", "spending", "financing", "funding", "housing",
                 "meeting", "building", "offering", "borrowing", "saving", "savings", "ceiling",
                 "thing", "king", "ring", "string", "spring", "morning", "evening", "during",
                 "earning", "earnings", "holding", "holdings", "tightening", "easing", "setting",
                 "planning", "understanding", "training", "rating", "ratings", "manufacturing",
                 "mining", "shipping", "trading", "landing", "listing", "reporting", "marketing",
                 "accounting", "clothing", "timing", "sowing", "warming", "servicing",
                 "outstanding", "opening", "beginning", "wording", "forecasting", "monitoring",
                 "surveying", "wing", "swing", "sibling", "ping"}))
    return PosTag::verb;
  if (ends_with(term, "ed") &&
      !in(term, {"need", "seed", "speed", "feed", "fed", "red", "bed", "shed", "breed", "greed",
                 "creed", "deed", "weed", "proceed", "exceed", "succeed", "hundred", "bred"}))
    return PosTag::verb;
  if (ends_with(term, "ize") || ends_with(term, "ise") || ends_with(term, "ify") ||
      ends_with(term, "izes") || ends_with(term, "ises") || ends_with(term, "ifies"))
    if (!in(term, {"rise", "rises", "enterprise", "enterprises", "exercise", "premise", "premises",
                   "expertise", "promise", "promises", "noise", "size", "sizes", "prize", "compromise",
                   "advise", "franchise", "merchandise", "surprise", "surprises", "demise", "precise",
                   "concise", "wise", "otherwise", "likewise", "crise"}))
      return PosTag::verb;

  // Adjectival suffixes, with common nouns carved out.
  if ((ends_with(term, "ous") || ends_with(term, "ful") || ends_with(term, "less") ||
       ends_with(term, "ive") || ends_with(term, "ible") || ends_with(term, "ish")) &&
      !in(term, {"objective", "objectives", "incentive", "incentives", "initiative", "initiatives",
                 "directive", "directives", "alternative", "alternatives", "perspective",
                 "executive", "narrative", "derivative", "derivatives", "motive", "drive",
                 "archive", "detective", "representative", "representatives", "nevertheless",
                 "unless", "dish", "fish", "wish"}))
    return PosTag::adjective;
  if (ends_with(term, "able") &&
      !in(term, {"table", "cable", "variable", "variables", "receivable", "receivables", "payable",
                 "payables", "vegetable", "vegetables", "timetable", "constable"}))
    return PosTag::adjective;
  if ((ends_with(term, "ical") || ends_with(term, "ic")) &&
      !in(term, {"public", "traffic", "logic", "music", "topic", "clinic", "panic", "republic",
                 "mechanic", "epidemic", "pandemic", "fabric", "metric", "graphic", "critic",
                 "rhetoric", "tactic", "characteristic", "arithmetic"}))
    return PosTag::adjective;
  if (ends_with(term, "ary") &&
      !in(term, {"secretary", "summary", "boundary", "salary", "library", "dictionary", "glossary",
                 "january", "february", "commentary", "itinerary", "anniversary", "beneficiary",
                 "subsidiary", "diary", "boundary", "budgetary", "dignitary", "documentary"}))
    return PosTag::adjective;
  if (ends_with(term, "al") &&
      !in(term, {"proposal", "approval", "capital", "rental", "arrival", "withdrawal", "potential",
                 "interval", "signal", "signals", "journal", "principal", "total", "deal", "goal",
                 "appeal", "festival", "hospital", "material", "animal", "canal", "metal",
                 "rival", "trial", "disposal", "referral", "removal", "renewal", "revival",
                 "survival", "terminal", "criminal", "individual", "official", "professional",
                 "arsenal", "manual", "portal", "journal", "meal", "seal", "steal", "heal",
                 "reveal", "real", "deal", "appraisal", "reversal", "rehearsal", "dispersal",
                 "perusal", "denial", "tribunal", "cereal", "mineral", "general"}))
    return PosTag::adjective;
  return PosTag::noun;
}

std::string to_string(PosTag t) {
  switch (t) {
    case PosTag::noun: return "NOUN";
    case PosTag::proper_noun: return "PROPN";
    case PosTag::adjective: return "ADJ";
    case PosTag::verb: return "VERB";
    case PosTag::adverb: return "ADV";
    case PosTag::determiner: return "DET";
    case PosTag::pronoun: return "PRON";
    case PosTag::preposition: return "ADP";
    case PosTag::conjunction: return "CONJ";
    case PosTag::numeral: return "NUM";
    case PosTag::other: return "X";
  }
  return "X";
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return aa > 0 && bb > 0 ? ab / std::sqrt(aa * bb) : 0.0;
}

}  // namespace

std::vector<std::size_t> mmr_select(const std::vector<double>& relevance,
                                    const std::vector<std::vector<double>>& vectors, std::size_t n,
                                    double lambda) {
  if (relevance.size() != vectors.size()) throw ParameterError("mmr: relevance/vector size mismatch");
  if (lambda < 0 || lambda > 1) throw ParameterError("mmr_lambda must lie in [0, 1]");
  const std::size_t m = relevance.size();
  const double rmax = m ? *std::max_element(relevance.begin(), relevance.end()) : 0.0;
  std::vector<double> rel(m);
  for (std::size_t i = 0; i < m; ++i) rel[i] = rmax > 0 ? relevance[i] / rmax : 0.0;

  std::vector<std::size_t> chosen;
  std::vector<char> used(m, 0);
  std::vector<double> max_sim(m, 0.0);
  constexpr double kDup = 1.0 - 1e-12;
  while (chosen.size() < std::min(n, m)) {
    bool any_fresh = false;
    if (lambda < 1.0)
      for (std::size_t i = 0; i < m; ++i)
        if (!used[i] && max_sim[i] < kDup) any_fresh = true;
    std::size_t best = m;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (used[i] || (any_fresh && max_sim[i] >= kDup)) continue;
      const double score = lambda * rel[i] - (chosen.empty() ? 0.0 : (1.0 - lambda) * max_sim[i]);
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    used[best] = 1;
    chosen.push_back(best);
    for (std::size_t i = 0; i < m; ++i)
      if (!used[i]) max_sim[i] = std::max(max_sim[i], cosine(vectors[i], vectors[best]));
  }
  return chosen;
}

std::vector<TopicTerms> top_terms(const CtfidfResult& m,
                                  const std::map<int, std::vector<std::string>>& sentences_by_topic,
                                  const RepresentationOptions& opts, const VocabularyOptions& vocab) {
  if (opts.n_terms < 1) throw ParameterError("top_terms needs n >= 1");
  std::vector<TopicTerms> out;
  for (std::size_t col = 0; col < m.topics.size(); ++col) {
    const int topic = m.topics[col];
    const auto c = static_cast<Eigen::Index>(col);
    std::vector<int> present;
    for (Eigen::Index r = 0; r < m.counts.rows(); ++r)
      if (m.counts(r, c) > 0) present.push_back(static_cast<int>(r));
    std::stable_sort(present.begin(), present.end(), [&](int a, int b) {
      if (m.scores(a, c) != m.scores(b, c)) return m.scores(a, c) > m.scores(b, c);
      return m.counts(a, c) > m.counts(b, c);
    });
    if (present.size() > opts.pool_factor * opts.n_terms) present.resize(opts.pool_factor * opts.n_terms);
    std::erase_if(present, [&](int r) { return !opts.pos_keep.count(pos_tag(m.vocabulary[r])); });

    // Similarity between candidates: cosine of their per-sentence counts
    // within the topic.
    std::vector<std::vector<double>> vecs(present.size());
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < present.size(); ++i) slot[m.vocabulary[present[i]]] = i;
    if (auto it = sentences_by_topic.find(topic); it != sentences_by_topic.end()) {
      const auto& sents = it->second;
      for (auto& v : vecs) v.assign(sents.size(), 0.0);
      for (std::size_t s = 0; s < sents.size(); ++s)
        for (const auto& tok : tokenize(sents[s], vocab))
          if (auto f = slot.find(tok); f != slot.end()) vecs[f->second][s] += 1.0;
    }
    std::vector<double> rel;
    for (int r : present) rel.push_back(m.scores(r, c));

    TopicTerms tt;
    tt.topic = topic;
    for (auto i : mmr_select(rel, vecs, opts.n_terms, opts.mmr_lambda)) {
      tt.terms.push_back(m.vocabulary[present[i]]);
      tt.scores.push_back(rel[i]);
    }
    tt.short_list = tt.terms.size() < opts.n_terms;
    out.push_back(std::move(tt));
  }
  return out;
}

}  // namespace cbcomm::topicmodel

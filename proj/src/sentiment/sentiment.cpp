#include "cbcomm/sentiment.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/text.hpp"
#include "cbcomm/transport.hpp"

namespace cbcomm::sentiment {

namespace detail {
extern const char* const kDefaultLexiconText;
}

std::string to_string(Label l) {
  switch (l) {
    case Label::dovish: return "dovish";
    case Label::hawkish: return "hawkish";
    case Label::neutral: return "neutral";
  }
  return "neutral";
}

Label parse_label(const std::string& s) {
  if (s == "dovish") return Label::dovish;
  if (s == "hawkish") return Label::hawkish;
  if (s == "neutral") return Label::neutral;
  throw ParameterError(fmt::format("unknown sentiment label '{}'", s));
}

SentimentProbs validate_probs(double d, double h, double n) {
  for (double p : {d, h, n})
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
      throw ProviderError(fmt::format("sentiment probability {} outside [0, 1]", p), false);
  const double sum = d + h + n;
  if (std::abs(sum - 1.0) > 1e-3)
    throw ProviderError(fmt::format("sentiment probabilities sum to {}, not 1", sum), false);
  return {d / sum, h / sum, n / sum};
}

Label assign_label(const SentimentProbs& p) {
  if (p.p_dovish > p.p_hawkish && p.p_dovish > p.p_neutral) return Label::dovish;
  if (p.p_hawkish > p.p_dovish && p.p_hawkish > p.p_neutral) return Label::hawkish;
  return Label::neutral;
}

double signed_score(const SentimentProbs& p) { return p.p_dovish - p.p_hawkish; }

SentimentRecord make_record(std::string sentence_id, const SentimentProbs& p) {
  return {std::move(sentence_id), p, assign_label(p), signed_score(p)};
}

Lexicon parse_lexicon(const std::string& body) {
  Lexicon lex;
  std::vector<std::vector<std::string>>* section = nullptr;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    const auto line = text::trim(std::string_view(body).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line == "[dovish]") {
      section = &lex.dovish;
    } else if (line == "[hawkish]") {
      section = &lex.hawkish;
    } else if (line.front() == '[') {
      throw ConfigError(fmt::format("lexicon line {}: unknown section {}", line_no, line));
    } else {
      if (!section) throw ConfigError(fmt::format("lexicon line {}: phrase before any section", line_no));
      auto toks = text::word_tokens(line);
      if (!toks.empty()) section->push_back(std::move(toks));
    }
  }
  if (lex.dovish.empty() && lex.hawkish.empty()) throw ConfigError("sentiment lexicon is empty");
  return lex;
}

Lexicon load_lexicon(const fs::path& path) { return parse_lexicon(read_file(path)); }

const Lexicon& default_lexicon() {
  static const Lexicon lex = parse_lexicon(detail::kDefaultLexiconText);
  return lex;
}

SentimentProbs lexicon_classifier(std::string_view sentence_text, const Lexicon& lexicon) {
  if (lexicon.dovish.empty() && lexicon.hawkish.empty()) throw ParameterError("lexicon is empty");
  const auto toks = text::word_tokens(sentence_text);
  long d = 0, h = 0;
  auto match_at = [&](std::size_t i, const std::vector<std::string>& phrase) {
    if (i + phrase.size() > toks.size()) return false;
    return std::equal(phrase.begin(), phrase.end(), toks.begin() + static_cast<long>(i));
  };
  for (std::size_t i = 0; i < toks.size();) {
    std::size_t best = 0;
    int side = 0;  // +1 dovish, -1 hawkish
    for (const auto& ph : lexicon.dovish)
      if (ph.size() > best && match_at(i, ph)) {
        best = ph.size();
        side = 1;
      }
    for (const auto& ph : lexicon.hawkish)
      if (ph.size() > best && match_at(i, ph)) {
        best = ph.size();
        side = -1;
      }
    if (side == 0) {
      ++i;
      continue;
    }
    (side > 0 ? d : h) += 1;
    i += best;
  }
  const double denom = static_cast<double>(d + h + 1);
  return {static_cast<double>(d) / denom, static_cast<double>(h) / denom, 1.0 / denom};
}

LexiconProvider::LexiconProvider(Lexicon lex, std::string origin)
    : lex_(std::move(lex)), origin_(std::move(origin)) {}
std::string LexiconProvider::id() const { return "lexicon:" + origin_; }
std::vector<SentimentProbs> LexiconProvider::classify(std::span<const std::string> texts) {
  std::vector<SentimentProbs> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(lexicon_classifier(t, lex_));
  return out;
}

namespace {

std::vector<SentimentProbs> decode_probs(const json& reply, const std::string& who) {
  if (!reply.is_array()) throw ProviderError(who + ": reply is not a JSON array", false);
  std::vector<SentimentProbs> out;
  for (const auto& row : reply) {
    try {
      if (row.is_array() && row.size() == 3)
        out.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
      else if (row.is_object())
        out.push_back({row.at("dovish").get<double>(), row.at("hawkish").get<double>(),
                       row.at("neutral").get<double>()});
      else
        throw ProviderError(who + ": each reply row needs three probabilities", false);
    } catch (const json::exception& e) {
      throw ProviderError(fmt::format("{}: malformed probabilities ({})", who, e.what()), false);
    }
  }
  return out;
}

json encode_texts(std::span<const std::string> texts) {
  json arr = json::array();
  for (const auto& t : texts) arr.push_back(t);
  return arr;
}

}  // namespace

CommandSentimentProvider::CommandSentimentProvider(std::string command) : command_(std::move(command)) {}
std::string CommandSentimentProvider::id() const { return "cmd:" + command_; }
std::vector<SentimentProbs> CommandSentimentProvider::classify(std::span<const std::string> texts) {
  return decode_probs(transport::run_command(command_, encode_texts(texts)), id());
}

HttpSentimentProvider::HttpSentimentProvider(std::string url) : url_(std::move(url)) {}
std::string HttpSentimentProvider::id() const { return url_; }
std::vector<SentimentProbs> HttpSentimentProvider::classify(std::span<const std::string> texts) {
  return decode_probs(transport::http_post(url_, encode_texts(texts)), id());
}

std::unique_ptr<SentimentProvider> make_provider(const std::string& spec, const Lexicon& lexicon) {
  if (spec.empty() || spec == "lexicon") return std::make_unique<LexiconProvider>(lexicon);
  if (spec.rfind("cmd:", 0) == 0) return std::make_unique<CommandSentimentProvider>(spec.substr(4));
  if (spec.rfind("http://", 0) == 0) return std::make_unique<HttpSentimentProvider>(spec);
  throw ConfigError(fmt::format("unknown sentiment provider '{}'", spec));
}

SentimentProbs classify(const std::string& sentence_text, SentimentProvider& provider) {
  if (text::trim(sentence_text).empty()) throw ParameterError("cannot classify an empty sentence");
  const std::string one[] = {sentence_text};
  const auto reply = provider.classify(one);
  if (reply.size() != 1)
    throw ProviderError(fmt::format("{} returned {} results for one sentence", provider.id(), reply.size()), false);
  return validate_probs(reply[0].p_dovish, reply[0].p_hawkish, reply[0].p_neutral);
}

std::vector<SentimentRecord> classify_batch(const std::vector<corpus::SentenceRecord>& sentences,
                                            SentimentProvider& provider, const ClassifyOptions& opts) {
  if (opts.batch_size == 0) throw ParameterError("batch_size must be positive");
  std::vector<SentimentRecord> out;
  out.reserve(sentences.size());
  std::vector<std::string> texts;
  for (std::size_t start = 0, batch = 0; start < sentences.size(); start += opts.batch_size, ++batch) {
    const auto end = std::min(sentences.size(), start + opts.batch_size);
    texts.clear();
    for (auto i = start; i < end; ++i) {
      if (text::trim(sentences[i].text).empty())
        throw ParameterError(fmt::format("sentence {} is empty", sentences[i].sentence_id));
      texts.push_back(sentences[i].text);
    }
    std::vector<SentimentProbs> reply;
    for (int attempt = 0;; ++attempt) {
      try {
        reply = provider.classify(texts);
        break;
      } catch (const ProviderError& e) {
        if (!e.retriable()) throw ProviderError(e.what(), false, batch);
        if (attempt >= opts.max_retries)
          throw ProviderError(fmt::format("batch {} failed after {} attempts: {}", batch, attempt + 1, e.what()),
                              true, batch);
      }
    }
    if (reply.size() != texts.size())
      throw ProviderError(fmt::format("batch {}: {} results for {} sentences", batch, reply.size(), texts.size()),
                          false, batch);
    for (std::size_t k = 0; k < reply.size(); ++k) {
      SentimentProbs p;
      try {
        p = validate_probs(reply[k].p_dovish, reply[k].p_hawkish, reply[k].p_neutral);
      } catch (const ProviderError& e) {
        throw ProviderError(fmt::format("sentence {}: {}", sentences[start + k].sentence_id, e.what()), false, batch);
      }
      out.push_back(make_record(sentences[start + k].sentence_id, p));
    }
  }
  return out;
}

json to_json(const SentimentRecord& r) {
  return json{{"sentence_id", r.sentence_id},
              {"p_dovish", r.probs.p_dovish},
              {"p_hawkish", r.probs.p_hawkish},
              {"p_neutral", r.probs.p_neutral},
              {"label", to_string(r.label)},
              {"signed_score", r.signed_score}};
}

SentimentRecord record_from_json(const json& j) {
  try {
    const SentimentProbs p{j.at("p_dovish").get<double>(), j.at("p_hawkish").get<double>(),
                           j.at("p_neutral").get<double>()};
    auto r = make_record(j.at("sentence_id").get<std::string>(), p);
    if (to_string(r.label) != j.at("label").get<std::string>())
      throw CorruptionError(fmt::format("sentence {}: stored label disagrees with its probabilities", r.sentence_id));
    return r;
  } catch (const json::exception& e) {
    throw CorruptionError(fmt::format("bad sentiment record: {}", e.what()));
  }
}

}  // namespace cbcomm::sentiment

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbcomm/corpus.hpp"
#include "cbcomm/dates.hpp"
#include "cbcomm/io.hpp"

namespace cbcomm::sentiment {

enum class Label { dovish, hawkish, neutral };

std::string to_string(Label l);
Label parse_label(const std::string& s);

// Ordered as (dovish, hawkish, neutral) everywhere, including provider replies.
struct SentimentProbs {
  double p_dovish = 0.0;
  double p_hawkish = 0.0;
  double p_neutral = 1.0;
};

// Provider-contract check: every entry finite and in [0, 1] and the sum
// within 1e-3 of one; the result is renormalised. Throws a non-retriable
// ProviderError otherwise.
SentimentProbs validate_probs(double p_dovish, double p_hawkish, double p_neutral);

// Argmax; any tie for the maximum resolves to neutral.
Label assign_label(const SentimentProbs& p);

// p_dovish - p_hawkish: positive is dovish.
double signed_score(const SentimentProbs& p);

struct SentimentRecord {
  std::string sentence_id;
  SentimentProbs probs;
  Label label = Label::neutral;
  double signed_score = 0.0;
};

SentimentRecord make_record(std::string sentence_id, const SentimentProbs& p);

// Phrases stored as token sequences.
struct Lexicon {
  std::vector<std::vector<std::string>> dovish;
  std::vector<std::vector<std::string>> hawkish;
};

// "[dovish]" / "[hawkish]" sections, one phrase per line, '#' comments.
Lexicon parse_lexicon(const std::string& text);
Lexicon load_lexicon(const fs::path& path);
// The lexicon shipped in data/sentiment_lexicon.txt, compiled in.
const Lexicon& default_lexicon();

// Counts non-overlapping matches, longest phrase first, then
// d/(d+h+1), h/(d+h+1), 1/(d+h+1). Total for any text.
SentimentProbs lexicon_classifier(std::string_view sentence_text, const Lexicon& lexicon);

class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual std::string id() const = 0;
  // One probability triple per text; replies are validated by the caller.
  virtual std::vector<SentimentProbs> classify(std::span<const std::string> texts) = 0;
};

class LexiconProvider final : public SentimentProvider {
 public:
  explicit LexiconProvider(Lexicon lex, std::string origin = "builtin");
  std::string id() const override;
  std::vector<SentimentProbs> classify(std::span<const std::string> texts) override;

 private:
  Lexicon lex_;
  std::string origin_;
};

// JSON array of strings in; JSON array of [dovish, hawkish, neutral] triples
// (or objects with those keys) out.
class CommandSentimentProvider final : public SentimentProvider {
 public:
  explicit CommandSentimentProvider(std::string command);
  std::string id() const override;
  std::vector<SentimentProbs> classify(std::span<const std::string> texts) override;

 private:
  std::string command_;
};

class HttpSentimentProvider final : public SentimentProvider {
 public:
  explicit HttpSentimentProvider(std::string url);
  std::string id() const override;
  std::vector<SentimentProbs> classify(std::span<const std::string> texts) override;

 private:
  std::string url_;
};

// "lexicon", "cmd:<shell command>" or "http://host:port/path".
std::unique_ptr<SentimentProvider> make_provider(const std::string& spec, const Lexicon& lexicon);

inline constexpr const char* kProviderEnvVar = "CBCOMM_SENTIMENT_PROVIDER";
// Provider used only by the golden-example checks.
inline constexpr const char* kGoldenProviderEnvVar = "CBCOMM_GOLDEN_SENTIMENT_PROVIDER";

// Single-sentence convenience wrapper. Empty text is a ParameterError.
SentimentProbs classify(const std::string& sentence_text, SentimentProvider& provider);

struct ClassifyOptions {
  std::size_t batch_size = 64;
  int max_retries = 2;
};

std::vector<SentimentRecord> classify_batch(const std::vector<corpus::SentenceRecord>& sentences,
                                            SentimentProvider& provider, const ClassifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Aggregation

// Topic id used for the per-date row over all non-outlier topics.
inline constexpr int kAllTopics = -2;

struct TopicSentimentAggregate {
  Date date;
  int topic = 0;
  long n_dovish = 0;
  long n_hawkish = 0;
  long n_neutral = 0;
  double avg_score = 0.0;
  double balance = 0.0;  // 0 when undefined
  bool balance_defined = false;
};

// (d - h) / (d + h); nullopt when both are zero.
std::optional<double> balance(long n_dovish, long n_hawkish);

// One row per (date, topic) plus one kAllTopics row per date. Records whose
// topic is the outlier label are skipped; a record without a topic or date
// is a ParameterError. Output is sorted by (date, topic) and does not depend
// on record order.
std::vector<TopicSentimentAggregate> aggregate(const std::vector<SentimentRecord>& records,
                                               const std::map<std::string, int>& topics,
                                               const std::map<std::string, Date>& dates);

json to_json(const SentimentRecord& r);
SentimentRecord record_from_json(const json& j);

}  // namespace cbcomm::sentiment

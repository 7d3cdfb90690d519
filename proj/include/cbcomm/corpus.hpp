#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cbcomm/dates.hpp"
#include "cbcomm/io.hpp"

namespace cbcomm::corpus {

enum class DocType { statement, transcript };
enum class DocFormat { html, plain, speaker_tagged };

DocType parse_doc_type(std::string_view s);
DocFormat parse_doc_format(std::string_view s);
std::string to_string(DocType t);
std::string to_string(DocFormat f);

struct DocumentMeta {
  std::string doc_id;
  DocType doc_type = DocType::statement;
  Date publication_date{};
  std::string source_path;
};

// One cleaned paragraph (statement) or speaker turn (transcript).
struct Paragraph {
  std::string paragraph_id;  // <doc_id>-p<ordinal>
  std::string doc_id;
  int ordinal = 0;
  Date date{};
  std::string text;
  std::optional<std::string> speaker;
};

struct SentenceRecord {
  std::string sentence_id;  // <paragraph_id>-s<ordinal>
  std::string paragraph_id;
  std::string doc_id;
  Date date{};
  std::optional<std::string> speaker;
  std::string text;
  int word_count = 0;
};

struct CorpusStats {
  long n_paragraphs = 0;
  long n_sentences = 0;
  long total_words = 0;
  double avg_sentence_length = 0.0;
};

struct ThresholdSuggestion {
  int suggested = 1;
  double mean = 0.0;
  double median = 0.0;
  double mode = 0.0;
  std::vector<std::string> samples_near_threshold;
};

std::string paragraph_id(std::string_view doc_id, int ordinal);

// Parse raw document text into ordered, cleaned paragraphs. Headings,
// footnote markers and markup are removed; whitespace is collapsed.
// Throws ParseError when nothing survives cleaning.
std::vector<Paragraph> parse_document(std::string_view raw_text, const DocumentMeta& meta,
                                      DocFormat format);

// Honorific-stripped, lowercased, whitespace-collapsed speaker name.
std::string normalize_speaker(std::string_view name);

// Keep only turns whose speaker is in `allowed_speakers` (case-insensitive,
// honorifics ignored). Throws ParseError if no paragraph carries a speaker.
std::vector<Paragraph> extract_qa_answers(const std::vector<Paragraph>& paragraphs,
                                          const std::set<std::string>& allowed_speakers);

// Abbreviations ending in '.' suppress a sentence boundary after them.
// Single-word entries without a trailing period ("Shri") also match the
// token written with one; multi-word phrases without a period ("per cent")
// are never split internally.
const std::vector<std::string>& default_abbreviations();

class SentenceSplitter {
 public:
  SentenceSplitter();
  explicit SentenceSplitter(const std::vector<std::string>& abbreviations);

  std::vector<std::string> split(std::string_view text) const;
  std::vector<SentenceRecord> split(const Paragraph& paragraph) const;

 private:
  bool suppresses_boundary(std::string_view text, std::size_t period_pos) const;
  std::set<std::string> single_;  // lowercased, without trailing period
  std::vector<std::vector<std::string>> multi_;
};

std::vector<SentenceRecord> split_sentences(const Paragraph& paragraph);

inline constexpr int kDefaultMinWords = 3;

std::vector<SentenceRecord> filter_sentences(const std::vector<SentenceRecord>& records,
                                             int min_words = kDefaultMinWords);

CorpusStats corpus_stats(const std::vector<SentenceRecord>& records);

// suggested = max(1, floor(median / 4)); up to 10 evenly spaced sentences
// whose length lies within one word of the suggestion are returned for review.
ThresholdSuggestion suggest_threshold(const std::vector<SentenceRecord>& records);

// ---------------------------------------------------------------------------
// Directory ingestion: <doc_id>.<ext> next to <doc_id>.meta.json.

struct SourceDocument {
  DocumentMeta meta;
  DocFormat format = DocFormat::plain;
  std::set<std::string> speakers;  // per-document allowed speakers, may be empty
  std::string raw_text;
};

struct IngestOptions {
  std::optional<DateWindow> study_window;
  std::set<std::string> allowed_speakers{"Governor", "Deputy Governor"};
  bool keep_questions = false;
};

struct LoadReport {
  std::vector<SourceDocument> documents;
  std::vector<std::string> skipped;  // doc_id: reason
};

LoadReport load_corpus_dir(const fs::path& dir, const IngestOptions& opts);

// Parse every document; transcripts are reduced to answers unless
// keep_questions is set.
std::vector<Paragraph> ingest(const std::vector<SourceDocument>& docs, const IngestOptions& opts);

json to_json(const Paragraph& p);
Paragraph paragraph_from_json(const json& j);
json to_json(const SentenceRecord& r);
SentenceRecord sentence_from_json(const json& j);
json to_json(const CorpusStats& s);

}  // namespace cbcomm::corpus

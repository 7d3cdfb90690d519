#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "cbcomm/corpus.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/text.hpp"

namespace cbcomm::corpus {

namespace {

const std::vector<std::string>& honorifics() {
  static const std::vector<std::string> h{"dr", "shri", "smt", "mr", "ms"};
  return h;
}

std::string strip_period(std::string s) {
  while (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

bool is_closing(unsigned char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool is_opening_or_upper(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  return std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(' ||
         c == '[' || c >= 0x80;
}

}  // namespace

std::string normalize_speaker(std::string_view name) {
  auto tokens = text::split_whitespace(name);
  std::size_t first = 0;
  while (first < tokens.size()) {
    const auto t = strip_period(text::to_lower(tokens[first]));
    const auto& h = honorifics();
    if (std::find(h.begin(), h.end(), t) == h.end()) break;
    ++first;
  }
  std::string out;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += text::to_lower(tokens[i]);
  }
  return out;
}

std::vector<Paragraph> extract_qa_answers(const std::vector<Paragraph>& paragraphs,
                                          const std::set<std::string>& allowed_speakers) {
  const bool any_speaker = std::any_of(paragraphs.begin(), paragraphs.end(),
                                       [](const Paragraph& p) { return p.speaker.has_value(); });
  if (!any_speaker) {
    const auto id = paragraphs.empty() ? std::string("<empty>") : paragraphs.front().doc_id;
    throw ParseError(id, "no speaker-tagged paragraphs; is this document a transcript?");
  }
  std::set<std::string> allowed;
  for (const auto& s : allowed_speakers) allowed.insert(normalize_speaker(s));
  std::vector<Paragraph> out;
  for (const auto& p : paragraphs) {
    if (p.speaker && allowed.count(normalize_speaker(*p.speaker))) out.push_back(p);
  }
  return out;
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> a{
      "Dr.",  "Mr.",   "Mrs.",  "Ms.",  "Smt.", "Shri", "Prof.", "St.",  "Sr.",  "Jr.",
      "U.S.", "U.K.",  "e.g.",  "i.e.", "viz.", "vs.",  "No.",   "Nos.", "Rs.",  "Co.",
      "Ltd.", "Inc.",  "Govt.", "Jan.", "Feb.", "Mar.", "Apr.",  "Jun.", "Jul.", "Aug.",
      "Sep.", "Sept.", "Oct.",  "Nov.", "Dec.", "et al.", "per cent"};
  return a;
}

SentenceSplitter::SentenceSplitter() : SentenceSplitter(default_abbreviations()) {}

SentenceSplitter::SentenceSplitter(const std::vector<std::string>& abbreviations) {
  for (const auto& a : abbreviations) {
    auto words = text::split_whitespace(text::to_lower(a));
    if (words.empty()) continue;
    if (words.size() == 1) {
      single_.insert(strip_period(words[0]));
    } else if (words.back().back() == '.') {
      // Multi-word phrases without a period never end a sentence, so only
      // "et al."-style entries need to be tracked.
      words.back() = strip_period(words.back());
      multi_.push_back(std::move(words));
    }
  }
}

bool SentenceSplitter::suppresses_boundary(std::string_view text, std::size_t period_pos) const {
  // Walk back over the tokens preceding the period.
  std::vector<std::string> prev;
  std::size_t end = period_pos;
  for (int k = 0; k < 4 && end > 0; ++k) {
    std::size_t start = end;
    while (start > 0 && !std::isspace(static_cast<unsigned char>(text[start - 1]))) --start;
    if (start == end) break;
    auto tok = std::string(text.substr(start, end - start));
    while (!tok.empty() && (tok.front() == '(' || tok.front() == '"' || tok.front() == '\''))
      tok.erase(tok.begin());
    prev.push_back(text::to_lower(strip_period(tok)));
    end = start;
    while (end > 0 && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  }
  if (prev.empty()) return false;
  const auto& last = prev.front();
  if (single_.count(last)) return true;
  // Initials such as "R." in "Shri R. Gandhi".
  if (last.size() == 1 && std::isalpha(static_cast<unsigned char>(last[0]))) return true;
  for (const auto& m : multi_) {
    if (m.size() > prev.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < m.size() && match; ++i) match = m[m.size() - 1 - i] == prev[i];
    if (match) return true;
  }
  return false;
}

std::vector<std::string> SentenceSplitter::split(std::string_view s) const {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == '.' || s[j] == '?' || s[j] == '!')) ++j;
    while (j < s.size() && is_closing(static_cast<unsigned char>(s[j]))) ++j;
    while (j + 3 <= s.size() && s.substr(j, 3) == "\xE2\x80\x9D") j += 3;  // curly quote
    if (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) continue;
    std::size_t k = j;
    while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    if (k < s.size() && !is_opening_or_upper(s, k)) continue;
    if (c == '.' && j == i + 1 && suppresses_boundary(s, i)) continue;
    auto sentence = text::trim(s.substr(start, j - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = k;
    i = k - 1;
  }
  auto tail = text::trim(s.substr(std::min(start, s.size())));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::vector<SentenceRecord> SentenceSplitter::split(const Paragraph& paragraph) const {
  if (text::trim(paragraph.text).empty())
    throw ParameterError(fmt::format("paragraph {} has empty text", paragraph.paragraph_id));
  std::vector<SentenceRecord> out;
  for (auto& s : split(paragraph.text)) {
    SentenceRecord r;
    r.sentence_id = fmt::format("{}-s{}", paragraph.paragraph_id, out.size());
    r.paragraph_id = paragraph.paragraph_id;
    r.doc_id = paragraph.doc_id;
    r.date = paragraph.date;
    r.speaker = paragraph.speaker;
    r.word_count = static_cast<int>(text::count_words(s));
    r.text = std::move(s);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SentenceRecord> split_sentences(const Paragraph& paragraph) {
  static const SentenceSplitter splitter;
  return splitter.split(paragraph);
}

std::vector<SentenceRecord> filter_sentences(const std::vector<SentenceRecord>& records,
                                             int min_words) {
  if (min_words < 1) throw ParameterError("min_words must be >= 1");
  std::vector<SentenceRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const SentenceRecord& r) { return r.word_count >= min_words; });
  return out;
}

CorpusStats corpus_stats(const std::vector<SentenceRecord>& records) {
  CorpusStats s;
  std::set<std::string> paragraphs;
  for (const auto& r : records) {
    paragraphs.insert(r.paragraph_id);
    s.total_words += r.word_count;
  }
  s.n_paragraphs = static_cast<long>(paragraphs.size());
  s.n_sentences = static_cast<long>(records.size());
  s.avg_sentence_length =
      s.n_sentences > 0 ? static_cast<double>(s.total_words) / static_cast<double>(s.n_sentences)
                        : 0.0;
  return s;
}

ThresholdSuggestion suggest_threshold(const std::vector<SentenceRecord>& records) {
  if (records.empty()) throw ParameterError("cannot suggest a threshold for an empty corpus");
  std::vector<int> lengths;
  lengths.reserve(records.size());
  std::map<int, long> freq;
  double sum = 0;
  for (const auto& r : records) {
    lengths.push_back(r.word_count);
    ++freq[r.word_count];
    sum += r.word_count;
  }
  std::sort(lengths.begin(), lengths.end());
  const auto n = lengths.size();

  ThresholdSuggestion t;
  t.mean = sum / static_cast<double>(n);
  t.median = n % 2 ? lengths[n / 2] : 0.5 * (lengths[n / 2 - 1] + lengths[n / 2]);
  long best = 0;
  for (const auto& [len, count] : freq) {
    if (count > best) {  // map order: smallest length wins ties
      best = count;
      t.mode = len;
    }
  }
  t.suggested = std::max(1, static_cast<int>(std::floor(0.25 * t.median)));

  std::vector<const SentenceRecord*> near;
  for (const auto& r : records)
    if (std::abs(r.word_count - t.suggested) <= 1) near.push_back(&r);
  constexpr std::size_t kSamples = 10;
  if (near.size() <= kSamples) {
    for (const auto* r : near) t.samples_near_threshold.push_back(r->text);
  } else {
    for (std::size_t i = 0; i < kSamples; ++i)
      t.samples_near_threshold.push_back(near[i * near.size() / kSamples]->text);
  }
  return t;
}

}  // namespace cbcomm::corpus

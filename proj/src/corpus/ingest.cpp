#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "cbcomm/corpus.hpp"
#include "cbcomm/error.hpp"

namespace cbcomm::corpus {

namespace {
constexpr std::string_view kMetaSuffix = ".meta.json";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}
}  // namespace

LoadReport load_corpus_dir(const fs::path& dir, const IngestOptions& opts) {
  if (!fs::is_directory(dir)) throw ConfigError(fmt::format("corpus directory '{}' not found", dir.string()));

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  LoadReport report;
  for (const auto& meta_path : files) {
    const auto name = meta_path.filename().string();
    if (!ends_with(name, kMetaSuffix)) continue;
    const auto doc_id = name.substr(0, name.size() - kMetaSuffix.size());

    std::vector<fs::path> candidates;
    for (const auto& f : files) {
      const auto fn = f.filename().string();
      if (fn != name && fn.size() > doc_id.size() + 1 && fn.compare(0, doc_id.size() + 1, doc_id + ".") == 0 &&
          fn.find('.', doc_id.size() + 1) == std::string::npos)
        candidates.push_back(f);
    }
    if (candidates.size() != 1)
      throw ConfigError(fmt::format("{}: expected exactly one document file next to {}, found {}",
                                    doc_id, name, candidates.size()));

    json meta_json;
    try {
      meta_json = json::parse(read_file(meta_path));
    } catch (const json::parse_error& e) {
      throw ConfigError(fmt::format("{}: invalid metadata: {}", name, e.what()));
    }
    for (const char* key : {"doc_type", "date", "format"})
      if (!meta_json.contains(key))
        throw ConfigError(fmt::format("{}: metadata missing '{}'", name, key));

    SourceDocument doc;
    doc.meta.doc_id = doc_id;
    doc.meta.doc_type = parse_doc_type(meta_json.at("doc_type").get<std::string>());
    doc.meta.publication_date = parse_date(meta_json.at("date").get<std::string>());
    doc.meta.source_path = candidates.front().string();
    doc.format = parse_doc_format(meta_json.at("format").get<std::string>());
    if (meta_json.contains("speakers"))
      for (const auto& s : meta_json.at("speakers")) doc.speakers.insert(s.get<std::string>());

    if (opts.study_window && !opts.study_window->contains(doc.meta.publication_date)) {
      report.skipped.push_back(fmt::format("{}: dated {} outside study window", doc_id,
                                           format_date(doc.meta.publication_date)));
      continue;
    }
    doc.raw_text = read_file(candidates.front());
    report.documents.push_back(std::move(doc));
  }
  return report;
}

std::vector<Paragraph> ingest(const std::vector<SourceDocument>& docs, const IngestOptions& opts) {
  std::vector<Paragraph> out;
  std::set<std::string> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.meta.doc_id).second)
      throw ConfigError(fmt::format("duplicate doc_id '{}'", d.meta.doc_id));
    auto paragraphs = parse_document(d.raw_text, d.meta, d.format);
    if (d.meta.doc_type == DocType::transcript && !opts.keep_questions) {
      auto allowed = opts.allowed_speakers;
      allowed.insert(d.speakers.begin(), d.speakers.end());
      paragraphs = extract_qa_answers(paragraphs, allowed);
    }
    std::move(paragraphs.begin(), paragraphs.end(), std::back_inserter(out));
  }
  return out;
}

namespace {
json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}
}  // namespace

json to_json(const Paragraph& p) {
  return json{{"paragraph_id", p.paragraph_id}, {"doc_id", p.doc_id},
              {"ordinal", p.ordinal},           {"date", format_date(p.date)},
              {"speaker", optional_string(p.speaker)}, {"text", p.text}};
}

Paragraph paragraph_from_json(const json& j) {
  Paragraph p;
  p.paragraph_id = j.at("paragraph_id").get<std::string>();
  p.doc_id = j.at("doc_id").get<std::string>();
  p.ordinal = j.at("ordinal").get<int>();
  p.date = parse_date(j.at("date").get<std::string>());
  p.speaker = read_optional(j, "speaker");
  p.text = j.at("text").get<std::string>();
  return p;
}

json to_json(const SentenceRecord& r) {
  return json{{"sentence_id", r.sentence_id}, {"paragraph_id", r.paragraph_id},
              {"doc_id", r.doc_id},           {"date", format_date(r.date)},
              {"speaker", optional_string(r.speaker)}, {"text", r.text},
              {"word_count", r.word_count}};
}

SentenceRecord sentence_from_json(const json& j) {
  SentenceRecord r;
  r.sentence_id = j.at("sentence_id").get<std::string>();
  r.paragraph_id = j.at("paragraph_id").get<std::string>();
  r.doc_id = j.at("doc_id").get<std::string>();
  r.date = parse_date(j.at("date").get<std::string>());
  r.speaker = read_optional(j, "speaker");
  r.text = j.at("text").get<std::string>();
  r.word_count = j.at("word_count").get<int>();
  return r;
}

json to_json(const CorpusStats& s) {
  return json{{"n_paragraphs", s.n_paragraphs},
              {"n_sentences", s.n_sentences},
              {"total_words", s.total_words},
              {"avg_sentence_length", s.avg_sentence_length}};
}

}  // namespace cbcomm::corpus

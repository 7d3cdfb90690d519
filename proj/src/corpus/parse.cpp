#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>

#include <fmt/format.h>

#include "cbcomm/corpus.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/text.hpp"

namespace cbcomm::corpus {

DocType parse_doc_type(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "statement" || v == "mps") return DocType::statement;
  if (v == "transcript" || v == "qa") return DocType::transcript;
  throw ConfigError(fmt::format("unknown doc_type '{}'", s));
}

DocFormat parse_doc_format(std::string_view s) {
  const auto v = text::to_lower(s);
  if (v == "html") return DocFormat::html;
  if (v == "plain" || v == "text" || v == "txt") return DocFormat::plain;
  if (v == "speaker_tagged") return DocFormat::speaker_tagged;
  throw ConfigError(fmt::format("unknown document format '{}'", s));
}

std::string to_string(DocType t) { return t == DocType::statement ? "statement" : "transcript"; }

std::string to_string(DocFormat f) {
  switch (f) {
    case DocFormat::html: return "html";
    case DocFormat::plain: return "plain";
    case DocFormat::speaker_tagged: return "speaker_tagged";
  }
  return "plain";
}

std::string paragraph_id(std::string_view doc_id, int ordinal) {
  return fmt::format("{}-p{}", doc_id, ordinal);
}

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  struct Named {
    std::string_view name;
    std::uint32_t cp;
  };
  static constexpr std::array<Named, 16> kNamed{{{"amp", '&'},
                                                 {"lt", '<'},
                                                 {"gt", '>'},
                                                 {"quot", '"'},
                                                 {"apos", '\''},
                                                 {"nbsp", ' '},
                                                 {"rsquo", 0x2019},
                                                 {"lsquo", 0x2018},
                                                 {"rdquo", 0x201D},
                                                 {"ldquo", 0x201C},
                                                 {"ndash", 0x2013},
                                                 {"mdash", 0x2014},
                                                 {"hellip", 0x2026},
                                                 {"rupee", 0x20B9},
                                                 {"bull", 0x2022},
                                                 {"middot", 0x00B7}}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto ent = s.substr(i + 1, semi - i - 1);
    bool done = false;
    if (!ent.empty() && ent[0] == '#') {
      try {
        const bool hex = ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X');
        const auto cp = std::stoul(std::string(ent.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
        append_utf8(out, cp == 0xA0 ? ' ' : static_cast<std::uint32_t>(cp));
        done = true;
      } catch (const std::exception&) {
      }
    } else {
      for (const auto& n : kNamed) {
        if (n.name == ent) {
          append_utf8(out, n.cp);
          done = true;
          break;
        }
      }
    }
    if (done) {
      i = semi;
    } else {
      out.push_back('&');
    }
  }
  return out;
}

// Removes bracketed numeric footnote markers ("[3]") and Unicode
// superscript digits, then collapses whitespace.
std::string clean_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '[') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j > i + 1 && j < s.size() && s[j] == ']' && j - i <= 4) {
        i = j;
        continue;
      }
    }
    const auto u = static_cast<unsigned char>(s[i]);
    // U+00B9, U+00B2, U+00B3
    if (u == 0xC2 && i + 1 < s.size()) {
      const auto n = static_cast<unsigned char>(s[i + 1]);
      if (n == 0xB9 || n == 0xB2 || n == 0xB3) {
        ++i;
        continue;
      }
      if (n == 0xA0) {  // no-break space
        out.push_back(' ');
        ++i;
        continue;
      }
    }
    // U+2070, U+2074..U+2079
    if (u == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x81) {
      const auto n = static_cast<unsigned char>(s[i + 2]);
      if (n == 0xB0 || (n >= 0xB4 && n <= 0xB9)) {
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return text::collapse_whitespace(out);
}

std::vector<std::string> html_blocks(std::string_view html) {
  static const std::array<std::string_view, 15> kSkip{
      "script", "style", "head", "title", "h1", "h2", "h3", "h4",
      "h5",     "h6",    "header", "nav", "footer", "sup", "noscript"};
  static const std::array<std::string_view, 16> kBlock{
      "p",     "div",  "li",      "dl",    "tr",  "td",      "table",      "section",
      "article", "blockquote", "ul", "ol", "body", "main", "center", "hr"};
  auto in = [](const auto& arr, std::string_view n) {
    return std::find(arr.begin(), arr.end(), n) != arr.end();
  };

  std::vector<std::string> blocks;
  std::string current;
  int skip_depth = 0;
  auto flush = [&] {
    auto cleaned = clean_text(decode_entities(current));
    if (!cleaned.empty()) blocks.push_back(std::move(cleaned));
    current.clear();
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const auto next = html.find('<', i);
      const auto end = next == std::string_view::npos ? html.size() : next;
      if (skip_depth == 0) current.append(html.substr(i, end - i));
      i = end;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      const auto close = html.find("-->", i + 4);
      i = close == std::string_view::npos ? html.size() : close + 3;
      continue;
    }
    const auto close = html.find('>', i);
    if (close == std::string_view::npos) break;
    std::string_view tag = html.substr(i + 1, close - i - 1);
    i = close + 1;
    const bool closing = !tag.empty() && tag[0] == '/';
    if (closing) tag.remove_prefix(1);
    std::size_t n = 0;
    while (n < tag.size() && std::isalnum(static_cast<unsigned char>(tag[n]))) ++n;
    const auto name = text::to_lower(tag.substr(0, n));
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (in(kSkip, name)) {
      if (closing) {
        skip_depth = std::max(0, skip_depth - 1);
      } else if (!self_closing) {
        if (name != "sup") flush();
        ++skip_depth;
      }
      continue;
    }
    if (skip_depth == 0 && in(kBlock, name)) flush();
  }
  flush();
  return blocks;
}

bool ends_sentence(std::string_view line) {
  auto t = text::trim(line);
  while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == ')')) t.pop_back();
  if (t.empty()) return false;
  const char c = t.back();
  if (c == '.' || c == '?' || c == '!' || c == ':' || c == ';') return true;
  // closing curly quote (U+201D) after punctuation
  return t.size() >= 4 && t.substr(t.size() - 3) == "\xE2\x80\x9D";
}

std::vector<std::string> plain_blocks(std::string_view raw) {
  std::vector<std::string> blocks;
  std::vector<std::string> lines;
  auto flush = [&] {
    if (lines.empty()) return;
    // A lone short line without terminal punctuation is a heading.
    const bool heading = lines.size() == 1 && text::count_words(lines[0]) <= 10 &&
                         !ends_sentence(clean_text(lines[0]));
    if (!heading) {
      std::string joined;
      for (const auto& l : lines) {
        if (!joined.empty()) joined.push_back(' ');
        joined += l;
      }
      auto cleaned = clean_text(joined);
      if (!cleaned.empty()) blocks.push_back(std::move(cleaned));
    }
    lines.clear();
  };
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    auto line = text::trim(raw.substr(pos, nl - pos));
    if (line.empty()) {
      flush();
    } else {
      lines.push_back(std::move(line));
    }
    pos = nl + 1;
  }
  flush();
  return blocks;
}

// "Name: text" where Name is at most six capitalised-ish words.
std::optional<std::pair<std::string, std::string>> speaker_prefix(std::string_view line) {
  const auto colon = line.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon > 60) return std::nullopt;
  if (colon + 1 < line.size() && !std::isspace(static_cast<unsigned char>(line[colon + 1])))
    return std::nullopt;
  const auto name = text::trim(line.substr(0, colon));
  if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0]))) return std::nullopt;
  for (unsigned char c : name) {
    if (!(std::isalpha(c) || c == ' ' || c == '.' || c == '\'' || c == '-' || c == '(' || c == ')' || c >= 0x80))
      return std::nullopt;
  }
  if (text::count_words(name) > 6) return std::nullopt;
  return std::make_pair(name, text::trim(line.substr(colon + 1)));
}

struct Turn {
  std::optional<std::string> speaker;
  std::string text;
};

std::vector<Turn> speaker_turns(std::string_view raw) {
  std::vector<Turn> turns;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    const auto line = text::trim(raw.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (auto sp = speaker_prefix(line)) {
      turns.push_back({sp->first, sp->second});
    } else if (turns.empty()) {
      turns.push_back({std::nullopt, line});
    } else {
      auto& t = turns.back().text;
      if (!t.empty()) t.push_back(' ');
      t += line;
    }
  }
  return turns;
}

}  // namespace

std::vector<Paragraph> parse_document(std::string_view raw_text, const DocumentMeta& meta,
                                      DocFormat format) {
  std::vector<Paragraph> out;
  auto emit = [&](std::string text, std::optional<std::string> speaker) {
    if (text.empty()) return;
    Paragraph p;
    p.ordinal = static_cast<int>(out.size());
    p.paragraph_id = paragraph_id(meta.doc_id, p.ordinal);
    p.doc_id = meta.doc_id;
    p.date = meta.publication_date;
    p.text = std::move(text);
    p.speaker = std::move(speaker);
    out.push_back(std::move(p));
  };

  switch (format) {
    case DocFormat::html:
      for (auto& b : html_blocks(raw_text)) emit(std::move(b), std::nullopt);
      break;
    case DocFormat::plain:
      for (auto& b : plain_blocks(raw_text)) emit(std::move(b), std::nullopt);
      break;
    case DocFormat::speaker_tagged:
      for (auto& t : speaker_turns(raw_text)) emit(clean_text(t.text), t.speaker);
      break;
  }
  if (out.empty()) throw ParseError(meta.doc_id, "document is empty after cleaning");
  return out;
}

}  // namespace cbcomm::corpus

#include "cbcomm/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/text.hpp"
#include "cbcomm/transport.hpp"

namespace cbcomm::embedding {

void EmbeddingMatrix::validate() const {
  if (values.size() != n_rows * dim)
    throw ParameterError(fmt::format("embedding matrix holds {} values, expected {}x{}",
                                     values.size(), n_rows, dim));
  if (sentence_ids.size() != n_rows)
    throw ParameterError(fmt::format("embedding matrix has {} rows but {} sentence ids", n_rows,
                                     sentence_ids.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw ParameterError(fmt::format("non-finite embedding value in row {}", i / dim));
}

std::vector<float> hash_embedder(std::string_view sentence_text, int dim, std::uint64_t seed) {
  if (dim < 2) throw ParameterError("hash embedder needs dim >= 2");
  const auto tokens = text::word_tokens(sentence_text);
  if (tokens.empty()) throw ParameterError("cannot embed a text with zero tokens");

  const auto salt = splitmix64(seed);
  const auto udim = static_cast<std::uint64_t>(dim);
  auto accumulate = [&](bool signed_features) {
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (const auto& t : tokens) {
      const auto h = splitmix64(fnv1a64(t) ^ salt);
      const double sign = signed_features && (h >> 63) ? -1.0 : 1.0;
      acc[(h & 0x7fffffffffffffffULL) % udim] += sign;
    }
    return acc;
  };
  auto acc = accumulate(true);
  double norm2 = 0;
  for (double v : acc) norm2 += v * v;
  if (norm2 == 0.0) {
    // Every signed contribution cancelled; fall back to unsigned counts.
    acc = accumulate(false);
    for (double v : acc) norm2 += v * v;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] * inv);
  return out;
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 2) throw ParameterError("hash embedder needs dim >= 2");
}

std::string HashEmbedder::id() const { return fmt::format("hash:dim={}:seed={}", dim_, seed_); }

std::vector<std::vector<float>> HashEmbedder::embed(std::span<const std::string> texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embedder(t, dim_, seed_));
  return out;
}

namespace {

std::vector<std::vector<float>> decode_vectors(const json& reply, const std::string& who) {
  if (!reply.is_array()) throw ProviderError(who + ": reply is not a JSON array", false);
  std::vector<std::vector<float>> out;
  out.reserve(reply.size());
  for (const auto& row : reply) {
    if (!row.is_array()) throw ProviderError(who + ": reply rows must be arrays", false);
    std::vector<float> v;
    v.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) throw ProviderError(who + ": non-numeric embedding value", false);
      v.push_back(x.get<float>());
    }
    out.push_back(std::move(v));
  }
  return out;
}

json encode_texts(std::span<const std::string> texts) {
  json arr = json::array();
  for (const auto& t : texts) arr.push_back(t);
  return arr;
}

}  // namespace

CommandEmbeddingProvider::CommandEmbeddingProvider(std::string command) : command_(std::move(command)) {}
std::string CommandEmbeddingProvider::id() const { return "cmd:" + command_; }
std::vector<std::vector<float>> CommandEmbeddingProvider::embed(std::span<const std::string> texts) {
  return decode_vectors(transport::run_command(command_, encode_texts(texts)), id());
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url) : url_(std::move(url)) {}
std::string HttpEmbeddingProvider::id() const { return url_; }
std::vector<std::vector<float>> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  return decode_vectors(transport::http_post(url_, encode_texts(texts)), id());
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, int dim, std::uint64_t seed) {
  if (spec.empty() || spec == "hash") return std::make_unique<HashEmbedder>(dim, seed);
  if (spec.rfind("cmd:", 0) == 0) return std::make_unique<CommandEmbeddingProvider>(spec.substr(4));
  if (spec.rfind("http://", 0) == 0) return std::make_unique<HttpEmbeddingProvider>(spec);
  throw ConfigError(fmt::format("unknown embedding provider '{}'", spec));
}

EmbeddingMatrix embed_batch(const std::vector<corpus::SentenceRecord>& sentences,
                            EmbeddingProvider& provider, const EmbedOptions& opts) {
  if (sentences.empty()) throw ParameterError("embed_batch needs at least one sentence");
  if (opts.batch_size == 0) throw ParameterError("batch_size must be positive");

  EmbeddingMatrix m;
  m.provider_id = provider.id();
  m.n_rows = sentences.size();
  m.sentence_ids.reserve(sentences.size());
  for (const auto& s : sentences) m.sentence_ids.push_back(s.sentence_id);

  std::vector<std::string> texts;
  for (std::size_t start = 0, batch = 0; start < sentences.size(); start += opts.batch_size, ++batch) {
    const auto end = std::min(sentences.size(), start + opts.batch_size);
    texts.clear();
    for (auto i = start; i < end; ++i) texts.push_back(sentences[i].text);

    std::vector<std::vector<float>> rows;
    for (int attempt = 0;; ++attempt) {
      try {
        rows = provider.embed(texts);
        break;
      } catch (const ProviderError& e) {
        if (!e.retriable()) throw ProviderError(e.what(), false, batch);
        if (attempt >= opts.max_retries)
          throw ProviderError(fmt::format("batch {} failed after {} attempts: {}", batch,
                                          attempt + 1, e.what()),
                              true, batch);
      }
    }
    if (rows.size() != texts.size())
      throw ProviderError(fmt::format("batch {}: provider returned {} vectors for {} texts", batch,
                                      rows.size(), texts.size()),
                          false, batch);
    for (const auto& r : rows) {
      if (m.dim == 0) {
        if (r.size() < 2) throw ProviderError("provider returned vectors of dimension < 2", false, batch);
        m.dim = r.size();
        m.values.reserve(m.n_rows * m.dim);
      }
      if (r.size() != m.dim)
        throw ProviderError(fmt::format("batch {}: dimension drift ({} vs {})", batch, r.size(), m.dim),
                            false, batch);
      for (float x : r)
        if (!std::isfinite(x)) throw ProviderError(fmt::format("batch {}: non-finite embedding", batch), false, batch);
      m.values.insert(m.values.end(), r.begin(), r.end());
    }
  }
  return m;
}

fs::path sidecar_path(const fs::path& bin_path) {
  auto p = bin_path;
  p.replace_extension(".meta.json");
  return p;
}

void save_embeddings(const EmbeddingMatrix& m, const fs::path& bin_path) {
  m.validate();
  std::string bytes(m.values.size() * sizeof(float), '\0');
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(m.values[i]);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  json meta{{"n_rows", m.n_rows},
            {"dim", m.dim},
            {"provider_id", m.provider_id},
            {"sentence_ids", m.sentence_ids}};
  write_file_atomic(bin_path, bytes);
  write_file_atomic(sidecar_path(bin_path), meta.dump(1) + "\n");
}

EmbeddingMatrix load_embeddings(const fs::path& bin_path) {
  const auto side = sidecar_path(bin_path);
  if (!fs::exists(side)) throw CorruptionError(fmt::format("missing sidecar '{}'", side.string()));
  json meta;
  try {
    meta = json::parse(read_file(side));
  } catch (const json::parse_error& e) {
    throw CorruptionError(fmt::format("{}: {}", side.string(), e.what()));
  }
  EmbeddingMatrix m;
  try {
    m.n_rows = meta.at("n_rows").get<std::size_t>();
    m.dim = meta.at("dim").get<std::size_t>();
    m.provider_id = meta.at("provider_id").get<std::string>();
    m.sentence_ids = meta.at("sentence_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw CorruptionError(fmt::format("{}: {}", side.string(), e.what()));
  }
  const auto bytes = read_file(bin_path);
  if (bytes.size() != m.n_rows * m.dim * sizeof(float))
    throw CorruptionError(fmt::format("{}: {} bytes, sidecar implies {}x{} float32 = {} bytes",
                                      bin_path.string(), bytes.size(), m.n_rows, m.dim,
                                      m.n_rows * m.dim * sizeof(float)));
  if (m.sentence_ids.size() != m.n_rows)
    throw CorruptionError(fmt::format("{}: {} sentence ids for {} rows", side.string(),
                                      m.sentence_ids.size(), m.n_rows));
  m.values.resize(m.n_rows * m.dim);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    m.values[i] = std::bit_cast<float>(bits);
  }
  try {
    m.validate();
  } catch (const ParameterError& e) {
    throw CorruptionError(fmt::format("{}: {}", bin_path.string(), e.what()));
  }
  return m;
}

}  // namespace cbcomm::embedding

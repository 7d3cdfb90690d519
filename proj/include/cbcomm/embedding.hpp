#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbcomm/corpus.hpp"
#include "cbcomm/io.hpp"

namespace cbcomm::embedding {

inline constexpr int kDefaultDim = 384;

// Row-major float32 matrix of sentence vectors plus provenance.
struct EmbeddingMatrix {
  std::size_t n_rows = 0;
  std::size_t dim = 0;
  std::vector<float> values;
  std::vector<std::string> sentence_ids;
  std::string provider_id;

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  // Throws ParameterError on shape mismatch or non-finite entries.
  void validate() const;

  bool operator==(const EmbeddingMatrix&) const = default;
};

// Maps a batch of texts to equal-length vectors. Implementations must be
// deterministic: the same text always yields the same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::vector<float>> embed(std::span<const std::string> texts) = 0;
};

// Signed feature hashing of the token multiset, L2-normalised. Throws
// ParameterError for dim < 2 or a text without tokens.
std::vector<float> hash_embedder(std::string_view sentence_text, int dim, std::uint64_t seed);

class HashEmbedder final : public EmbeddingProvider {
 public:
  HashEmbedder(int dim, std::uint64_t seed);
  std::string id() const override;
  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;

 private:
  int dim_;
  std::uint64_t seed_;
};

// Runs `command` through the shell with a JSON array of strings on stdin and
// expects a JSON array of float arrays on stdout.
class CommandEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit CommandEmbeddingProvider(std::string command);
  std::string id() const override;
  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;

 private:
  std::string command_;
};

// POSTs the same JSON payload to an http:// endpoint.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(std::string url);
  std::string id() const override;
  std::vector<std::vector<float>> embed(std::span<const std::string> texts) override;

 private:
  std::string url_;
};

// "hash", "cmd:<shell command>" or "http://host:port/path".
std::unique_ptr<EmbeddingProvider> make_provider(const std::string& spec, int dim, std::uint64_t seed);

// Environment variable consulted when the configuration names no provider.
inline constexpr const char* kProviderEnvVar = "CBCOMM_EMBEDDING_PROVIDER";

struct EmbedOptions {
  std::size_t batch_size = 64;
  int max_retries = 2;
};

EmbeddingMatrix embed_batch(const std::vector<corpus::SentenceRecord>& sentences,
                            EmbeddingProvider& provider, const EmbedOptions& opts = {});

// embeddings.bin (little-endian float32, row-major) + JSON sidecar
// {n_rows, dim, provider_id, sentence_ids}.
void save_embeddings(const EmbeddingMatrix& m, const fs::path& bin_path);
EmbeddingMatrix load_embeddings(const fs::path& bin_path);
fs::path sidecar_path(const fs::path& bin_path);

}  // namespace cbcomm::embedding

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbcomm/dates.hpp"
#include "cbcomm/embedding.hpp"

namespace cbcomm::topicmodel {

using Matrix = Eigen::MatrixXd;

inline constexpr int kOutlier = -1;

// ---------------------------------------------------------------------------
// Dimensionality reduction

enum class ReductionMethod { umap, svd };
enum class Metric { cosine, euclidean };

struct ReductionParams {
  int n_neighbors = 15;
  int n_components = 5;
  std::uint64_t seed = 0;
  // UMAP-only knobs.
  double min_dist = 0.0;
  double spread = 1.0;
  int n_epochs = 0;  // 0: 500 for n <= 10000 rows, else 200
  int negative_sample_rate = 5;
  Metric metric = Metric::cosine;
};

ReductionMethod parse_reduction_method(const std::string& s);

Matrix to_matrix(const embedding::EmbeddingMatrix& m);

// Rows are observations. Throws ParameterError when n_rows < n_neighbors,
// n_components >= input dimension, n_neighbors < 2 or values are not finite.
Matrix reduce_dims(const Matrix& data, const ReductionParams& p, ReductionMethod method);
Matrix reduce_dims(const embedding::EmbeddingMatrix& m, const ReductionParams& p,
                   ReductionMethod method);

// Centered truncated SVD scores (U * S), with each component's sign fixed so
// that its largest-magnitude loading is positive.
Matrix svd_reduce(const Matrix& data, int n_components);

// Curve parameters (a, b) of 1 / (1 + a d^(2b)) fitted to the min_dist /
// spread target.
std::pair<double, double> umap_curve_params(double spread, double min_dist);

Matrix umap_reduce(const Matrix& data, const ReductionParams& p);

// 2-component map for plotting; same contract as reduce_dims.
Matrix doc_map_2d(const embedding::EmbeddingMatrix& m, std::uint64_t seed,
                  ReductionMethod method = ReductionMethod::umap, int n_neighbors = 15);

// ---------------------------------------------------------------------------
// Clustering

enum class ClusterMethod { hdbscan, leader };

struct ClusterParams {
  int min_cluster_size = 150;
  int min_samples = 0;         // hdbscan core distance neighbours; 0 means min_cluster_size
  double leader_radius = 0.0;  // 0: median distance to the (min_cluster_size-1)-th neighbour
};

ClusterMethod parse_cluster_method(const std::string& s);

struct Clustering {
  std::vector<int> labels;  // kOutlier for noise
  int n_clusters = 0;
  bool all_outliers = false;  // warning status, not an error
};

Clustering cluster(const Matrix& reduced, const ClusterParams& c, ClusterMethod method);
Clustering hdbscan(const Matrix& points, int min_cluster_size, int min_samples);
Clustering leader_cluster(const Matrix& points, int min_cluster_size, double radius);

// max(5, round(150 * n_corpus / reference_size)) when n_corpus < reference_size.
int scaled_min_cluster_size(int configured, std::size_t n_corpus, std::size_t reference_size);

// ---------------------------------------------------------------------------
// Class-based TF-IDF

struct VocabularyOptions {
  std::size_t min_token_length = 2;
  bool lowercase = true;
  std::set<std::string> stop_words;
};

std::vector<std::string> tokenize(const std::string& text, const VocabularyOptions& opts);

struct CtfidfResult {
  std::vector<std::string> vocabulary;  // sorted
  std::vector<int> topics;              // column order
  Matrix counts;                        // term x topic raw counts
  Matrix scores;                        // term x topic c-TF-IDF

  int term_index(const std::string& term) const;
  int topic_column(int topic) const;
};

// score(w, t) = count(w, t) / total_words(t) * log(T / df(w)).
// Throws ParameterError for an empty input, an outlier key or a topic
// without tokens.
CtfidfResult ctfidf(const std::map<int, std::vector<std::string>>& sentences_by_topic,
                    const VocabularyOptions& opts = {});

// ---------------------------------------------------------------------------
// Representation

enum class PosTag { noun, proper_noun, adjective, verb, adverb, determiner, pronoun,
                    preposition, conjunction, numeral, other };

// Context-free tag for a lowercased vocabulary term: closed-class lexicon,
// then suffix rules, defaulting to noun.
PosTag pos_tag(const std::string& term);
std::string to_string(PosTag t);

// Greedy maximal marginal relevance. `relevance` is rescaled to [0, 1] by its
// maximum; similarity is cosine between `vectors`. Candidates that are exact
// duplicates (cosine 1) of a selected item are passed over while any other
// candidate remains.
std::vector<std::size_t> mmr_select(const std::vector<double>& relevance,
                                    const std::vector<std::vector<double>>& vectors, std::size_t n,
                                    double lambda);

struct RepresentationOptions {
  std::size_t n_terms = 10;
  double mmr_lambda = 0.5;
  std::size_t pool_factor = 3;
  std::set<PosTag> pos_keep{PosTag::noun, PosTag::proper_noun, PosTag::adjective};
};

struct TopicTerms {
  int topic = 0;
  std::vector<std::string> terms;
  std::vector<double> scores;
  bool short_list = false;  // fewer eligible candidates than requested
};

// Candidate pool: the topic's top pool_factor * n terms by c-TF-IDF, filtered
// by POS, then MMR with sentence co-occurrence cosine as similarity.
std::vector<TopicTerms> top_terms(const CtfidfResult& m,
                                  const std::map<int, std::vector<std::string>>& sentences_by_topic,
                                  const RepresentationOptions& opts,
                                  const VocabularyOptions& vocab = {});

// ---------------------------------------------------------------------------
// Fitted model

struct TopicModel {
  std::vector<std::string> sentence_ids;
  std::vector<std::string> documents;
  std::vector<int> labels;  // aligned to sentence_ids
  int n_topics = 0;
  CtfidfResult ctfidf;
  std::vector<TopicTerms> top_terms;     // index = topic id
  std::vector<std::string> topic_names;  // index = topic id
  std::vector<std::string> warnings;

  std::vector<long> topic_sizes() const;
  std::map<int, std::vector<std::string>> sentences_by_topic() const;
};

struct TopicModelConfig {
  ReductionMethod reduction = ReductionMethod::umap;
  ReductionParams reduction_params;
  ClusterMethod clustering = ClusterMethod::hdbscan;
  ClusterParams cluster_params;
  int target_topics = 10;  // 0 disables reduction
  RepresentationOptions representation;
  VocabularyOptions vocabulary;
  // Keys are topic ids ("3") or representative terms ("inflation").
  std::map<std::string, std::string> name_overrides;
};

// Builds c-TF-IDF, representations and default names from labels. Topics are
// renumbered 0..k-1 by decreasing size (ties by first occurrence).
TopicModel build_model(std::vector<std::string> sentence_ids, std::vector<std::string> documents,
                       std::vector<int> labels, const RepresentationOptions& rep,
                       const VocabularyOptions& vocab);

TopicModel fit_topic_model(const embedding::EmbeddingMatrix& embeddings,
                           const std::vector<std::string>& documents, const TopicModelConfig& cfg);

// Repeatedly merge the pair of topics whose c-TF-IDF columns have the highest
// cosine similarity until n_topics <= target, recomputing c-TF-IDF after each
// merge. target > n_topics returns the input with a warning.
TopicModel reduce_topics(const TopicModel& model, int target,
                         const RepresentationOptions& rep = {}, const VocabularyOptions& vocab = {});

// Default name: top three terms joined by '_', then overrides.
void assign_names(TopicModel& model, const std::map<std::string, std::string>& overrides);

struct TopicTimeRow {
  Date date;
  int topic = 0;
  long count = 0;
  double share = 0.0;
};

// Shares sum to one per date over non-outlier topics; dates whose sentences
// are all outliers are omitted.
std::vector<TopicTimeRow> topics_over_time(const std::vector<int>& labels, const std::vector<Date>& dates);

}  // namespace cbcomm::topicmodel

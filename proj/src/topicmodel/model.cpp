#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/topicmodel.hpp"

namespace cbcomm::topicmodel {

std::vector<long> TopicModel::topic_sizes() const {
  std::vector<long> sizes(static_cast<std::size_t>(n_topics), 0);
  for (int l : labels)
    if (l != kOutlier) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

std::map<int, std::vector<std::string>> TopicModel::sentences_by_topic() const {
  std::map<int, std::vector<std::string>> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kOutlier) out[labels[i]].push_back(documents[i]);
  return out;
}

namespace {

// Relabel to 0..k-1 by decreasing size, ties by first occurrence.
int renumber_by_size(std::vector<int>& labels) {
  std::map<int, std::pair<long, std::size_t>> info;  // label -> (size, first index)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kOutlier) continue;
    auto [it, fresh] = info.try_emplace(labels[i], 0L, i);
    ++it->second.first;
  }
  std::vector<std::pair<int, std::pair<long, std::size_t>>> order(info.begin(), info.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::map<int, int> remap;
  for (std::size_t k = 0; k < order.size(); ++k) remap[order[k].first] = static_cast<int>(k);
  for (int& l : labels)
    if (l != kOutlier) {
      if (l < kOutlier) throw ParameterError(fmt::format("invalid topic label {}", l));
      l = remap[l];
    }
  return static_cast<int>(order.size());
}

std::string default_name(const TopicTerms& t) {
  if (t.terms.empty()) return fmt::format("topic_{}", t.topic);
  std::string name;
  for (std::size_t i = 0; i < std::min<std::size_t>(3, t.terms.size()); ++i) {
    if (i) name += '_';
    name += t.terms[i];
  }
  return name;
}

}  // namespace

TopicModel build_model(std::vector<std::string> sentence_ids, std::vector<std::string> documents,
                       std::vector<int> labels, const RepresentationOptions& rep,
                       const VocabularyOptions& vocab) {
  if (sentence_ids.size() != documents.size() || labels.size() != documents.size())
    throw ParameterError(fmt::format("topic model inputs disagree: {} ids, {} documents, {} labels",
                                     sentence_ids.size(), documents.size(), labels.size()));
  TopicModel m;
  m.sentence_ids = std::move(sentence_ids);
  m.documents = std::move(documents);
  m.labels = std::move(labels);
  m.n_topics = renumber_by_size(m.labels);
  if (m.n_topics == 0) {
    m.warnings.push_back("every sentence is an outlier; no topics were formed");
    return m;
  }
  const auto by_topic = m.sentences_by_topic();
  m.ctfidf = ctfidf(by_topic, vocab);
  m.top_terms = top_terms(m.ctfidf, by_topic, rep, vocab);
  for (const auto& t : m.top_terms)
    if (t.short_list)
      m.warnings.push_back(fmt::format("topic {} has only {} representative terms", t.topic, t.terms.size()));
  assign_names(m, {});
  return m;
}

void assign_names(TopicModel& model, const std::map<std::string, std::string>& overrides) {
  model.topic_names.assign(static_cast<std::size_t>(model.n_topics), "");
  for (const auto& t : model.top_terms) model.topic_names[static_cast<std::size_t>(t.topic)] = default_name(t);

  std::vector<char> by_id(model.topic_names.size(), 0);
  for (const auto& [key, name] : overrides) {
    if (key.empty() || !std::all_of(key.begin(), key.end(), [](unsigned char c) { return std::isdigit(c); }))
      continue;
    const int id = std::stoi(key);
    if (id >= model.n_topics)
      throw ConfigError(fmt::format("topic name override for unknown topic {}", id));
    model.topic_names[static_cast<std::size_t>(id)] = name;
    by_id[static_cast<std::size_t>(id)] = 1;
  }
  // Term keys: each name goes to one topic only. Matches are taken greedily by
  // the term's rank within the topic, so a term shared by several topics names
  // the one it ranks highest in and the others keep their defaults.
  std::set<std::string> used;
  for (std::size_t i = 0; i < by_id.size(); ++i)
    if (by_id[i]) used.insert(model.topic_names[i]);
  std::vector<std::tuple<std::size_t, int, std::string>> hits;  // rank, topic, name
  for (const auto& t : model.top_terms) {
    if (by_id[static_cast<std::size_t>(t.topic)]) continue;
    for (std::size_t r = 0; r < t.terms.size(); ++r)
      if (auto it = overrides.find(t.terms[r]); it != overrides.end()) hits.emplace_back(r, t.topic, it->second);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<char> named = by_id;
  for (const auto& [r, topic, name] : hits) {
    const auto k = static_cast<std::size_t>(topic);
    if (named[k] || used.count(name)) continue;
    model.topic_names[k] = name;
    named[k] = 1;
    used.insert(name);
  }
}

TopicModel reduce_topics(const TopicModel& model, int target, const RepresentationOptions& rep,
                         const VocabularyOptions& vocab) {
  if (target < 1) throw ParameterError("reduce_topics needs target >= 1");
  if (target >= model.n_topics) {
    TopicModel same = model;
    if (target > model.n_topics)
      same.warnings.push_back(
          fmt::format("target of {} topics exceeds the {} found; nothing merged", target, model.n_topics));
    return same;
  }
  std::vector<int> labels = model.labels;
  int n = model.n_topics;
  CtfidfResult c = model.ctfidf;
  while (n > target) {
    Eigen::VectorXd norms = c.scores.colwise().norm();
    int bi = 0, bj = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double denom = norms(i) * norms(j);
        const double sim = denom > 0 ? c.scores.col(i).dot(c.scores.col(j)) / denom : 0.0;
        if (sim > best) {
          best = sim;
          bi = i;
          bj = j;
        }
      }
    const int ti = c.topics[static_cast<std::size_t>(bi)], tj = c.topics[static_cast<std::size_t>(bj)];
    for (int& l : labels)
      if (l == tj) l = ti;
    n = renumber_by_size(labels);
    std::map<int, std::vector<std::string>> by_topic;
    for (std::size_t s = 0; s < labels.size(); ++s)
      if (labels[s] != kOutlier) by_topic[labels[s]].push_back(model.documents[s]);
    c = ctfidf(by_topic, vocab);
  }
  auto out = build_model(model.sentence_ids, model.documents, std::move(labels), rep, vocab);
  out.warnings.insert(out.warnings.begin(), model.warnings.begin(), model.warnings.end());
  return out;
}

TopicModel fit_topic_model(const embedding::EmbeddingMatrix& embeddings,
                           const std::vector<std::string>& documents, const TopicModelConfig& cfg) {
  if (documents.size() != embeddings.n_rows)
    throw ParameterError(fmt::format("{} documents for {} embedding rows", documents.size(), embeddings.n_rows));
  const auto reduced = reduce_dims(embeddings, cfg.reduction_params, cfg.reduction);
  auto clusters = cluster(reduced, cfg.cluster_params, cfg.clustering);
  auto model = build_model(embeddings.sentence_ids, documents, std::move(clusters.labels),
                           cfg.representation, cfg.vocabulary);
  if (cfg.target_topics > 0 && model.n_topics > 0)
    model = reduce_topics(model, cfg.target_topics, cfg.representation, cfg.vocabulary);
  assign_names(model, cfg.name_overrides);
  return model;
}

std::vector<TopicTimeRow> topics_over_time(const std::vector<int>& labels, const std::vector<Date>& dates) {
  if (labels.size() != dates.size())
    throw ParameterError(fmt::format("{} labels for {} dates", labels.size(), dates.size()));
  std::map<Date, std::map<int, long>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kOutlier) ++counts[dates[i]][labels[i]];
  std::vector<TopicTimeRow> out;
  for (const auto& [date, per_topic] : counts) {
    long total = 0;
    for (const auto& [_, c] : per_topic) total += c;
    for (const auto& [topic, c] : per_topic)
      out.push_back({date, topic, c, static_cast<double>(c) / static_cast<double>(total)});
  }
  return out;
}

}  // namespace cbcomm::topicmodel

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cbcomm/error.hpp"
#include "cbcomm/sentiment.hpp"

namespace cbcomm::sentiment {

std::optional<double> balance(long n_dovish, long n_hawkish) {
  if (n_dovish < 0 || n_hawkish < 0) throw ParameterError("sentiment counts must be non-negative");
  const long denom = n_dovish + n_hawkish;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(n_dovish - n_hawkish) / static_cast<double>(denom);
}

namespace {

struct Group {
  long d = 0, h = 0, n = 0;
  std::vector<double> scores;
};

// Positive and negative parts are each summed in increasing magnitude, so the
// mean ignores record order and flipping every sign negates it exactly.
double order_free_mean(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::vector<double> pos, neg;
  for (double x : xs) (x >= 0 ? pos : neg).push_back(std::abs(x));
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  double sp = 0, sn = 0;
  for (double x : pos) sp += x;
  for (double x : neg) sn += x;
  return (sp - sn) / static_cast<double>(xs.size());
}

}  // namespace

std::vector<TopicSentimentAggregate> aggregate(const std::vector<SentimentRecord>& records,
                                               const std::map<std::string, int>& topics,
                                               const std::map<std::string, Date>& dates) {
  std::map<std::pair<Date, int>, Group> groups;
  for (const auto& r : records) {
    const auto t = topics.find(r.sentence_id);
    if (t == topics.end()) throw ParameterError(fmt::format("sentence {} has no topic", r.sentence_id));
    const auto d = dates.find(r.sentence_id);
    if (d == dates.end()) throw ParameterError(fmt::format("sentence {} has no date", r.sentence_id));
    if (t->second < 0) continue;  // outliers
    for (int key : {t->second, kAllTopics}) {
      auto& g = groups[{d->second, key}];
      switch (r.label) {
        case Label::dovish: ++g.d; break;
        case Label::hawkish: ++g.h; break;
        case Label::neutral: ++g.n; break;
      }
      g.scores.push_back(r.signed_score);
    }
  }
  std::vector<TopicSentimentAggregate> out;
  out.reserve(groups.size());
  for (auto& [key, g] : groups) {
    TopicSentimentAggregate a;
    a.date = key.first;
    a.topic = key.second;
    a.n_dovish = g.d;
    a.n_hawkish = g.h;
    a.n_neutral = g.n;
    a.avg_score = order_free_mean(std::move(g.scores));
    const auto b = balance(g.d, g.h);
    a.balance_defined = b.has_value();
    a.balance = b.value_or(0.0);
    out.push_back(a);
  }
  return out;
}

}  // namespace cbcomm::sentiment

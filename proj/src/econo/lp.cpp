#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "cbcomm/econo.hpp"

namespace cbcomm::econo {

RegressorKind parse_regressor_kind(const std::string& s) {
  if (s == "balance") return RegressorKind::balance;
  if (s == "avg_score") return RegressorKind::avg_score;
  throw ConfigError(fmt::format("unknown regressor '{}' (balance|avg_score)", s));
}

std::string to_string(RegressorKind k) { return k == RegressorKind::balance ? "balance" : "avg_score"; }

BootstrapKind parse_bootstrap_kind(const std::string& s) {
  if (s == "percentile") return BootstrapKind::percentile;
  if (s == "bias_corrected") return BootstrapKind::bias_corrected;
  throw ConfigError(fmt::format("unknown bootstrap kind '{}' (percentile|bias_corrected)", s));
}

std::string to_string(BootstrapKind k) { return k == BootstrapKind::percentile ? "percentile" : "bias_corrected"; }

void LPSpec::validate() const {
  if (max_horizon < 0) throw ConfigError(fmt::format("spec {}: max_horizon must be >= 0", name));
  if (bootstrap.replications != 0 && bootstrap.replications < 100)
    throw ConfigError(fmt::format("spec {}: bootstrap needs B >= 100 (or 0 to disable)", name));
  if (!(bootstrap.level > 0 && bootstrap.level < 100))
    throw ConfigError(fmt::format("spec {}: bootstrap level must lie in (0, 100)", name));
}

Panel::Design Panel::design(int h) const {
  Design d;
  if (h < 0 || h >= y.cols()) throw ParameterError(fmt::format("horizon {} not in panel", h));
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    if (std::isfinite(y(i, h))) d.rows.push_back(static_cast<int>(i));
  const auto n = static_cast<Eigen::Index>(d.rows.size());
  d.x.resize(n, x.cols());
  d.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    d.x.row(r) = x.row(d.rows[r]);
    d.y(r) = y(d.rows[r], h);
  }
  return d;
}

Panel build_panel(const std::vector<MeetingEvent>& meetings, const std::map<Date, double>& sentiment,
                  const PriceSeries& prices, const LPSpec& spec) {
  spec.validate();
  Panel p;
  p.columns.push_back("intercept");
  p.columns.push_back("S");
  for (const auto& c : spec.controls) p.columns.push_back(c);
  if (spec.include_dummies)
    for (const char* c : {"covid", "rajan", "patel"}) p.columns.push_back(c);
  if (spec.include_interactions)
    for (const char* c : {"S_x_rajan", "S_x_patel", "S_x_covid"}) p.columns.push_back(c);

  std::vector<MeetingEvent> sorted = meetings;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.meeting_date < b.meeting_date; });
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> ys;
  for (const auto& m : sorted) {
    const auto ds = format_date(m.meeting_date);
    const auto s = sentiment.find(m.meeting_date);
    if (s == sentiment.end()) {
      p.dropped.push_back(fmt::format("{}: no sentiment value", ds));
      continue;
    }
    std::vector<double> row{1.0, s->second};
    bool missing = false;
    for (const auto& c : spec.controls) {
      const auto it = m.controls.find(c);
      if (it == m.controls.end())
        throw ConfigError(fmt::format("control '{}' is not a column of the meetings table", c));
      if (!it->second) {
        p.dropped.push_back(fmt::format("{}: missing control {}", ds, c));
        missing = true;
        break;
      }
      row.push_back(*it->second);
    }
    if (missing) continue;
    const double rajan = m.governor == Governor::rajan, patel = m.governor == Governor::patel;
    if (spec.include_dummies) {
      row.push_back(m.covid);
      row.push_back(rajan);
      row.push_back(patel);
    }
    if (spec.include_interactions) {
      row.push_back(s->second * rajan);
      row.push_back(s->second * patel);
      row.push_back(s->second * m.covid);
    }
    std::vector<double> y(static_cast<std::size_t>(spec.max_horizon) + 1, std::numeric_limits<double>::quiet_NaN());
    int first_missing = -1;
    for (int h = 0; h <= spec.max_horizon; ++h) {
      try {
        y[static_cast<std::size_t>(h)] = horizon_return(prices, m.aligned_date, h, spec.unit);
      } catch (const HorizonUnavailable&) {
        first_missing = h;
        break;
      }
    }
    if (first_missing == 0) {
      p.dropped.push_back(fmt::format("{}: no price data at the meeting", ds));
      continue;
    }
    if (first_missing > 0)
      p.dropped.push_back(fmt::format("{}: horizons {}..{} unavailable", ds, first_missing, spec.max_horizon));
    rows.push_back(std::move(row));
    ys.push_back(std::move(y));
    p.meeting_dates.push_back(m.meeting_date);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  p.x.resize(n, static_cast<Eigen::Index>(p.columns.size()));
  p.y.resize(n, spec.max_horizon + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p.x.cols(); ++j) p.x(i, j) = rows[i][j];
    for (Eigen::Index h = 0; h < p.y.cols(); ++h) p.y(i, h) = ys[i][h];
  }
  return p;
}

namespace {

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t attempt) {
  return splitmix64(splitmix64(seed ^ splitmix64(replicate)) ^ attempt);
}

// Estimates every horizon on one resample; false when any horizon is
// degenerate.
bool estimate_resample(const Panel& panel, const std::vector<int>& draw, int max_h, Matrix& out) {
  const Eigen::Index k = panel.x.cols();
  Matrix xs(static_cast<Eigen::Index>(draw.size()), k);
  Vector ys(static_cast<Eigen::Index>(draw.size()));
  for (int h = 0; h <= max_h; ++h) {
    Eigen::Index n = 0;
    for (int i : draw)
      if (std::isfinite(panel.y(i, h))) {
        xs.row(n) = panel.x.row(i);
        ys(n) = panel.y(i, h);
        ++n;
      }
    if (n <= k) return false;
    Eigen::ColPivHouseholderQR<Matrix> qr(xs.topRows(n));
    qr.setThreshold(1e-10);
    if (qr.rank() < k) return false;
    out.row(h) = qr.solve(ys.head(n)).transpose();
  }
  return true;
}

}  // namespace

std::vector<Matrix> bootstrap_replicates(const Panel& panel, int max_h, const BootstrapSpec& b) {
  if (b.replications < 1) throw ParameterError("bootstrap needs at least one replication");
  if (max_h < 0 || max_h >= panel.y.cols()) throw ParameterError("bootstrap horizon outside the panel");
  const int n = static_cast<int>(panel.x.rows());
  const Eigen::Index k = panel.x.cols();
  const int reps = b.replications;
  const long cap = 10L * reps;

  std::vector<Matrix> per_rep(static_cast<std::size_t>(reps));
  std::atomic<long> draws{0};
  std::atomic<bool> exhausted{false};
  std::atomic<int> next{0};
  auto worker = [&] {
    std::vector<int> draw(static_cast<std::size_t>(n));
    Matrix est(max_h + 1, k);
    for (int r; (r = next.fetch_add(1)) < reps && !exhausted;) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (draws.fetch_add(1) >= cap) {
          exhausted = true;
          break;
        }
        std::mt19937_64 rng(replicate_seed(b.seed, static_cast<std::uint64_t>(r), attempt));
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (auto& d : draw) d = pick(rng);
        if (estimate_resample(panel, draw, max_h, est)) {
          per_rep[static_cast<std::size_t>(r)] = est;
          break;
        }
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (exhausted)
    throw EstimationError(fmt::format("bootstrap gave up after {} draws: too many rank-deficient resamples", cap));

  std::vector<Matrix> out(static_cast<std::size_t>(max_h) + 1, Matrix(reps, k));
  for (int r = 0; r < reps; ++r)
    for (int h = 0; h <= max_h; ++h) out[static_cast<std::size_t>(h)].row(r) = per_rep[static_cast<std::size_t>(r)].row(h);
  return out;
}

std::pair<double, double> bootstrap_interval(const std::vector<double>& reps, double estimate, double level,
                                             BootstrapKind kind) {
  if (reps.empty()) throw ParameterError("no bootstrap replicates");
  if (!(level > 0 && level < 100)) throw ParameterError("confidence level must lie in (0, 100)");
  const double alpha = 1.0 - level / 100.0;
  if (kind == BootstrapKind::percentile) return {quantile(reps, alpha / 2), quantile(reps, 1 - alpha / 2)};

  const boost::math::normal_distribution<double> z;
  const double b = static_cast<double>(reps.size());
  double below = 0;
  for (double r : reps) below += r < estimate ? 1.0 : (r == estimate ? 0.5 : 0.0);
  const double p = std::clamp(below / b, 1.0 / (2 * b), 1.0 - 1.0 / (2 * b));
  const double z0 = boost::math::quantile(z, p);
  const double lo = boost::math::cdf(z, 2 * z0 + boost::math::quantile(z, alpha / 2));
  const double hi = boost::math::cdf(z, 2 * z0 + boost::math::quantile(z, 1 - alpha / 2));
  return {quantile(reps, lo), quantile(reps, hi)};
}

IRFResult lp_estimate(const Panel& panel, const LPSpec& spec) {
  spec.validate();
  IRFResult res;
  res.columns = panel.columns;
  const Eigen::Index k = panel.x.cols();
  const int max_h = std::min<int>(spec.max_horizon, static_cast<int>(panel.y.cols()) - 1);
  for (int h = 0; h <= max_h; ++h) {
    const auto d = panel.design(h);
    if (static_cast<Eigen::Index>(d.rows.size()) < k + 5) {
      if (h == 0)
        throw EstimationError(fmt::format("spec {}: {} usable meetings for {} regressors", spec.name,
                                          d.rows.size(), k));
      res.warnings.push_back(fmt::format("spec {}: horizon {} has {} usable meetings; responses truncated at h={}",
                                         spec.name, h, d.rows.size(), h - 1));
      break;
    }
    const auto fit = ols(d.y, d.x, panel.columns);
    HorizonEstimate e;
    e.h = h;
    e.beta = fit.beta;
    e.lag = spec.hac_lag >= 0 ? spec.hac_lag : std::max(1, h);
    e.se = hac_covariance(d.x, fit.residuals, e.lag).diagonal().cwiseMax(0.0).cwiseSqrt();
    e.n_obs = static_cast<long>(d.rows.size());
    e.ci_low = e.ci_high = std::numeric_limits<double>::quiet_NaN();
    res.horizons.push_back(std::move(e));
  }
  if (spec.bootstrap.replications > 0) {
    const int last = res.horizons.back().h;
    const auto reps = bootstrap_replicates(panel, last, spec.bootstrap);
    for (auto& e : res.horizons) {
      const Vector col = reps[static_cast<std::size_t>(e.h)].col(1);
      const std::vector<double> v(col.data(), col.data() + col.size());
      std::tie(e.ci_low, e.ci_high) = bootstrap_interval(v, e.beta(1), spec.bootstrap.level, spec.bootstrap.kind);
    }
  }
  return res;
}

}  // namespace cbcomm::econo

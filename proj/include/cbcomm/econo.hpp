#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbcomm/dates.hpp"
#include "cbcomm/error.hpp"
#include "cbcomm/io.hpp"

namespace cbcomm::econo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Prices and meetings

struct PriceRow {
  Date date;
  double open = 0.0;
  double close = 0.0;
};

// Trading days in strictly increasing date order with positive finite prices.
class PriceSeries {
 public:
  PriceSeries() = default;
  explicit PriceSeries(std::vector<PriceRow> rows);  // validates

  const std::vector<PriceRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  std::optional<std::size_t> index_of(const Date& d) const;
  // First trading day on or after / on or before d.
  std::optional<std::size_t> first_on_or_after(const Date& d) const;
  std::optional<std::size_t> last_on_or_before(const Date& d) const;

 private:
  std::vector<PriceRow> rows_;
};

// prices.csv: date, open, close.
PriceSeries parse_prices(const CsvTable& table);
PriceSeries load_prices(const fs::path& path);

enum class Governor { rajan, patel, das };
std::string to_string(Governor g);
// Accepts "rajan", "Raghuram Rajan", "PATEL", ...
Governor parse_governor(const std::string& s);

struct GovernorTenure {
  Governor governor;
  DateWindow window;
};
std::vector<GovernorTenure> default_tenures();
// RangeError if d lies in no tenure.
Governor governor_for(const Date& d, const std::vector<GovernorTenure>& tenures);

DateWindow default_covid_window();
int covid_flag(const Date& aligned, const DateWindow& window);

// meeting_date itself if it trades, else the next trading day. RangeError
// past the end of the series.
Date align_meeting(const Date& meeting_date, const PriceSeries& calendar);

struct MeetingRow {
  Date meeting_date;
  std::optional<Governor> governor;                          // blank: from tenures
  std::map<std::string, std::optional<double>> controls;     // blank cells are nullopt
};

// meetings.csv: meeting_date, optional governor, any numeric control columns.
std::vector<MeetingRow> parse_meetings(const CsvTable& table);
std::vector<MeetingRow> load_meetings(const fs::path& path);

struct MeetingEvent {
  Date meeting_date;
  Date aligned_date;
  Governor governor = Governor::das;
  int covid = 0;
  std::map<std::string, std::optional<double>> controls;
};

MeetingEvent make_event(const MeetingRow& row, const PriceSeries& prices,
                        const std::vector<GovernorTenure>& tenures, const DateWindow& covid_window);

enum class HorizonUnit { trading, calendar };
HorizonUnit parse_horizon_unit(const std::string& s);

// Thrown when t + h runs past the end of the series.
class HorizonUnavailable : public RangeError {
 public:
  using RangeError::RangeError;
};

// log(close at t+h) - log(open at t). `t` must be a trading day. With
// calendar units the end point is the last trading day on or before t + h days.
double horizon_return(const PriceSeries& prices, const Date& t, int h,
                      HorizonUnit unit = HorizonUnit::trading);

// ---------------------------------------------------------------------------
// Estimation

struct OlsResult {
  Vector beta;
  Vector residuals;
};

// Throws EstimationError when n_rows <= n_cols or X is rank deficient; the
// error names the columns that are linear combinations of earlier ones.
void check_full_rank(const Matrix& x, const std::vector<std::string>& names);
OlsResult ols(const Vector& y, const Matrix& x, const std::vector<std::string>& names = {});

// Newey-West sandwich (X'X)^-1 S (X'X)^-1 with Bartlett weights
// 1 - l/(lag+1); no small-sample correction.
Matrix hac_covariance(const Matrix& x, const Vector& residuals, int lag);

enum class RegressorKind { balance, avg_score };
RegressorKind parse_regressor_kind(const std::string& s);
std::string to_string(RegressorKind k);

enum class BootstrapKind { percentile, bias_corrected };
BootstrapKind parse_bootstrap_kind(const std::string& s);
std::string to_string(BootstrapKind k);

struct BootstrapSpec {
  int replications = 2000;  // 0 disables the bootstrap
  std::uint64_t seed = 0;
  double level = 90.0;
  BootstrapKind kind = BootstrapKind::percentile;
};

struct LPSpec {
  std::string name = "baseline";
  int max_horizon = 30;
  RegressorKind regressor = RegressorKind::balance;
  bool include_dummies = true;
  bool include_interactions = false;
  std::vector<std::string> controls;
  int hac_lag = -1;  // negative: max(1, h) at horizon h
  HorizonUnit unit = HorizonUnit::trading;
  BootstrapSpec bootstrap;

  void validate() const;
};

// Meeting-level design shared by all horizons. Rows are meetings in date
// order; Y(i, h) is NaN when horizon h is unavailable for meeting i.
struct Panel {
  std::vector<std::string> columns;
  Matrix x;
  Matrix y;
  std::vector<Date> meeting_dates;
  std::vector<std::string> dropped;  // one line per excluded meeting

  struct Design {
    Matrix x;
    Vector y;
    std::vector<int> rows;  // panel row of each design row
  };
  Design design(int h) const;
};

// Columns: intercept, S, controls..., covid, rajan, patel, S*rajan, S*patel,
// S*covid. `sentiment` maps meeting dates to the chosen cluster's regressor;
// meetings without it or with a missing control are dropped and reported.
Panel build_panel(const std::vector<MeetingEvent>& meetings, const std::map<Date, double>& sentiment,
                  const PriceSeries& prices, const LPSpec& spec);

struct HorizonEstimate {
  int h = 0;
  Vector beta;
  Vector se;
  double ci_low = 0.0;  // for the sentiment coefficient
  double ci_high = 0.0;
  long n_obs = 0;
  int lag = 0;
};

struct IRFResult {
  std::vector<std::string> columns;
  std::vector<HorizonEstimate> horizons;
  std::vector<std::string> warnings;
};

// Replicate estimates of every coefficient for horizons 0..max_h.
// reps[h] is replications x n_cols.
std::vector<Matrix> bootstrap_replicates(const Panel& panel, int max_h, const BootstrapSpec& b);

// Type-7 sample quantile of unsorted data.
double quantile(std::vector<double> xs, double q);

std::pair<double, double> bootstrap_interval(const std::vector<double>& replicates, double estimate,
                                             double level, BootstrapKind kind);

// OLS + HAC per horizon, then bootstrap bands for the sentiment coefficient.
// Horizons with fewer than n_cols + 5 rows truncate the run with a warning.
IRFResult lp_estimate(const Panel& panel, const LPSpec& spec);

}  // namespace cbcomm::econo

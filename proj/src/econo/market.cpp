#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cbcomm/econo.hpp"
#include "cbcomm/text.hpp"

namespace cbcomm::econo {

PriceSeries::PriceSeries(std::vector<PriceRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!(std::isfinite(r.open) && std::isfinite(r.close) && r.open > 0 && r.close > 0))
      throw ParameterError(fmt::format("price row {} ({}) needs positive finite open and close", i,
                                       format_date(r.date)));
    if (i > 0 && !(rows_[i - 1].date < r.date))
      throw ParameterError(fmt::format("price dates must be strictly increasing ({} after {})",
                                       format_date(r.date), format_date(rows_[i - 1].date)));
  }
}

std::optional<std::size_t> PriceSeries::index_of(const Date& d) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), d,
                             [](const PriceRow& r, const Date& x) { return r.date < x; });
  if (it == rows_.end() || it->date != d) return std::nullopt;
  return static_cast<std::size_t>(it - rows_.begin());
}

std::optional<std::size_t> PriceSeries::first_on_or_after(const Date& d) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), d,
                             [](const PriceRow& r, const Date& x) { return r.date < x; });
  if (it == rows_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rows_.begin());
}

std::optional<std::size_t> PriceSeries::last_on_or_before(const Date& d) const {
  auto it = std::upper_bound(rows_.begin(), rows_.end(), d,
                             [](const Date& x, const PriceRow& r) { return x < r.date; });
  if (it == rows_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - rows_.begin() - 1);
}

namespace {

double parse_number(const std::string& s, const std::string& what) {
  const auto t = text::trim(s);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) throw CorruptionError(fmt::format("{}: '{}' is not a number", what, s));
  return v;
}

int require_column(const CsvTable& t, std::string_view name, std::string_view file) {
  const int c = t.column(name);
  if (c < 0) throw CorruptionError(fmt::format("{} has no '{}' column", file, name));
  return c;
}

}  // namespace

PriceSeries parse_prices(const CsvTable& table) {
  const int cd = require_column(table, "date", "prices.csv");
  const int co = require_column(table, "open", "prices.csv");
  const int cc = require_column(table, "close", "prices.csv");
  std::vector<PriceRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto where = fmt::format("prices.csv row {}", i + 2);
    try {
      rows.push_back({parse_date(r[cd]), parse_number(r[co], where), parse_number(r[cc], where)});
    } catch (const ParameterError& e) {
      throw CorruptionError(fmt::format("{}: {}", where, e.what()));
    }
  }
  try {
    return PriceSeries(std::move(rows));
  } catch (const ParameterError& e) {
    throw CorruptionError(fmt::format("prices.csv: {}", e.what()));
  }
}

PriceSeries load_prices(const fs::path& path) { return parse_prices(read_csv(path)); }

std::string to_string(Governor g) {
  switch (g) {
    case Governor::rajan: return "rajan";
    case Governor::patel: return "patel";
    case Governor::das: return "das";
  }
  return "das";
}

Governor parse_governor(const std::string& s) {
  const auto words = text::split_whitespace(text::to_lower(s));
  if (!words.empty()) {
    const auto& last = words.back();
    if (last == "rajan") return Governor::rajan;
    if (last == "patel") return Governor::patel;
    if (last == "das") return Governor::das;
  }
  throw ParameterError(fmt::format("unknown governor '{}'", s));
}

std::vector<GovernorTenure> default_tenures() {
  return {{Governor::rajan, {parse_date("2013-09-04"), parse_date("2016-09-03")}},
          {Governor::patel, {parse_date("2016-09-04"), parse_date("2018-12-10")}},
          {Governor::das, {parse_date("2018-12-11"), parse_date("2024-12-10")}}};
}

Governor governor_for(const Date& d, const std::vector<GovernorTenure>& tenures) {
  for (const auto& t : tenures)
    if (t.window.contains(d)) return t.governor;
  throw RangeError(fmt::format("{} falls outside every configured governor tenure", format_date(d)));
}

DateWindow default_covid_window() { return {parse_date("2020-03-11"), parse_date("2021-12-31")}; }

int covid_flag(const Date& aligned, const DateWindow& window) { return window.contains(aligned) ? 1 : 0; }

Date align_meeting(const Date& meeting_date, const PriceSeries& calendar) {
  if (calendar.size() == 0) throw ParameterError("price calendar is empty");
  const auto i = calendar.first_on_or_after(meeting_date);
  if (!i)
    throw RangeError(fmt::format("meeting {} is after the last trading day {}", format_date(meeting_date),
                                 format_date(calendar.rows().back().date)));
  return calendar.rows()[*i].date;
}

std::vector<MeetingRow> parse_meetings(const CsvTable& table) {
  const int cd = require_column(table, "meeting_date", "meetings.csv");
  const int cg = table.column("governor");
  std::vector<MeetingRow> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto where = fmt::format("meetings.csv row {}", i + 2);
    MeetingRow m;
    try {
      m.meeting_date = parse_date(text::trim(r[cd]));
      if (cg >= 0 && !text::trim(r[cg]).empty()) m.governor = parse_governor(r[cg]);
    } catch (const ParameterError& e) {
      throw CorruptionError(fmt::format("{}: {}", where, e.what()));
    }
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (static_cast<int>(c) == cd || static_cast<int>(c) == cg) continue;
      const auto cell = text::trim(r[c]);
      m.controls[table.header[c]] =
          cell.empty() || cell == "NA" || cell == "nan" ? std::nullopt
                                                        : std::optional<double>(parse_number(cell, where));
    }
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.meeting_date < b.meeting_date; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].meeting_date == out[i - 1].meeting_date)
      throw CorruptionError(fmt::format("meetings.csv lists {} twice", format_date(out[i].meeting_date)));
  return out;
}

std::vector<MeetingRow> load_meetings(const fs::path& path) { return parse_meetings(read_csv(path)); }

MeetingEvent make_event(const MeetingRow& row, const PriceSeries& prices,
                        const std::vector<GovernorTenure>& tenures, const DateWindow& covid_window) {
  MeetingEvent e;
  e.meeting_date = row.meeting_date;
  e.aligned_date = align_meeting(row.meeting_date, prices);
  e.governor = row.governor ? *row.governor : governor_for(row.meeting_date, tenures);
  e.covid = covid_flag(e.aligned_date, covid_window);
  e.controls = row.controls;
  return e;
}

HorizonUnit parse_horizon_unit(const std::string& s) {
  if (s == "trading") return HorizonUnit::trading;
  if (s == "calendar") return HorizonUnit::calendar;
  throw ConfigError(fmt::format("unknown horizon unit '{}' (trading|calendar)", s));
}

double horizon_return(const PriceSeries& prices, const Date& t, int h, HorizonUnit unit) {
  if (h < 0) throw ParameterError("horizon must be non-negative");
  const auto i = prices.index_of(t);
  if (!i) throw RangeError(fmt::format("{} is not a trading day", format_date(t)));
  std::size_t j = 0;
  if (unit == HorizonUnit::trading) {
    j = *i + static_cast<std::size_t>(h);
    if (j >= prices.size())
      throw HorizonUnavailable(fmt::format("horizon {} from {} runs past the price series", h, format_date(t)));
  } else {
    const auto end = add_days(t, h);
    if (prices.rows().back().date < end)
      throw HorizonUnavailable(fmt::format("horizon {} days from {} runs past the price series", h, format_date(t)));
    j = *prices.last_on_or_before(end);
  }
  return std::log(prices.rows()[j].close) - std::log(prices.rows()[*i].open);
}

}  // namespace cbcomm::econo

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chaoskit {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  auto operator<=>(const Date&) const = default;

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
  }
};

// Raw price observations, strictly increasing in time, all prices positive.
struct PriceSeries {
  std::vector<Date> dates;
  std::vector<double> prices;
  std::string label;

  std::size_t size() const { return prices.size(); }
};

// Log returns z_t = ln(p_{t+1}/p_t) of a price series, or any scalar series
// ingested directly. sigma is the population standard deviation (divisor n).
struct ReturnSeries {
  std::vector<double> values;
  std::string label;
  double sigma = 0.0;

  std::size_t size() const { return values.size(); }
};

inline double population_stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

inline ReturnSeries make_return_series(std::vector<double> values, std::string label) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("series '" + label + "': non-finite value");
  }
  ReturnSeries rs;
  rs.sigma = population_stddev(values);
  rs.values = std::move(values);
  rs.label = std::move(label);
  return rs;
}

inline ReturnSeries log_returns(const PriceSeries& p) {
  if (p.size() < 2) throw std::invalid_argument("log_returns: need at least 2 prices");
  std::vector<double> values(p.size() - 1);
  for (std::size_t t = 0; t + 1 < p.size(); ++t) {
    values[t] = std::log(p.prices[t + 1] / p.prices[t]);
  }
  return make_return_series(std::move(values), p.label);
}

struct CsvSchema {
  std::string date_column = "date";
  std::string price_column = "price";
  bool day_first = false;  // fallback for DD.MM.YYYY style inputs
};

struct LoadResult {
  PriceSeries series;
  std::size_t rejected_rows = 0;  // rows dropped for missing/non-positive price
};

namespace detail {

// One CSV record, RFC-style quoting, no embedded newlines.
inline std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Accepts Y-M-D (ISO, default) or D-M-Y (day_first), with '-', '.' or '/'
// separators.
inline bool parse_date(std::string_view s, bool day_first, Date& out) {
  s = trim(s);
  std::array<std::string_view, 3> part;
  std::size_t n_parts = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == '-' || s[i] == '.' || s[i] == '/') {
      if (n_parts >= 3) return false;
      part[n_parts++] = s.substr(start, i - start);
      start = i + 1;
    }
  }
  if (n_parts != 3) return false;
  int a, b, c;
  if (!parse_int(part[0], a) || !parse_int(part[1], b) || !parse_int(part[2], c)) return false;
  Date d;
  if (day_first) {
    d = {c, b, a};
  } else {
    d = {a, b, c};
  }
  if (d.year < 1000 || d.year > 9999 || d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    return false;
  out = d;
  return true;
}

}  // namespace detail

// Loads a dated price CSV. Rows with a missing, non-numeric or non-positive
// price (or an unparseable date) are dropped and counted. Duplicate dates
// among the surviving rows are an error: the series would be ambiguous.
inline LoadResult load_csv(const std::string& path, const CsvSchema& schema,
                           std::string label = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = detail::split_csv_record(line);
  std::ptrdiff_t date_col = -1, price_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = detail::trim(header[i]);
    if (name == schema.date_column) date_col = static_cast<std::ptrdiff_t>(i);
    if (name == schema.price_column) price_col = static_cast<std::ptrdiff_t>(i);
  }
  if (date_col < 0) throw std::runtime_error(path + ": no column '" + schema.date_column + "'");
  if (price_col < 0) throw std::runtime_error(path + ": no column '" + schema.price_column + "'");

  std::vector<std::pair<Date, double>> rows;
  std::size_t rejected = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_record(line);
    Date d;
    double price;
    const bool date_ok = static_cast<std::size_t>(date_col) < fields.size() &&
                         detail::parse_date(fields[date_col], schema.day_first, d);
    const bool price_ok = static_cast<std::size_t>(price_col) < fields.size() &&
                          detail::parse_double(fields[price_col], price) && price > 0.0;
    if (!date_ok || !price_ok) {
      ++rejected;
      continue;
    }
    rows.emplace_back(d, price);
  }
  if (rows.size() < 2) throw std::runtime_error(path + ": fewer than 2 valid rows");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first)
      throw std::runtime_error(path + ": duplicate timestamp " + rows[i].first.iso());
  }

  LoadResult out;
  out.rejected_rows = rejected;
  out.series.label = label.empty() ? path : std::move(label);
  out.series.dates.reserve(rows.size());
  out.series.prices.reserve(rows.size());
  for (auto& [d, p] : rows) {
    out.series.dates.push_back(d);
    out.series.prices.push_back(p);
  }
  return out;
}

// Loads a plain scalar series (one numeric column, no returns transform).
// Used for pre-computed returns and synthetic validation series.
inline ReturnSeries load_value_series(const std::string& path, const std::string& value_column,
                                      std::string label = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  const auto header = detail::split_csv_record(line);
  std::ptrdiff_t col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (detail::trim(header[i]) == value_column) col = static_cast<std::ptrdiff_t>(i);
  }
  if (col < 0) throw std::runtime_error(path + ": no column '" + value_column + "'");

  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_record(line);
    double v;
    if (static_cast<std::size_t>(col) < fields.size() && detail::parse_double(fields[col], v)) {
      values.push_back(v);
    }
  }
  if (values.empty()) throw std::runtime_error(path + ": no valid rows");
  return make_return_series(std::move(values), label.empty() ? path : std::move(label));
}

}  // namespace chaoskit

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace potwell {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Ordered observations s_n at times t_n. Times are in model units (one
/// unit per trading day or per bar for market data) and may be
/// non-equidistant.
class Series {
 public:
  /// Throws std::invalid_argument unless times are strictly increasing,
  /// values finite, both of equal length >= 2.
  Series(std::vector<double> times, std::vector<double> values, std::string label = {},
         std::string time_unit = {});

  /// Unit time steps 0, 1, 2, ...
  static Series unit_spaced(std::vector<double> values, std::string label = {},
                            std::string time_unit = {});

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::string& label() const noexcept { return label_; }
  const std::string& time_unit() const noexcept { return time_unit_; }

  /// Observations [begin, end) with times shifted so the first is 0.
  Series slice(std::size_t begin, std::size_t end) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::string label_;
  std::string time_unit_;
};

/// A series plus one calendar timestamp per observation. `calendar` is
/// empty when the source had no dates.
struct DatedSeries {
  Series series;
  std::vector<Timestamp> calendar;

  bool has_calendar() const noexcept { return !calendar.empty(); }
};

struct QuoteRecord {
  Timestamp timestamp;
  double bid;
  double ask;

  double mid() const noexcept { return 0.5 * (bid + ask); }
};

/// Calendar month of a window; year == 0 marks a window that is not tied
/// to a month (whole-series mode without dates).
struct WindowTag {
  int year = 0;
  unsigned month = 0;

  std::string str() const;
  friend bool operator==(const WindowTag&, const WindowTag&) = default;
};

struct Window {
  Series series;
  WindowTag tag;
  std::size_t begin;
  std::size_t end;
};

/// Keeps records with bid <= ask and ask - bid < spread_cap, in order.
std::vector<QuoteRecord> clean_quotes(const std::vector<QuoteRecord>& records,
                                      double spread_cap = 5.0);

/// Last mid-price per interval bucket, forward-filling empty buckets.
/// Buckets are aligned to multiples of `interval` since the epoch and run
/// from the first to the last record. Output times are 0, 1, 2, ...; the
/// calendar holds each bucket's start. Throws EmptyInput for fewer than
/// two buckets.
DatedSeries resample_last_quote(const std::vector<QuoteRecord>& records,
                                std::chrono::milliseconds interval);

enum class SeriesFormat { PriceCsv, QuoteCsv };

struct LoadOptions {
  double spread_cap = 5.0;
  std::chrono::milliseconds interval = std::chrono::minutes(30);
};

/// Format is detected from the header when not given.
DatedSeries load_series(const std::filesystem::path& path,
                        std::optional<SeriesFormat> format = std::nullopt,
                        const LoadOptions& options = {});
DatedSeries parse_price_csv(std::istream& in, std::string label = {});
std::vector<QuoteRecord> parse_quote_csv(std::istream& in);

/// Writes `date,price` when a calendar is present, `time,price` otherwise.
/// Numbers use the shortest round-trip representation.
void write_price_csv(std::ostream& out, const Series& series,
                     const std::vector<Timestamp>& calendar = {});

/// Consecutive observations sharing (year, month) form one window;
/// windows with fewer than two points are dropped. Throws LengthMismatch if
/// the calendar length differs from the series.
std::vector<Window> monthly_windows(const Series& series, const std::vector<Timestamp>& calendar);

enum class WindowMode { Monthly, WholeSeries };

/// Monthly windows, or a single window spanning the whole series tagged
/// with its first month (or "all" without a calendar). Monthly mode throws
/// ConfigError when the series has no calendar.
std::vector<Window> make_windows(const DatedSeries& data, WindowMode mode);

/// Distinct (year, month) values of a non-decreasing calendar, in order.
std::vector<WindowTag> months_present(const std::vector<Timestamp>& calendar);

/// Accepts YYYY-MM-DD with an optional [T| ]HH:MM[:SS[.fff]] and trailing Z.
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_date(Timestamp ts);
std::string format_timestamp(Timestamp ts);
WindowTag month_of(Timestamp ts);

}  // namespace potwell

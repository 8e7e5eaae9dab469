#include "potwell/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "potwell/error.hpp"
#include "potwell/format.hpp"

namespace potwell {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

// Reads the first non-blank line, stripping a UTF-8 byte order mark.
bool read_header(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) return true;
  }
  return false;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

// --- Series ---------------------------------------------------------------

Series::Series(std::vector<double> times, std::vector<double> values, std::string label,
               std::string time_unit)
    : times_(std::move(times)),
      values_(std::move(values)),
      label_(std::move(label)),
      time_unit_(std::move(time_unit)) {
  if (times_.size() != values_.size())
    throw std::invalid_argument("series times and values differ in length");
  if (values_.size() < 2) throw std::invalid_argument("series needs at least two observations");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || !std::isfinite(times_[i]))
      throw std::invalid_argument("series contains a non-finite entry at index " +
                                  std::to_string(i));
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw std::invalid_argument("series times must be strictly increasing (index " +
                                  std::to_string(i) + ")");
  }
}

Series Series::unit_spaced(std::vector<double> values, std::string label, std::string time_unit) {
  std::vector<double> times(values.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i);
  return Series(std::move(times), std::move(values), std::move(label), std::move(time_unit));
}

Series Series::slice(std::size_t begin, std::size_t end) const {
  if (end > size() || end < begin + 2)
    throw std::invalid_argument("series slice must hold at least two observations");
  const double t0 = times_[begin];
  std::vector<double> t, v;
  t.reserve(end - begin);
  v.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    t.push_back(times_[i] - t0);
    v.push_back(values_[i]);
  }
  return Series(std::move(t), std::move(v), label_, time_unit_);
}

// --- calendar -------------------------------------------------------------

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
      !parse_int(text.substr(8, 2), d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp ts = time_point_cast<milliseconds>(sys_days{ymd});

  auto rest = text.substr(10);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (rest.empty()) return ts;
  if (rest[0] != 'T' && rest[0] != ' ') return std::nullopt;
  rest.remove_prefix(1);
  if (rest.size() < 5 || rest[2] != ':') return std::nullopt;
  int hh = 0, mm = 0;
  if (!parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm) || hh > 23 ||
      mm > 59)
    return std::nullopt;
  ts += hours{hh} + minutes{mm};
  rest.remove_prefix(5);
  if (rest.empty()) return ts;
  if (rest[0] != ':' || rest.size() < 3) return std::nullopt;
  int ss = 0;
  if (!parse_int(rest.substr(1, 2), ss) || ss > 60) return std::nullopt;
  ts += seconds{ss};
  rest.remove_prefix(3);
  if (rest.empty()) return ts;
  if (rest[0] != '.' || rest.size() < 2) return std::nullopt;
  rest.remove_prefix(1);
  // Fractional seconds truncated to milliseconds.
  int ms = 0, digits = 0;
  for (char c : rest) {
    if (c < '0' || c > '9') return std::nullopt;
    if (digits < 3) ms = ms * 10 + (c - '0');
    ++digits;
  }
  for (; digits < 3; ++digits) ms *= 10;
  return ts + milliseconds{ms};
}

std::string format_date(Timestamp ts) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(ts)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_start = floor<days>(ts);
  const hh_mm_ss hms{ts - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", format_date(ts).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  std::string out = buf;
  if (const auto ms = hms.subseconds().count(); ms != 0) {
    std::snprintf(buf, sizeof buf, ".%03d", static_cast<int>(ms));
    out += buf;
  }
  return out;
}

WindowTag month_of(Timestamp ts) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(ts)};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

std::string WindowTag::str() const {
  if (year == 0) return "all";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
  return buf;
}

// --- quotes ---------------------------------------------------------------

std::vector<QuoteRecord> clean_quotes(const std::vector<QuoteRecord>& records, double spread_cap) {
  if (!(spread_cap > 0.0)) throw std::invalid_argument("spread cap must be positive");
  std::vector<QuoteRecord> out;
  out.reserve(records.size());
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const QuoteRecord& r) { return r.bid <= r.ask && r.ask - r.bid < spread_cap; });
  return out;
}

DatedSeries resample_last_quote(const std::vector<QuoteRecord>& records,
                                std::chrono::milliseconds interval) {
  if (interval.count() <= 0) throw std::invalid_argument("resampling interval must be positive");
  if (records.empty()) throw EmptyInput("no quotes survive cleaning");
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp < records[i - 1].timestamp)
      throw std::invalid_argument("quotes must be time-sorted");

  const auto bucket_of = [&](Timestamp ts) {
    const auto ms = ts.time_since_epoch().count();
    const auto width = interval.count();
    return ms >= 0 ? ms / width : -((-ms + width - 1) / width);
  };
  const auto first = bucket_of(records.front().timestamp);
  const auto last = bucket_of(records.back().timestamp);
  const auto n = static_cast<std::size_t>(last - first + 1);
  if (n < 2) throw EmptyInput("quotes span fewer than two resampling intervals");

  std::vector<double> values(n, 0.0);
  std::vector<bool> filled(n, false);
  for (const auto& r : records) {
    const auto k = static_cast<std::size_t>(bucket_of(r.timestamp) - first);
    values[k] = r.mid();  // later quotes overwrite earlier ones
    filled[k] = true;
  }
  // The first bucket holds the first record, so there is never a leading gap.
  for (std::size_t k = 1; k < n; ++k)
    if (!filled[k]) values[k] = values[k - 1];

  std::vector<Timestamp> calendar(n);
  for (std::size_t k = 0; k < n; ++k)
    calendar[k] = Timestamp{interval * (first + static_cast<long long>(k))};
  return {Series::unit_spaced(std::move(values), {}, "bar"), std::move(calendar)};
}

// --- files ----------------------------------------------------------------

std::vector<QuoteRecord> parse_quote_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!read_header(in, line, lineno)) throw EmptyInput("empty quote file");
  const auto header = split_fields(line);
  if (header.size() != 3 || lower(header[0]) != "timestamp" || lower(header[1]) != "bid" ||
      lower(header[2]) != "ask")
    throw ParseError(lineno, "expected header timestamp,bid,ask");

  std::vector<QuoteRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 3) throw ParseError(lineno, "expected 3 fields");
    const auto ts = parse_timestamp(f[0]);
    const auto bid = parse_double(f[1]);
    const auto ask = parse_double(f[2]);
    if (!ts) throw ParseError(lineno, "bad timestamp '" + std::string(f[0]) + "'");
    if (!bid || !ask) throw ParseError(lineno, "bad price");
    if (!std::isfinite(*bid) || !std::isfinite(*ask) || *bid <= 0.0 || *ask <= 0.0)
      throw ParseError(lineno, "bid and ask must be finite and positive");
    out.push_back({*ts, *bid, *ask});
  }
  return out;
}

DatedSeries parse_price_csv(std::istream& in, std::string label) {
  std::string line;
  std::size_t lineno = 0;
  if (!read_header(in, line, lineno)) throw EmptyInput("empty price file");
  const auto header = split_fields(line);
  if (header.size() != 2 || lower(header[1]) != "price")
    throw ParseError(lineno, "expected header time,price or date,price");
  const auto key = lower(header[0]);
  const bool dated = key == "date";
  if (!dated && key != "time") throw ParseError(lineno, "expected header time,price or date,price");

  std::vector<double> times, values;
  std::vector<Timestamp> calendar;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 2) throw ParseError(lineno, "expected 2 fields");
    const auto price = parse_double(f[1]);
    if (!price || !std::isfinite(*price)) throw ParseError(lineno, "bad price");
    if (dated) {
      const auto ts = parse_timestamp(f[0]);
      if (!ts) throw ParseError(lineno, "bad date '" + std::string(f[0]) + "'");
      if (!calendar.empty() && *ts < calendar.back())
        throw ParseError(lineno, "dates must be non-decreasing");
      calendar.push_back(*ts);
      times.push_back(static_cast<double>(times.size()));
    } else {
      const auto t = parse_double(f[0]);
      if (!t || !std::isfinite(*t)) throw ParseError(lineno, "bad time");
      if (!times.empty() && !(*t > times.back()))
        throw ParseError(lineno, "times must be strictly increasing");
      times.push_back(*t);
    }
    values.push_back(*price);
  }
  if (values.empty()) throw EmptyInput("price file has no rows");
  if (values.size() < 2) throw EmptyInput("price file needs at least two rows");
  return {Series(std::move(times), std::move(values), std::move(label), dated ? "day" : ""),
          std::move(calendar)};
}

DatedSeries load_series(const std::filesystem::path& path, std::optional<SeriesFormat> format,
                        const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  if (!format) {
    std::string line;
    std::size_t lineno = 0;
    if (!read_header(in, line, lineno)) throw EmptyInput("empty file " + path.string());
    const auto header = split_fields(line);
    format = (!header.empty() && lower(header[0]) == "timestamp") ? SeriesFormat::QuoteCsv
                                                                  : SeriesFormat::PriceCsv;
    in.clear();
    in.seekg(0);
  }
  const auto label = path.stem().string();
  if (*format == SeriesFormat::PriceCsv) return parse_price_csv(in, label);

  auto quotes = clean_quotes(parse_quote_csv(in), options.spread_cap);
  std::stable_sort(quotes.begin(), quotes.end(),
                   [](const QuoteRecord& a, const QuoteRecord& b) { return a.timestamp < b.timestamp; });
  auto out = resample_last_quote(quotes, options.interval);
  out.series = Series(out.series.times(), out.series.values(), label, out.series.time_unit());
  return out;
}

void write_price_csv(std::ostream& out, const Series& series, const std::vector<Timestamp>& calendar) {
  const bool dated = !calendar.empty();
  if (dated && calendar.size() != series.size())
    throw LengthMismatch("calendar length differs from series length");
  out << (dated ? "date,price\n" : "time,price\n");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (dated) {
      const bool intraday = calendar[i] != std::chrono::floor<std::chrono::days>(calendar[i]);
      out << (intraday ? format_timestamp(calendar[i]) : format_date(calendar[i]));
    } else {
      out << format_double(series.times()[i]);
    }
    out << ',' << format_double(series.values()[i]) << '\n';
  }
}

// --- windows --------------------------------------------------------------

std::vector<Window> monthly_windows(const Series& series, const std::vector<Timestamp>& calendar) {
  if (calendar.size() != series.size())
    throw LengthMismatch("calendar has " + std::to_string(calendar.size()) +
                         " entries for a series of " + std::to_string(series.size()));
  std::vector<Window> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= calendar.size(); ++i) {
    if (i < calendar.size() && calendar[i] < calendar[i - 1])
      throw std::invalid_argument("calendar must be non-decreasing");
    if (i == calendar.size() || !(month_of(calendar[i]) == month_of(calendar[begin]))) {
      if (i - begin >= 2) out.push_back({series.slice(begin, i), month_of(calendar[begin]), begin, i});
      begin = i;
    }
  }
  return out;
}

std::vector<Window> make_windows(const DatedSeries& data, WindowMode mode) {
  if (mode == WindowMode::Monthly) {
    if (!data.has_calendar()) throw ConfigError("monthly windows need a dated input (date column)");
    return monthly_windows(data.series, data.calendar);
  }
  const WindowTag tag = data.has_calendar() ? month_of(data.calendar.front()) : WindowTag{};
  return {Window{data.series, tag, 0, data.series.size()}};
}

std::vector<WindowTag> months_present(const std::vector<Timestamp>& calendar) {
  std::vector<WindowTag> out;
  for (const auto& ts : calendar) {
    const auto tag = month_of(ts);
    if (out.empty() || !(out.back() == tag)) out.push_back(tag);
  }
  return out;
}

}  // namespace potwell

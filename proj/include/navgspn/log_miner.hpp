#pragma once

// Clickstream mining: W3C extended / CSV log parsing, cleaning, page
// categorisation, sessionization, summary statistics and maximum-likelihood
// estimation of transition rates from sessions.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "navgspn/error.hpp"
#include "navgspn/format.hpp"
#include "navgspn/gspn.hpp"
#include "navgspn/model_io.hpp"
#include "navgspn/reachability.hpp"

namespace navgspn {

using Seconds = std::int64_t;  // UTC seconds since the epoch

struct LogRecord {
  std::string user;
  Seconds timestamp = 0;
  std::string page;  // normalised page token
};

// ---------------------------------------------------------------- timestamps

inline std::optional<Seconds> parse_timestamp(std::string_view date, std::string_view time) {
  auto num = [](std::string_view s, std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return std::nullopt;
  auto y = num(date, 0, 4), mo = num(date, 5, 2), d = num(date, 8, 2);
  if (!y || !mo || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month(static_cast<unsigned>(*mo)),
                                        std::chrono::day(static_cast<unsigned>(*d))};
  if (!ymd.ok()) return std::nullopt;

  int hh = 0, mm = 0, ss = 0;
  if (!time.empty()) {
    if (time.size() < 8 || time[2] != ':' || time[5] != ':') return std::nullopt;
    auto h = num(time, 0, 2), m = num(time, 3, 2), s = num(time, 6, 2);
    if (!h || !m || !s || *h > 23 || *m > 59 || *s > 60) return std::nullopt;
    // fractional seconds are accepted and truncated
    if (time.size() > 8 && (time[8] != '.' || time.size() == 9)) return std::nullopt;
    for (std::size_t i = 9; i < time.size(); ++i)
      if (time[i] < '0' || time[i] > '9') return std::nullopt;
    hh = *h, mm = *m, ss = *s;
  }
  const auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
  return static_cast<Seconds>(days) * 86400 + hh * 3600 + mm * 60 + ss;
}

// "YYYY-MM-DDTHH:MM:SS[Z]" or "YYYY-MM-DD HH:MM:SS".
inline std::optional<Seconds> parse_iso_timestamp(std::string_view s) {
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  if (s.size() < 10) return std::nullopt;
  if (s.size() == 10) return parse_timestamp(s, {});
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  return parse_timestamp(s.substr(0, 10), s.substr(11));
}

inline std::string format_iso(Seconds t) {
  using namespace std::chrono;
  const auto days = static_cast<int>(t >= 0 ? t / 86400 : (t - 86399) / 86400);
  const Seconds rem = t - static_cast<Seconds>(days) * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
  return buf;
}

// ---------------------------------------------------------------- URLs / pages

// Strips scheme, host, query and fragment, keeps the last path segment
// without its extension: "https://h/x/BookDetails.aspx?id=3" -> "BookDetails".
inline std::string normalize_url(std::string_view url) {
  if (auto p = url.find_first_of("?#"); p != std::string_view::npos) url = url.substr(0, p);
  if (auto p = url.find("://"); p != std::string_view::npos) {
    url = url.substr(p + 3);
    auto slash = url.find('/');
    url = slash == std::string_view::npos ? std::string_view{} : url.substr(slash);
  }
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  if (auto p = url.rfind('/'); p != std::string_view::npos) url = url.substr(p + 1);
  if (auto p = url.rfind('.'); p != std::string_view::npos && p > 0) url = url.substr(0, p);
  return std::string(url);
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline constexpr std::string_view kUnknownCategory = "unknown";

// Page name -> category (and optionally model place). Lookup is
// case-insensitive on the exact page name.
class PageCatalog {
 public:
  struct Entry {
    std::string page;
    std::string category;
    std::string place;
  };

  void add(Entry e) {
    auto key = lowercase(e.page);
    entries_[key] = std::move(e);
  }

  const Entry* find(std::string_view page) const {
    auto it = entries_.find(lowercase(page));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::string category(std::string_view page) const {
    const auto* e = find(page);
    return e ? e->category : std::string(kUnknownCategory);
  }

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  // Tab- or whitespace-separated "page category [place]" lines, '#' comments.
  static PageCatalog parse(std::istream& in, const std::string& source = "<pages>") {
    PageCatalog cat;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      auto line = detail::trim(detail::strip_comment(raw));
      if (line.empty()) continue;
      auto tok = detail::tokens(line);
      if (tok.size() < 2 || tok.size() > 3)
        throw InputError(detail::where(source, lineno) + "expected 'page category [place]'");
      cat.add({std::string(tok[0]), std::string(tok[1]), tok.size() == 3 ? std::string(tok[2]) : std::string()});
    }
    return cat;
  }
  static PageCatalog parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }
  static PageCatalog load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open page table '" + path + "'");
    return parse(in, path);
  }

 private:
  std::map<std::string, Entry> entries_;
};

inline std::string categorize_page(const PageCatalog& catalog, std::string_view url_or_page) {
  return catalog.category(normalize_url(url_or_page));
}

// ---------------------------------------------------------------- parsing

struct LogFormat {
  enum class Kind { w3c, csv } kind = Kind::w3c;
  // Column names of the key attributes. An empty time column means the date
  // column holds a full timestamp.
  std::string user_field = "cs-username";
  std::string date_field = "date";
  std::string time_field = "time";
  std::string uri_field = "cs-uri-stem";
  // Explicit column list; replaces a missing #Fields: directive (W3C) or the
  // header row (CSV).
  std::vector<std::string> fields;
  char csv_separator = ',';
};

struct ParseResult {
  std::vector<LogRecord> records;
  std::size_t total = 0;  // data lines seen
  std::map<std::string, std::size_t> dropped;  // reason -> count

  std::size_t dropped_total() const {
    std::size_t n = 0;
    for (const auto& [_, c] : dropped) n += c;
    return n;
  }
};

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

struct Columns {
  std::size_t user, date, uri;
  std::optional<std::size_t> time;
  std::size_t count;
};

inline Columns resolve_columns(const std::vector<std::string>& names, const LogFormat& f) {
  auto find = [&](const std::string& n) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == n) return i;
    return std::nullopt;
  };
  auto need = [&](const std::string& n) {
    auto i = find(n);
    if (!i) throw InputError("log schema has no column '" + n + "'");
    return *i;
  };
  Columns c{need(f.user_field), need(f.date_field), need(f.uri_field), std::nullopt, names.size()};
  if (!f.time_field.empty()) c.time = need(f.time_field);
  return c;
}

inline bool missing(std::string_view v) { return v.empty() || v == "-"; }

}  // namespace detail

// One record per complete, consistent data line. Dropped lines are counted
// under "incomplete", "bad timestamp" or "inconsistent".
inline ParseResult parse_log(std::istream& in, const LogFormat& format) {
  ParseResult res;
  std::optional<detail::Columns> cols;
  if (!format.fields.empty()) cols = detail::resolve_columns(format.fields, format);
  bool header_pending = format.kind == LogFormat::Kind::csv && format.fields.empty();

  std::string raw;
  while (std::getline(in, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string_view line = raw;
    if (detail::trim(line).empty()) continue;

    if (format.kind == LogFormat::Kind::w3c && line.front() == '#') {
      if (line.starts_with("#Fields:") && format.fields.empty()) {
        std::vector<std::string> names;
        for (auto t : detail::tokens(line.substr(8))) names.emplace_back(t);
        cols = detail::resolve_columns(names, format);
      }
      continue;
    }

    std::vector<std::string> fields;
    if (format.kind == LogFormat::Kind::csv) {
      fields = detail::split_csv(line, format.csv_separator);
      if (header_pending) {
        for (auto& f : fields) f = std::string(detail::trim(f));
        cols = detail::resolve_columns(fields, format);
        header_pending = false;
        continue;
      }
    } else {
      for (auto t : detail::tokens(line)) fields.emplace_back(t);
    }
    if (!cols) throw InputError("log has no #Fields: directive and no explicit field mapping");

    ++res.total;
    if (fields.size() > cols->count) {
      ++res.dropped["inconsistent"];
      continue;
    }
    auto get = [&](std::size_t i) -> std::string_view {
      return i < fields.size() ? detail::trim(fields[i]) : std::string_view{};
    };
    const auto user = get(cols->user), date = get(cols->date), uri = get(cols->uri);
    const auto time = cols->time ? get(*cols->time) : std::string_view{};
    if (detail::missing(user) || detail::missing(date) || detail::missing(uri) || (cols->time && detail::missing(time))) {
      ++res.dropped["incomplete"];
      continue;
    }
    auto ts = cols->time ? parse_timestamp(date, time) : parse_iso_timestamp(date);
    if (!ts) {
      ++res.dropped["bad timestamp"];
      continue;
    }
    auto page = normalize_url(uri);
    if (page.empty()) {
      ++res.dropped["incomplete"];
      continue;
    }
    res.records.push_back({std::string(user), *ts, std::move(page)});
  }
  if (!cols && res.total == 0 && format.kind == LogFormat::Kind::w3c && format.fields.empty()) {
    // empty input with no directive is still an unusable log
    throw InputError("log has no #Fields: directive and no explicit field mapping");
  }
  return res;
}

inline ParseResult parse_log(std::string_view text, const LogFormat& format) {
  std::istringstream in{std::string(text)};
  return parse_log(in, format);
}

// ---------------------------------------------------------------- sessions

struct SessionEvent {
  Seconds timestamp = 0;
  std::string page;
  std::string category;

  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

struct SessionSequence {
  std::string user;
  std::vector<SessionEvent> events;  // ascending timestamps, non-empty
  Seconds start = 0;
  Seconds end = 0;  // last event time unless the session end is known

  friend bool operator==(const SessionSequence&, const SessionSequence&) = default;
};

inline constexpr Seconds kDefaultSessionGap = 30 * 60;

// Per user, a new session starts when the gap to the previous view exceeds
// the threshold. Output is sorted by user, then session start.
inline std::vector<SessionSequence> sessionize(std::vector<LogRecord> records, Seconds gap,
                                               const PageCatalog* catalog = nullptr) {
  std::sort(records.begin(), records.end(), [](const LogRecord& a, const LogRecord& b) {
    return std::tie(a.user, a.timestamp, a.page) < std::tie(b.user, b.timestamp, b.page);
  });
  std::vector<SessionSequence> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const bool fresh = out.empty() || out.back().user != r.user || r.timestamp - out.back().end > gap;
    if (fresh) out.push_back({r.user, {}, r.timestamp, r.timestamp});
    auto& s = out.back();
    s.events.push_back({r.timestamp, r.page, catalog ? catalog->category(r.page) : std::string(kUnknownCategory)});
    s.end = r.timestamp;
  }
  return out;
}

inline std::string session_to_json(const SessionSequence& s) {
  nlohmann::ordered_json j;
  j["userId"] = s.user;
  auto ev = nlohmann::ordered_json::array();
  for (const auto& e : s.events) ev.push_back({format_iso(e.timestamp), e.page, e.category});
  j["events"] = ev;
  if (s.events.empty() || s.end != s.events.back().timestamp) j["end"] = format_iso(s.end);
  return j.dump();
}

inline SessionSequence session_from_json(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad session line: ") + e.what());
  }
  if (!j.contains("userId") || !j.contains("events") || !j["events"].is_array())
    throw InputError("session line needs userId and events");
  SessionSequence s;
  s.user = j["userId"].get<std::string>();
  for (const auto& e : j["events"]) {
    if (!e.is_array() || e.size() != 3) throw InputError("event must be [timestamp, page, category]");
    auto ts = parse_iso_timestamp(e[0].get<std::string>());
    if (!ts) throw InputError("bad event timestamp '" + e[0].get<std::string>() + "'");
    s.events.push_back({*ts, e[1].get<std::string>(), e[2].get<std::string>()});
  }
  if (s.events.empty()) throw InputError("session for user " + s.user + " has no events");
  for (std::size_t i = 1; i < s.events.size(); ++i)
    if (s.events[i].timestamp < s.events[i - 1].timestamp)
      throw InputError("session events for user " + s.user + " are not in time order");
  s.start = s.events.front().timestamp;
  s.end = s.events.back().timestamp;
  if (j.contains("end")) {
    auto ts = parse_iso_timestamp(j["end"].get<std::string>());
    if (!ts || *ts < s.end) throw InputError("bad session end for user " + s.user);
    s.end = *ts;
  }
  return s;
}

inline std::vector<SessionSequence> read_sessions(std::istream& in) {
  std::vector<SessionSequence> out;
  std::string line;
  while (std::getline(in, line))
    if (!detail::trim(line).empty()) out.push_back(session_from_json(line));
  return out;
}

inline std::vector<SessionSequence> load_sessions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sessions file '" + path + "'");
  return read_sessions(in);
}

// ---------------------------------------------------------------- statistics

struct SummaryStat {
  double mean = 0.0, min = 0.0, max = 0.0, sd = 0.0;  // population SD
};

inline SummaryStat summarize(const std::vector<double>& v) {
  SummaryStat s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(sq / static_cast<double>(v.size()));
  // keep min <= mean <= max under rounding
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

struct MiningStats {
  std::size_t total_records = 0, kept_records = 0, dropped_records = 0;
  std::map<std::string, std::size_t> dropped_by_reason;
  std::size_t unique_users = 0, unique_visits = 0;
  SummaryStat visits_per_user, views_per_visit;
  SummaryStat inter_visit_gap_s;  // sd unused by the published layout but filled
};

inline MiningStats mining_stats(const std::vector<SessionSequence>& sessions, const ParseResult* parse = nullptr) {
  MiningStats st;
  std::map<std::string, std::vector<const SessionSequence*>> by_user;
  std::size_t views = 0;
  for (const auto& s : sessions) {
    by_user[s.user].push_back(&s);
    views += s.events.size();
  }
  st.unique_users = by_user.size();
  st.unique_visits = sessions.size();
  std::vector<double> per_user, per_visit, gaps;
  for (auto& [user, list] : by_user) {
    per_user.push_back(static_cast<double>(list.size()));
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < list.size(); ++i) gaps.push_back(static_cast<double>(list[i]->start - list[i - 1]->end));
  }
  for (const auto& s : sessions) per_visit.push_back(static_cast<double>(s.events.size()));
  st.visits_per_user = summarize(per_user);
  st.views_per_visit = summarize(per_visit);
  st.inter_visit_gap_s = summarize(gaps);
  if (parse) {
    st.total_records = parse->total;
    st.kept_records = parse->records.size();
    st.dropped_records = parse->dropped_total();
    st.dropped_by_reason = parse->dropped;
  } else {
    st.total_records = st.kept_records = views;
  }
  return st;
}

inline std::string format_duration(double seconds) {
  auto t = static_cast<long long>(std::llround(seconds));
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lldd:%02lldh:%02lldm:%02llds", t / 86400, t % 86400 / 3600, t % 3600 / 60, t % 60);
  return buf;
}

inline std::string format_stats(const MiningStats& s, OutputFormat f) {
  std::ostringstream os;
  auto stat_json = [](const SummaryStat& x) {
    return nlohmann::ordered_json{{"mean", x.mean}, {"min", x.min}, {"max", x.max}, {"sd", x.sd}};
  };
  if (f == OutputFormat::json) {
    nlohmann::ordered_json j;
    j["total_records"] = s.total_records;
    j["kept_records"] = s.kept_records;
    j["dropped_records"] = s.dropped_records;
    j["dropped_by_reason"] = s.dropped_by_reason;
    j["unique_users"] = s.unique_users;
    j["unique_visits"] = s.unique_visits;
    j["visits_per_user"] = stat_json(s.visits_per_user);
    j["views_per_visit"] = stat_json(s.views_per_visit);
    j["inter_visit_gap_s"] = stat_json(s.inter_visit_gap_s);
    os << j.dump(2) << '\n';
    return os.str();
  }
  if (f == OutputFormat::csv) {
    os << "metric,mean,min,max,sd\n";
    os << "total_records," << s.total_records << ",,,\n";
    os << "kept_records," << s.kept_records << ",,,\n";
    os << "dropped_records," << s.dropped_records << ",,,\n";
    os << "unique_users," << s.unique_users << ",,,\n";
    os << "unique_visits," << s.unique_visits << ",,,\n";
    auto row = [&](const char* n, const SummaryStat& x) {
      os << n << ',' << detail::num(x.mean) << ',' << detail::num(x.min) << ',' << detail::num(x.max) << ','
         << detail::num(x.sd) << '\n';
    };
    row("visits_per_user", s.visits_per_user);
    row("views_per_visit", s.views_per_visit);
    row("inter_visit_gap_s", s.inter_visit_gap_s);
    return os.str();
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-36s %zu\n", "The total number of records analyzed", s.kept_records);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-36s %zu\n", "Records read", s.total_records);
  os << buf;
  for (const auto& [reason, n] : s.dropped_by_reason) {
    std::snprintf(buf, sizeof buf, "  dropped (%s)%*s %zu\n", reason.c_str(),
                  static_cast<int>(std::max<std::size_t>(1, 23 - reason.size())), "", n);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-36s %zu\n%-36s %zu\n", "Unique users", s.unique_users, "Unique visits",
                s.unique_visits);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-36s %-16s %-34s %s\n", "", "Mean", "Min/Max", "SD");
  os << buf;
  const auto& g = s.inter_visit_gap_s;
  const std::string gap_range = "(" + format_duration(g.min) + ", " + format_duration(g.max) + ")";
  std::snprintf(buf, sizeof buf, "%-36s %-16s %-34s %s\n", "Time between two successive visits",
                format_duration(g.mean).c_str(), gap_range.c_str(), format_duration(g.sd).c_str());
  os << buf;
  auto row = [&](const char* n, const SummaryStat& x) {
    const std::string range = "(" + detail::num(x.min) + ", " + detail::num(x.max) + ")";
    std::snprintf(buf, sizeof buf, "%-36s %-16.2f %-34s %.2f\n", n, x.mean, range.c_str(), x.sd);
    os << buf;
  };
  row("Visits per user", s.visits_per_user);
  row("Views per visit", s.views_per_visit);
  return os.str();
}

// ---------------------------------------------------------------- rates

struct RateEstimate {
  ParameterSet rates;
  std::map<std::string, double> firings;   // per symbol
  std::map<std::string, double> exposure;  // enabled seconds per symbol
};

// Maximum-likelihood rates for competing exponentials:
//   rate(s) = firings of transitions carrying s / time those transitions were enabled.
// Sessions are traced through single-token markings {place:1}. The move from
// event k to k+1 is credited to the timed transitions leading from the one
// place to the other (split evenly when several do); the session end is
// credited to the transitions leading to an absorbing marking. A symbol
// carried by j enabled transitions accrues j times the dwell.
inline RateEstimate estimate_rates(const std::vector<SessionSequence>& sessions, const PageCatalog& places,
                                   const Net& net) {
  if (sessions.empty()) throw InputError("no sessions to estimate rates from");

  struct PlaceInfo {
    std::vector<TransitionId> enabled;
    std::map<PlaceId, std::vector<TransitionId>> to;
    std::vector<TransitionId> to_end;
  };
  std::map<PlaceId, PlaceInfo> cache;
  auto info = [&](PlaceId p) -> const PlaceInfo& {
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    PlaceInfo pi;
    Marking m{std::vector<unsigned>(net.num_places(), 0)};
    m.tokens[p] = 1;
    pi.enabled = enabled_transitions(net, m);
    for (auto t : pi.enabled) {
      if (!net.transition(t).timed()) continue;
      const auto next = fire(net, m, t);
      if (classify_marking(net, next) == MarkingClass::absorbing) pi.to_end.push_back(t);
      std::size_t total = 0;
      PlaceId where = 0;
      for (PlaceId q = 0; q < next.tokens.size(); ++q) {
        total += next.tokens[q];
        if (next.tokens[q]) where = q;
      }
      if (total == 1) pi.to[where].push_back(t);
    }
    return cache.emplace(p, std::move(pi)).first->second;
  };

  auto place_of = [&](const SessionEvent& e) {
    const auto* entry = places.find(e.page);
    std::string name = entry && !entry->place.empty() ? entry->place : e.page;
    auto id = net.find_place(name);
    if (!id) throw InputError("page '" + e.page + "' does not map to a model place");
    return *id;
  };

  RateEstimate est;
  auto credit = [&](const std::vector<TransitionId>& ts) {
    for (auto t : ts)
      if (const auto* sym = net.transition(t).symbol()) est.firings[*sym] += 1.0 / static_cast<double>(ts.size());
  };

  for (const auto& s : sessions) {
    for (std::size_t k = 0; k < s.events.size(); ++k) {
      const PlaceId p = place_of(s.events[k]);
      const auto& pi = info(p);
      const bool last = k + 1 == s.events.size();
      const Seconds until = last ? s.end : s.events[k + 1].timestamp;
      const double dwell = static_cast<double>(until - s.events[k].timestamp);
      for (auto t : pi.enabled)
        if (const auto* sym = net.transition(t).symbol(); sym && net.transition(t).timed()) est.exposure[*sym] += dwell;
      if (last) {
        if (pi.to_end.empty())
          throw InputError("session of " + s.user + " ends in " + net.place(p).name + ", which cannot end a session");
        credit(pi.to_end);
      } else {
        const PlaceId q = place_of(s.events[k + 1]);
        auto it = pi.to.find(q);
        if (it == pi.to.end())
          throw InputError("no transition from " + net.place(p).name + " to " + net.place(q).name);
        credit(it->second);
      }
    }
  }

  std::vector<std::string> missing;
  for (const auto& sym : net.model().parameters) {
    const double exp = est.exposure.count(sym) ? est.exposure[sym] : 0.0;
    if (!(exp > 0.0)) {
      missing.push_back(sym);
      continue;
    }
    const double f = est.firings.count(sym) ? est.firings[sym] : 0.0;
    if (f > 0.0) est.rates.set(sym, f / exp);
    else missing.push_back(sym);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw InputError("cannot estimate rates (no enabled time or no firings): " + list);
  }
  return est;
}

inline std::string write_params(const ParameterSet& p, const std::string& comment = {}) {
  std::ostringstream os;
  if (!comment.empty()) os << "# " << comment << '\n';
  for (const auto& [k, v] : p.values()) os << k << " = " << detail::num(v) << '\n';
  return os.str();
}

}  // namespace navgspn

#pragma once

// Per-user tweeting frequency, frequency bands and the user-level
// importance metrics (AvgTS, prST, AvgAudInpW, AvgTSPc).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "csv.hpp"
#include "tweet_metrics.hpp"

namespace lowfreq {

struct FrequencyBand {
  std::string_view label;
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // inclusive; max() for the open-ended top band

  bool contains(std::int64_t k) const { return lo <= k && k <= hi; }
  bool operator==(const FrequencyBand& o) const { return lo == o.lo && hi == o.hi; }
};

inline constexpr std::int64_t kOpenEnded = std::numeric_limits<std::int64_t>::max();

// 0:1 catches rounded frequencies below 2, which the published table omits.
inline constexpr std::array<FrequencyBand, 22> kFrequencyBands = {{
    {"0:1", 0, 1},       {"2:3", 2, 3},       {"4:5", 4, 5},       {"6:7", 6, 7},
    {"8:9", 8, 9},       {"10:11", 10, 11},   {"12:13", 12, 13},   {"14:15", 14, 15},
    {"16:17", 16, 17},   {"18:19", 18, 19},   {"20:25", 20, 25},   {"26:30", 26, 30},
    {"31:35", 31, 35},   {"36:40", 36, 40},   {"41:50", 41, 50},   {"51:60", 51, 60},
    {"61:70", 61, 70},   {"71:80", 71, 80},   {"81:90", 81, 90},   {"91:100", 91, 100},
    {"101:200", 101, 200}, {"200+", 201, kOpenEnded},
}};

inline const FrequencyBand& band_from_label(std::string_view label) {
  for (const auto& b : kFrequencyBands)
    if (b.label == label) return b;
  throw DomainError("unknown frequency band '" + std::string(label) + "'");
}

// Rounds half-up, then looks up the band holding the rounded value.
inline const FrequencyBand& assign_band(double avg_or_tpw) {
  if (!std::isfinite(avg_or_tpw) || avg_or_tpw < 0) throw DomainError("tweet frequency must be finite and >= 0");
  const double rounded = std::floor(avg_or_tpw + 0.5);
  if (rounded >= static_cast<double>(kFrequencyBands.back().lo)) return kFrequencyBands.back();
  const auto k = static_cast<std::int64_t>(rounded);
  for (const auto& b : kFrequencyBands)
    if (b.contains(k)) return b;
  return kFrequencyBands.back();
}

struct WeeklyEngagement {
  std::int64_t week_index = 0;
  Count originals = 0;  // orTw
  Count retweets = 0;   // RTw
  Count favourites = 0;
  Count comments = 0;
  Count quotes = 0;
  Count bookmarks = 0;

  Count interactions() const { return retweets + favourites + comments + quotes + bookmarks; }
};

struct TweetSpan {
  double weeks = 1;
  double per_week = 0;
};

// Span from oldest to newest tweet, clamped to at least one week.
inline TweetSpan avg_or_tpw(std::span<const Tweet* const> originals) {
  if (originals.empty()) throw DomainError("tweet frequency needs at least one original tweet");
  auto [lo, hi] = std::minmax_element(originals.begin(), originals.end(),
                                      [](const Tweet* a, const Tweet* b) { return a->created_at < b->created_at; });
  const auto span_s = std::max<Timestamp>((*hi)->created_at - (*lo)->created_at, kSecondsPerWeek);
  TweetSpan s;
  s.weeks = static_cast<double>(span_s) / static_cast<double>(kSecondsPerWeek);
  s.per_week = static_cast<double>(originals.size()) / s.weeks;
  return s;
}

inline TweetSpan avg_or_tpw(std::span<const Tweet> originals) {
  std::vector<const Tweet*> ptrs;
  for (const auto& t : originals) ptrs.push_back(&t);
  return avg_or_tpw(std::span<const Tweet* const>(ptrs));
}

// Consecutive 7-day buckets anchored at the oldest original, including
// empty weeks between active ones.
inline std::vector<WeeklyEngagement> weekly_engagement(std::span<const Tweet* const> originals) {
  if (originals.empty()) return {};
  Timestamp anchor = originals.front()->created_at;
  for (const auto* t : originals) anchor = std::min(anchor, t->created_at);
  std::vector<WeeklyEngagement> weeks;
  for (const auto* t : originals) {
    const auto idx = static_cast<std::size_t>((t->created_at - anchor) / kSecondsPerWeek);
    if (idx >= weeks.size()) {
      const auto old = weeks.size();
      weeks.resize(idx + 1);
      for (auto i = old; i < weeks.size(); ++i) weeks[i].week_index = static_cast<std::int64_t>(i);
    }
    auto& w = weeks[idx];
    ++w.originals;
    w.retweets += t->retweet_count;
    w.favourites += t->favourite_count;
    w.comments += t->comments();
    w.quotes += t->quotes();
    w.bookmarks += t->bookmarks();
  }
  return weeks;
}

// Mean over active weeks of interactions / (originals that week x followers).
inline double avg_aud_inpw(std::span<const WeeklyEngagement> weeks, Count followers) {
  if (followers == 0) throw DomainError("audience interaction needs a non-zero follower count");
  double sum = 0;
  std::size_t active = 0;
  for (const auto& w : weeks) {
    if (w.originals == 0) continue;
    sum += static_cast<double>(w.interactions()) /
           (static_cast<double>(w.originals) * static_cast<double>(followers));
    ++active;
  }
  if (active == 0) throw DomainError("audience interaction needs at least one week with an original tweet");
  return sum / static_cast<double>(active);
}

struct UserMetrics {
  std::string user_id;
  Count followers = 0;
  std::size_t original_count = 0;  // orT
  std::size_t retweet_count = 0;   // retweets made by the user
  double span_weeks = 1;
  double avg_or_tpw = 0;
  double avg_rt_pw = 0;
  FrequencyBand band = kFrequencyBands.front();
  double avg_ts = 0;
  double pr_st = 0;  // percent of originals with TS > 0
  double avg_aud_inpw = 0;
  double avg_tspc = 0;
};

// `scores` must cover exactly the user's original tweets, with TSPc set.
inline UserMetrics compute_user_metrics(const UserProfile& user, std::span<const Tweet* const> tweets,
                                        std::span<const TweetScore* const> scores) {
  std::vector<const Tweet*> originals;
  UserMetrics m;
  m.user_id = user.user_id;
  m.followers = user.followers_count;
  for (const auto* t : tweets) {
    if (t->user_id != user.user_id) throw DomainError("tweet " + t->tweet_id + " is not by user " + user.user_id);
    if (t->is_retweet)
      ++m.retweet_count;
    else
      originals.push_back(t);
  }
  if (originals.empty()) throw DomainError("user " + user.user_id + " has no original tweets");
  if (scores.size() != originals.size())
    throw DomainError("user " + user.user_id + ": " + std::to_string(scores.size()) + " scores for " +
                      std::to_string(originals.size()) + " original tweets");
  std::unordered_set<std::string_view> original_ids;
  for (const auto* t : originals) original_ids.insert(t->tweet_id);

  double ts_sum = 0, tspc_sum = 0;
  std::size_t positive = 0;
  for (const auto* s : scores) {
    if (!original_ids.erase(s->tweet_id))
      throw DomainError("score for tweet " + s->tweet_id + " does not match an original tweet of user " + user.user_id);
    if (!s->tspc) throw DomainError("score for tweet " + s->tweet_id + " has no percentile");
    ts_sum += s->ts;
    tspc_sum += *s->tspc;
    if (s->ts > 0) ++positive;
  }
  const double n = static_cast<double>(originals.size());
  m.original_count = originals.size();
  const auto span = avg_or_tpw(std::span<const Tweet* const>(originals));
  m.span_weeks = span.weeks;
  m.avg_or_tpw = span.per_week;
  m.avg_rt_pw = static_cast<double>(m.retweet_count) / span.weeks;
  m.band = assign_band(m.avg_or_tpw);
  m.avg_ts = ts_sum / n;
  m.pr_st = 100.0 * static_cast<double>(positive) / n;
  m.avg_tspc = tspc_sum / n;
  const auto weeks = weekly_engagement(originals);
  m.avg_aud_inpw = avg_aud_inpw(weeks, user.followers_count);
  return m;
}

inline UserMetrics compute_user_metrics(const UserProfile& user, std::span<const Tweet> tweets,
                                        std::span<const TweetScore> scores) {
  std::vector<const Tweet*> tp;
  std::vector<const TweetScore*> sp;
  for (const auto& t : tweets) tp.push_back(&t);
  for (const auto& s : scores) sp.push_back(&s);
  return compute_user_metrics(user, tp, sp);
}

// Metrics for every user that has at least one scored original, ordered by user_id.
inline std::vector<UserMetrics> compute_corpus_user_metrics(const CorpusSnapshot& snap,
                                                            std::span<const TweetScore> scores, unsigned threads = 1) {
  std::unordered_map<std::string_view, std::vector<const TweetScore*>> by_user;
  for (const auto& s : scores) by_user[s.user_id].push_back(&s);
  auto tweets = snap.tweets_by_user();
  std::vector<const UserProfile*> users;
  for (const auto& u : snap.users)
    if (by_user.count(u.user_id)) users.push_back(&u);
  if (users.size() != by_user.size()) {
    for (const auto& [id, _] : by_user)
      if (!snap.find_user(std::string(id))) throw IntegrityError("score references unknown user " + std::string(id));
  }
  std::sort(users.begin(), users.end(),
            [](const UserProfile* a, const UserProfile* b) { return a->user_id < b->user_id; });
  std::vector<UserMetrics> out(users.size());
  detail::parallel_for(users.size(), threads, [&](std::size_t i) {
    const auto& u = *users[i];
    out[i] = compute_user_metrics(u, tweets.at(u.user_id), by_user.at(u.user_id));
  });
  return out;
}

inline const std::vector<std::string>& user_metrics_csv_header() {
  static const std::vector<std::string> h{"user_id", "followers", "orT",  "rt_count",   "AvgOrTpW",
                                          "band",    "AvgTS",     "prST", "AvgAudInpW", "AvgTSPc"};
  return h;
}

inline void write_user_metrics_csv(std::ostream& os, std::span<const UserMetrics> metrics) {
  csv::write_row(os, user_metrics_csv_header());
  for (const auto& m : metrics)
    csv::write_row(os, {m.user_id, std::to_string(m.followers), std::to_string(m.original_count),
                        std::to_string(m.retweet_count), csv::format_real(m.avg_or_tpw), std::string(m.band.label),
                        csv::format_real(m.avg_ts), csv::format_real(m.pr_st), csv::format_real(m.avg_aud_inpw),
                        csv::format_real(m.avg_tspc)});
}

// AvgRTpW is not exported; span_weeks is recovered as orT / AvgOrTpW.
inline std::vector<UserMetrics> read_user_metrics_csv(std::istream& in) {
  std::vector<UserMetrics> out;
  for (const auto& row : csv::read_table(in, user_metrics_csv_header())) {
    auto count = [&](std::size_t i, const char* what) {
      const auto v = csv::parse_int(row[i], row.line, what);
      if (v < 0) throw ParseError(row.line, std::string(what) + " must be non-negative");
      return static_cast<std::uint64_t>(v);
    };
    UserMetrics m;
    m.user_id = row[0];
    m.followers = count(1, "followers");
    m.original_count = count(2, "orT");
    m.retweet_count = count(3, "rt_count");
    m.avg_or_tpw = csv::parse_real(row[4], row.line, "AvgOrTpW");
    try {
      m.band = band_from_label(row[5]);
    } catch (const DomainError& e) {
      throw ParseError(row.line, e.what());
    }
    m.avg_ts = csv::parse_real(row[6], row.line, "AvgTS");
    m.pr_st = csv::parse_real(row[7], row.line, "prST");
    m.avg_aud_inpw = csv::parse_real(row[8], row.line, "AvgAudInpW");
    m.avg_tspc = csv::parse_real(row[9], row.line, "AvgTSPc");
    if (m.original_count > 0 && m.avg_or_tpw > 0) m.span_weeks = static_cast<double>(m.original_count) / m.avg_or_tpw;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace lowfreq

#pragma once

// Per-tweet importance: engagement rates relative to the author's initial
// audience, the Tweet Score (TS) and the Tweet Score Percentile (TSPc).

#include <algorithm>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "csv.hpp"
#include "parallel.hpp"

namespace lowfreq {

// Percent of the initial audience engaging through each channel.
struct EngagementRates {
  double retweet = 0;    // prRT
  double favourite = 0;  // prFV
  double comment = 0;    // prCM
  double quote = 0;      // prQT
  double bookmark = 0;   // prBM

  double max() const { return std::max({retweet, favourite, comment, quote, bookmark}); }

  bool operator==(const EngagementRates&) const = default;
};

struct TweetScore {
  std::string tweet_id;
  std::string user_id;
  double ts = 0;
  EngagementRates rates;
  bool over_reach = false;       // some rate exceeds 100%
  bool zero_engagement = false;  // every count is zero
  std::optional<double> tspc;

  bool pooled() const { return !over_reach && !zero_engagement; }

  bool operator==(const TweetScore&) const = default;
};

inline TweetScore compute_tweet_score(const Tweet& tweet, Count followers) {
  if (followers == 0) throw DomainError("tweet " + tweet.tweet_id + ": author has zero followers");
  if (tweet.is_retweet) throw DomainError("tweet " + tweet.tweet_id + " is a retweet; only originals are scored");
  const double audience = static_cast<double>(followers);
  auto rate = [&](Count c) { return 100.0 * static_cast<double>(c) / audience; };

  TweetScore s;
  s.tweet_id = tweet.tweet_id;
  s.user_id = tweet.user_id;
  s.rates = {rate(tweet.retweet_count), rate(tweet.favourite_count), rate(tweet.comments()), rate(tweet.quotes()),
             rate(tweet.bookmarks())};
  s.ts = static_cast<double>(tweet.retweet_count) * s.rates.retweet +
         static_cast<double>(tweet.favourite_count) * s.rates.favourite +
         static_cast<double>(tweet.comments()) * s.rates.comment + static_cast<double>(tweet.quotes()) * s.rates.quote +
         static_cast<double>(tweet.bookmarks()) * s.rates.bookmark;
  s.over_reach = s.rates.max() > 100.0;
  s.zero_engagement =
      tweet.retweet_count + tweet.favourite_count + tweet.comments() + tweet.quotes() + tweet.bookmarks() == 0;
  return s;
}

// Assigns TSPc over one global pool. Over-reach tweets get 100, zero
// engagement tweets get 0, and both are left out of the pool. For a pooled
// tweet, TSPc is the percentage of pooled tweets with a strictly lower TS.
inline std::vector<TweetScore> compute_percentiles(std::vector<TweetScore> scores) {
  if (scores.empty()) throw DomainError("cannot compute percentiles of an empty score list");
  std::vector<double> pool;
  pool.reserve(scores.size());
  for (const auto& s : scores)
    if (s.pooled()) pool.push_back(s.ts);
  std::sort(pool.begin(), pool.end());
  const double n = static_cast<double>(pool.size());
  for (auto& s : scores) {
    if (s.over_reach) {
      s.tspc = 100.0;
    } else if (s.zero_engagement) {
      s.tspc = 0.0;
    } else {
      const auto below = std::lower_bound(pool.begin(), pool.end(), s.ts) - pool.begin();
      s.tspc = 100.0 * static_cast<double>(below) / n;
    }
  }
  return scores;
}

// Scores every original tweet whose author is in `include` (all authors
// when null), then assigns percentiles across the whole set. Output is
// ordered by tweet_id.
inline std::vector<TweetScore> score_corpus(const CorpusSnapshot& snap, unsigned threads = 1,
                                            const std::unordered_set<std::string>* include = nullptr) {
  std::unordered_map<std::string, Count> followers;
  for (const auto& u : snap.users) followers.emplace(u.user_id, u.followers_count);
  std::vector<const Tweet*> originals;
  for (const auto& t : snap.tweets)
    if (!t.is_retweet && (!include || include->count(t.user_id))) originals.push_back(&t);
  std::sort(originals.begin(), originals.end(),
            [](const Tweet* a, const Tweet* b) { return a->tweet_id < b->tweet_id; });
  std::vector<TweetScore> scores(originals.size());
  detail::parallel_for(originals.size(), threads, [&](std::size_t i) {
    scores[i] = compute_tweet_score(*originals[i], followers.at(originals[i]->user_id));
  });
  if (scores.empty()) return scores;
  return compute_percentiles(std::move(scores));
}

inline const std::vector<std::string>& score_csv_header() {
  static const std::vector<std::string> h{"tweet_id", "user_id",         "ts",  "prRT",
                                          "prFV",     "over_reach", "zero_engagement", "tspc"};
  return h;
}

inline void write_scores_csv(std::ostream& os, std::span<const TweetScore> scores) {
  csv::write_row(os, score_csv_header());
  for (const auto& s : scores)
    csv::write_row(os, {s.tweet_id, s.user_id, csv::format_real(s.ts), csv::format_real(s.rates.retweet),
                        csv::format_real(s.rates.favourite), s.over_reach ? "true" : "false",
                        s.zero_engagement ? "true" : "false", s.tspc ? csv::format_real(*s.tspc) : ""});
}

// Reads the per-tweet export. Only prRT and prFV are carried by the file;
// the remaining rates come back as zero.
inline std::vector<TweetScore> read_scores_csv(std::istream& in) {
  std::vector<TweetScore> out;
  for (const auto& row : csv::read_table(in, score_csv_header())) {
    TweetScore s;
    s.tweet_id = row[0];
    s.user_id = row[1];
    s.ts = csv::parse_real(row[2], row.line, "ts");
    s.rates.retweet = csv::parse_real(row[3], row.line, "prRT");
    s.rates.favourite = csv::parse_real(row[4], row.line, "prFV");
    s.over_reach = csv::parse_bool(row[5], row.line, "over_reach");
    s.zero_engagement = csv::parse_bool(row[6], row.line, "zero_engagement");
    if (!row[7].empty()) s.tspc = csv::parse_real(row[7], row.line, "tspc");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lowfreq

#pragma once

// Account eligibility and anti-spam screening.

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "csv.hpp"

namespace lowfreq {

enum class ScreeningFailure {
  NotActive30d,
  VerifiedAccount,
  TooFewTweets,
  MinAccountAge,
  MinFollowers,
  FollowRatio,
  DefaultProfile,
};

inline constexpr std::array kAllScreeningFailures = {
    ScreeningFailure::NotActive30d, ScreeningFailure::VerifiedAccount, ScreeningFailure::TooFewTweets,
    ScreeningFailure::MinAccountAge, ScreeningFailure::MinFollowers,  ScreeningFailure::FollowRatio,
    ScreeningFailure::DefaultProfile,
};

inline std::string_view to_string(ScreeningFailure f) {
  switch (f) {
    case ScreeningFailure::NotActive30d: return "not-active-30d";
    case ScreeningFailure::VerifiedAccount: return "verified-account";
    case ScreeningFailure::TooFewTweets: return "too-few-tweets";
    case ScreeningFailure::MinAccountAge: return "min-account-age";
    case ScreeningFailure::MinFollowers: return "min-followers";
    case ScreeningFailure::FollowRatio: return "follow-ratio";
    case ScreeningFailure::DefaultProfile: return "default-profile";
  }
  return "unknown";
}

inline ScreeningFailure screening_failure_from_string(std::string_view s) {
  for (auto f : kAllScreeningFailures)
    if (to_string(f) == s) return f;
  throw DomainError("unknown screening reason code '" + std::string(s) + "'");
}

struct ScreeningRules {
  Timestamp min_account_age_s = 90 * kSecondsPerDay;  // age must exceed this
  Count min_followers = 10;
  Count max_friends_per_follower = 20;
  Timestamp activity_window_s = 30 * kSecondsPerDay;
  std::size_t min_original_tweets = 10;
};

struct ScreeningVerdict {
  std::string user_id;
  std::vector<ScreeningFailure> failures;  // in kAllScreeningFailures order

  bool passed() const { return failures.empty(); }
  bool has(ScreeningFailure f) const { return std::find(failures.begin(), failures.end(), f) != failures.end(); }

  bool operator==(const ScreeningVerdict&) const = default;
};

inline ScreeningVerdict screen_user(const UserProfile& profile, std::size_t original_tweet_count, Timestamp as_of,
                                    const ScreeningRules& rules = {}) {
  if (as_of < profile.account_created_at)
    throw DomainError("screening time precedes account creation for user " + profile.user_id);
  ScreeningVerdict v{profile.user_id, {}};
  const bool active = profile.last_tweet_at && *profile.last_tweet_at >= as_of - rules.activity_window_s;
  if (!active) v.failures.push_back(ScreeningFailure::NotActive30d);
  if (profile.verified) v.failures.push_back(ScreeningFailure::VerifiedAccount);
  if (original_tweet_count < rules.min_original_tweets) v.failures.push_back(ScreeningFailure::TooFewTweets);
  if (as_of - profile.account_created_at <= rules.min_account_age_s)
    v.failures.push_back(ScreeningFailure::MinAccountAge);
  if (profile.followers_count < rules.min_followers) v.failures.push_back(ScreeningFailure::MinFollowers);
  if (profile.friends_count > rules.max_friends_per_follower * profile.followers_count)
    v.failures.push_back(ScreeningFailure::FollowRatio);
  if (!profile.has_profile_image || !profile.has_description || !profile.has_language)
    v.failures.push_back(ScreeningFailure::DefaultProfile);
  return v;
}

// One verdict per user, screened as of the snapshot's retrieval time.
inline std::map<std::string, ScreeningVerdict> screen_corpus(const CorpusSnapshot& snap,
                                                             const ScreeningRules& rules = {}) {
  std::unordered_map<std::string, std::size_t> originals;
  for (const auto& t : snap.tweets)
    if (!t.is_retweet) ++originals[t.user_id];
  std::map<std::string, ScreeningVerdict> out;
  for (const auto& u : snap.users) {
    auto it = originals.find(u.user_id);
    out.emplace(u.user_id, screen_user(u, it == originals.end() ? 0 : it->second, snap.retrieval_time, rules));
  }
  return out;
}

inline const std::vector<std::string>& verdict_csv_header() {
  static const std::vector<std::string> h{"user_id", "passed", "failures"};
  return h;
}

inline void write_verdicts_csv(std::ostream& os, const std::map<std::string, ScreeningVerdict>& verdicts) {
  csv::write_row(os, verdict_csv_header());
  for (const auto& [id, v] : verdicts) {
    std::string joined;
    for (auto f : v.failures) {
      if (!joined.empty()) joined += ';';
      joined += to_string(f);
    }
    csv::write_row(os, {id, v.passed() ? "true" : "false", joined});
  }
}

inline std::map<std::string, ScreeningVerdict> read_verdicts_csv(std::istream& in) {
  std::map<std::string, ScreeningVerdict> out;
  for (const auto& row : csv::read_table(in, verdict_csv_header())) {
    ScreeningVerdict v{row[0], {}};
    std::string_view rest = row[2];
    while (!rest.empty()) {
      auto semi = rest.find(';');
      v.failures.push_back(screening_failure_from_string(rest.substr(0, semi)));
      rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    }
    if (csv::parse_bool(row[1], row.line, "passed") != v.passed())
      throw ParseError(row.line, "passed flag disagrees with failure list for user " + v.user_id);
    if (!out.emplace(v.user_id, std::move(v)).second) throw ParseError(row.line, "duplicate user_id " + row[0]);
  }
  return out;
}

}  // namespace lowfreq

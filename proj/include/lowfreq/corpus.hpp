#pragma once

// Tweet/user snapshot types and the line-delimited corpus file format.
//
// A corpus file is UTF-8 with one JSON object per line. The first line is
// the snapshot header `{"retrieval_time": <epoch seconds>}`; every later
// line is a user or tweet record selected by its "kind" field. Unknown
// fields are ignored on load.

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace lowfreq {

using Timestamp = std::int64_t;  // UTC epoch seconds
using Count = std::uint64_t;

inline constexpr std::size_t kMaxTweetsPerUser = 3200;
inline constexpr Timestamp kSecondsPerHour = 3600;
inline constexpr Timestamp kSecondsPerDay = 86400;
inline constexpr Timestamp kSecondsPerWeek = 604800;

struct Tweet {
  std::string tweet_id;
  std::string user_id;
  Timestamp created_at = 0;
  std::string text;
  Count retweet_count = 0;
  Count favourite_count = 0;
  std::optional<Count> comment_count;
  std::optional<Count> quote_count;
  std::optional<Count> bookmark_count;
  std::vector<std::string> hashtags;
  std::vector<std::string> user_mentions;
  bool is_quote = false;
  bool is_retweet = false;

  Count comments() const { return comment_count.value_or(0); }
  Count quotes() const { return quote_count.value_or(0); }
  Count bookmarks() const { return bookmark_count.value_or(0); }

  bool operator==(const Tweet&) const = default;
};

struct UserProfile {
  std::string user_id;
  Timestamp account_created_at = 0;
  Count followers_count = 0;
  Count friends_count = 0;
  Count statuses_count = 0;
  Count favourites_count = 0;
  bool verified = false;
  bool has_profile_image = true;
  bool has_description = true;
  bool has_language = true;
  std::optional<Timestamp> last_tweet_at;

  bool operator==(const UserProfile&) const = default;
};

// Users and tweets keep file order so that save() is stable.
struct CorpusSnapshot {
  Timestamp retrieval_time = 0;
  std::map<std::string, std::string> metadata;  // free-form header annotations
  std::vector<UserProfile> users;
  std::vector<Tweet> tweets;

  const UserProfile* find_user(const std::string& user_id) const {
    for (const auto& u : users)
      if (u.user_id == user_id) return &u;
    return nullptr;
  }

  // Tweets grouped by author, in snapshot order within each group.
  std::unordered_map<std::string, std::vector<const Tweet*>> tweets_by_user() const {
    std::unordered_map<std::string, std::vector<const Tweet*>> out;
    for (const auto& t : tweets) out[t.user_id].push_back(&t);
    return out;
  }

  bool operator==(const CorpusSnapshot&) const = default;
};

// Checks every snapshot invariant; throws IntegrityError on the first violation.
inline void validate(const CorpusSnapshot& snap) {
  std::unordered_set<std::string> user_ids;
  for (const auto& u : snap.users) {
    if (u.user_id.empty()) throw IntegrityError("user with empty user_id");
    if (!user_ids.insert(u.user_id).second) throw IntegrityError("duplicate user_id " + u.user_id);
    if (u.account_created_at > snap.retrieval_time)
      throw IntegrityError("user " + u.user_id + " created after retrieval_time");
  }
  std::unordered_set<std::string> tweet_ids;
  std::unordered_map<std::string, std::size_t> per_user;
  for (const auto& t : snap.tweets) {
    if (t.tweet_id.empty()) throw IntegrityError("tweet with empty tweet_id");
    if (!tweet_ids.insert(t.tweet_id).second) throw IntegrityError("duplicate tweet_id " + t.tweet_id);
    if (!user_ids.count(t.user_id))
      throw IntegrityError("tweet " + t.tweet_id + " references unknown user " + t.user_id);
    if (t.created_at > snap.retrieval_time)
      throw IntegrityError("tweet " + t.tweet_id + " created after retrieval_time");
    if (++per_user[t.user_id] > kMaxTweetsPerUser)
      throw IntegrityError("user " + t.user_id + " has more than " + std::to_string(kMaxTweetsPerUser) +
                           " tweets");
  }
}

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw ParseError(line, std::string("missing required field '") + key + "'");
  return *it;
}

// Ids are opaque; numeric ids from raw API exports are accepted and kept as text.
inline std::string read_id(const json& obj, const char* key, std::size_t line) {
  const auto& v = require(obj, key, line);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.is_number_unsigned() ? std::to_string(v.get<std::uint64_t>())
                                                           : std::to_string(v.get<std::int64_t>());
  throw ParseError(line, std::string("field '") + key + "' must be a string or integer id");
}

inline Timestamp read_time(const json& v, const char* key, std::size_t line) {
  if (!v.is_number_integer()) throw ParseError(line, std::string("field '") + key + "' must be integer epoch seconds");
  return v.get<Timestamp>();
}

inline Count read_count(const json& v, const char* key, std::size_t line) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw ParseError(line, std::string("field '") + key + "' must be a non-negative integer");
  return v.get<Count>();
}

inline std::optional<Count> read_optional_count(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return read_count(*it, key, line);
}

inline bool read_bool(const json& obj, const char* key, std::size_t line, std::optional<bool> fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (fallback) return *fallback;
    throw ParseError(line, std::string("missing required field '") + key + "'");
  }
  if (!it->is_boolean()) throw ParseError(line, std::string("field '") + key + "' must be boolean");
  return it->get<bool>();
}

inline std::vector<std::string> read_strings(const json& obj, const char* key, std::size_t line) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(line, std::string("field '") + key + "' must be an array");
  for (const auto& e : *it) {
    if (!e.is_string()) throw ParseError(line, std::string("field '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline UserProfile user_from_json(const json& j, std::size_t line) {
  UserProfile u;
  u.user_id = read_id(j, "user_id", line);
  u.account_created_at = read_time(require(j, "account_created_at", line), "account_created_at", line);
  u.followers_count = read_count(require(j, "followers_count", line), "followers_count", line);
  u.friends_count = read_count(require(j, "friends_count", line), "friends_count", line);
  u.statuses_count = read_count(require(j, "statuses_count", line), "statuses_count", line);
  u.favourites_count = read_count(require(j, "favourites_count", line), "favourites_count", line);
  u.verified = read_bool(j, "verified", line, std::nullopt);
  u.has_profile_image = read_bool(j, "has_profile_image", line, true);
  u.has_description = read_bool(j, "has_description", line, true);
  u.has_language = read_bool(j, "has_language", line, true);
  if (auto it = j.find("last_tweet_at"); it != j.end() && !it->is_null())
    u.last_tweet_at = read_time(*it, "last_tweet_at", line);
  return u;
}

inline Tweet tweet_from_json(const json& j, std::size_t line) {
  Tweet t;
  t.tweet_id = read_id(j, "tweet_id", line);
  t.user_id = read_id(j, "user_id", line);
  t.created_at = read_time(require(j, "created_at", line), "created_at", line);
  if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line, "field 'text' must be a string");
    t.text = it->get<std::string>();
  }
  t.retweet_count = read_count(require(j, "retweet_count", line), "retweet_count", line);
  t.favourite_count = read_count(require(j, "favourite_count", line), "favourite_count", line);
  t.comment_count = read_optional_count(j, "comment_count", line);
  t.quote_count = read_optional_count(j, "quote_count", line);
  t.bookmark_count = read_optional_count(j, "bookmark_count", line);
  t.hashtags = read_strings(j, "hashtags", line);
  t.user_mentions = read_strings(j, "user_mentions", line);
  t.is_quote = read_bool(j, "is_quote", line, false);
  t.is_retweet = read_bool(j, "is_retweet", line, std::nullopt);
  return t;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const UserProfile& u) {
  nlohmann::ordered_json j;
  j["kind"] = "user";
  j["user_id"] = u.user_id;
  j["account_created_at"] = u.account_created_at;
  j["followers_count"] = u.followers_count;
  j["friends_count"] = u.friends_count;
  j["statuses_count"] = u.statuses_count;
  j["favourites_count"] = u.favourites_count;
  j["verified"] = u.verified;
  j["has_profile_image"] = u.has_profile_image;
  j["has_description"] = u.has_description;
  j["has_language"] = u.has_language;
  if (u.last_tweet_at) j["last_tweet_at"] = *u.last_tweet_at;
  return j;
}

inline nlohmann::ordered_json to_json(const Tweet& t) {
  nlohmann::ordered_json j;
  j["kind"] = "tweet";
  j["tweet_id"] = t.tweet_id;
  j["user_id"] = t.user_id;
  j["created_at"] = t.created_at;
  j["text"] = t.text;
  j["retweet_count"] = t.retweet_count;
  j["favourite_count"] = t.favourite_count;
  if (t.comment_count) j["comment_count"] = *t.comment_count;
  if (t.quote_count) j["quote_count"] = *t.quote_count;
  if (t.bookmark_count) j["bookmark_count"] = *t.bookmark_count;
  j["hashtags"] = t.hashtags;
  j["user_mentions"] = t.user_mentions;
  j["is_quote"] = t.is_quote;
  j["is_retweet"] = t.is_retweet;
  return j;
}

// Writes one tweet record per line, as used for reordered timelines.
inline void write_tweet_records(std::ostream& os, const std::vector<Tweet>& tweets) {
  for (const auto& t : tweets) os << to_json(t).dump() << '\n';
}

inline void save_corpus_snapshot(const CorpusSnapshot& snap, std::ostream& os) {
  nlohmann::ordered_json header;
  header["retrieval_time"] = snap.retrieval_time;
  if (!snap.metadata.empty()) header["meta"] = snap.metadata;
  os << header.dump() << '\n';
  for (const auto& u : snap.users) os << to_json(u).dump() << '\n';
  write_tweet_records(os, snap.tweets);
}

inline void save_corpus_snapshot(const CorpusSnapshot& snap, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  save_corpus_snapshot(snap, os);
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline CorpusSnapshot load_corpus_snapshot(std::istream& in) {
  CorpusSnapshot snap;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not a JSON object");
    if (!have_header) {
      snap.retrieval_time = detail::read_time(detail::require(j, "retrieval_time", line_no), "retrieval_time", line_no);
      if (auto it = j.find("meta"); it != j.end() && it->is_object())
        for (const auto& [k, v] : it->items())
          snap.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
      have_header = true;
      continue;
    }
    const auto& kind = detail::require(j, "kind", line_no);
    if (kind == "user") {
      snap.users.push_back(detail::user_from_json(j, line_no));
    } else if (kind == "tweet") {
      snap.tweets.push_back(detail::tweet_from_json(j, line_no));
    } else {
      throw ParseError(line_no, "unknown record kind " + kind.dump());
    }
  }
  if (!have_header) throw ParseError(0, "empty corpus file: missing retrieval_time header");
  validate(snap);
  return snap;
}

inline CorpusSnapshot load_corpus_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_corpus_snapshot(in);
}

// Drops tweets younger than `hours` at retrieval time. A tweet exactly
// `hours` old is kept. Users are retained even when left without tweets.
inline CorpusSnapshot apply_recency_cutoff(const CorpusSnapshot& snap, int hours = 72) {
  if (hours <= 0) throw DomainError("recency cutoff hours must be positive");
  const Timestamp limit = snap.retrieval_time - static_cast<Timestamp>(hours) * kSecondsPerHour;
  CorpusSnapshot out;
  out.retrieval_time = snap.retrieval_time;
  out.metadata = snap.metadata;
  out.users = snap.users;
  out.tweets.reserve(snap.tweets.size());
  for (const auto& t : snap.tweets)
    if (t.created_at <= limit) out.tweets.push_back(t);
  return out;
}

}  // namespace lowfreq

#pragma once

// Seeded synthetic corpora with an optional planted signal: per-follower
// engagement probability p = p0 * appeal / (1 + signal_strength * weekly_rate),
// so frequent tweeters earn less engagement per follower when the signal is
// on. `appeal` is a per-user log-normal trait independent of the rate.
//
// Every draw uses hand-written samplers over std::mt19937_64 seeded per
// user from std::seed_seq{seed, user index}, so output does not depend on
// the thread count or on the standard library's distribution classes.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numbers>
#include <span>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "parallel.hpp"
#include "user_metrics.hpp"

namespace lowfreq {

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t user_count = 1000;
  // Weight per frequency band label; bands not listed get weight 0.
  std::vector<std::pair<std::string, double>> band_mix = {
      {"0:1", 14},   {"2:3", 14},   {"4:5", 10},   {"6:7", 8},     {"8:9", 7},    {"10:11", 6},
      {"12:13", 5},  {"14:15", 4},  {"16:17", 3.5}, {"18:19", 3},  {"20:25", 6},  {"26:30", 4},
      {"31:35", 3},  {"36:40", 2.5}, {"41:50", 3},  {"51:60", 2},  {"61:70", 1.5}, {"71:80", 1},
      {"81:90", 1},  {"91:100", 0.8}, {"101:200", 2}, {"200+", 0.5},
  };
  double follower_median = 5000;
  double follower_sigma = 1.0;
  double engagement_base = 0.01;  // p0, per follower per tweet per channel
  double appeal_sigma = 0.8;      // log-normal spread of a per-user multiplier on p0
  double signal_strength = 0;
  int weeks = 8;
  double retweet_ratio = 0.25;       // retweets made per original tweet
  double overreach_fraction = 0;     // share of originals pushed past their audience
  Timestamp retrieval_time = 1672531200;

  void check() const {
    if (user_count == 0) throw DomainError("synth: user_count must be positive");
    if (weeks <= 0) throw DomainError("synth: weeks must be positive");
    if (!(engagement_base > 0 && engagement_base < 1)) throw DomainError("synth: engagement_base must lie in (0, 1)");
    if (!(signal_strength >= 0)) throw DomainError("synth: signal_strength must be >= 0");
    if (!(follower_median >= 1) || !(follower_sigma >= 0)) throw DomainError("synth: bad follower law");
    if (!(appeal_sigma >= 0)) throw DomainError("synth: appeal_sigma must be >= 0");
    if (!(retweet_ratio >= 0)) throw DomainError("synth: retweet_ratio must be >= 0");
    if (!(overreach_fraction >= 0 && overreach_fraction <= 1))
      throw DomainError("synth: overreach_fraction must lie in [0, 1]");
    double total = 0;
    for (const auto& [label, w] : band_mix) {
      band_from_label(label);
      if (!(w >= 0)) throw DomainError("synth: band weight for " + label + " must be >= 0");
      total += w;
    }
    if (!(total > 0)) throw DomainError("synth: band weights are all zero");
  }
};

inline SynthConfig synth_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError(0, "synth config must be a JSON object");
  SynthConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "user_count") c.user_count = v.get<std::size_t>();
      else if (key == "follower_median") c.follower_median = v.get<double>();
      else if (key == "follower_sigma") c.follower_sigma = v.get<double>();
      else if (key == "engagement_base") c.engagement_base = v.get<double>();
      else if (key == "appeal_sigma") c.appeal_sigma = v.get<double>();
      else if (key == "signal_strength") c.signal_strength = v.get<double>();
      else if (key == "weeks") c.weeks = v.get<int>();
      else if (key == "retweet_ratio") c.retweet_ratio = v.get<double>();
      else if (key == "overreach_fraction") c.overreach_fraction = v.get<double>();
      else if (key == "retrieval_time") c.retrieval_time = v.get<Timestamp>();
      else if (key == "band_mix") {
        c.band_mix.clear();
        for (const auto& [label, w] : v.items()) c.band_mix.emplace_back(label, w.get<double>());
      } else {
        throw ParseError(0, "unknown synth config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(0, "synth config key '" + key + "': " + e.what());
    }
  }
  c.check();
  return c;
}

inline nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["user_count"] = c.user_count;
  nlohmann::ordered_json mix = nlohmann::ordered_json::object();
  for (const auto& [label, w] : c.band_mix) mix[label] = w;
  j["band_mix"] = mix;
  j["follower_median"] = c.follower_median;
  j["follower_sigma"] = c.follower_sigma;
  j["engagement_base"] = c.engagement_base;
  j["appeal_sigma"] = c.appeal_sigma;
  j["signal_strength"] = c.signal_strength;
  j["weeks"] = c.weeks;
  j["retweet_ratio"] = c.retweet_ratio;
  j["overreach_fraction"] = c.overreach_fraction;
  j["retrieval_time"] = c.retrieval_time;
  return j;
}

namespace synth_detail {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Open interval (0, 1), safe for logarithms.
inline double uniform_open(std::mt19937_64& rng) {
  double u;
  do u = uniform01(rng);
  while (u == 0.0);
  return u;
}

inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = uniform_open(rng), u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Binomial(n, p) by geometric waiting times; expected cost O(n p + 1).
inline Count binomial_waiting(std::mt19937_64& rng, Count n, double p) {
  const double log_q = std::log1p(-p);
  Count successes = 0;
  double position = 0;
  for (;;) {
    position += std::floor(std::log(uniform_open(rng)) / log_q) + 1;
    if (position > static_cast<double>(n)) return successes;
    ++successes;
  }
}

// Inversion that visits k = mode, mode-1, mode+1, ... so the expected number
// of steps grows with the standard deviation instead of the mean.
inline Count binomial_from_mode(std::mt19937_64& rng, Count n, double p) {
  const double q = 1 - p, nd = static_cast<double>(n);
  const auto mode = static_cast<Count>(std::floor((nd + 1) * p));
  const double md = static_cast<double>(mode);
  const double pmf_mode = std::exp(std::lgamma(nd + 1) - std::lgamma(md + 1) - std::lgamma(nd - md + 1) +
                                   md * std::log(p) + (nd - md) * std::log1p(-p));
  double u = uniform01(rng) - pmf_mode;
  if (u < 0) return mode;
  Count lo = mode, hi = mode;
  double f_lo = pmf_mode, f_hi = pmf_mode;
  while (lo > 0 || hi < n) {
    if (lo > 0) {
      f_lo *= static_cast<double>(lo) / (nd - static_cast<double>(lo) + 1) * q / p;
      --lo;
      u -= f_lo;
      if (u < 0) return lo;
    }
    if (hi < n) {
      f_hi *= (nd - static_cast<double>(hi)) / static_cast<double>(hi + 1) * p / q;
      ++hi;
      u -= f_hi;
      if (u < 0) return hi;
    }
  }
  return mode;  // rounding left a sliver of mass unassigned
}

inline Count binomial(std::mt19937_64& rng, Count n, double p) {
  if (p <= 0 || n == 0) return 0;
  if (p >= 1) return n;
  return static_cast<double>(n) * p < 10 ? binomial_waiting(rng, n, p) : binomial_from_mode(rng, n, p);
}

// Range of weekly rates whose half-up rounding lands in `band`.
inline std::pair<double, double> rate_range(const FrequencyBand& band) {
  const double lo = band.lo == 0 ? 0.5 : static_cast<double>(band.lo) - 0.5;
  const double hi = band.hi == kOpenEnded ? 300.0 : static_cast<double>(band.hi) + 0.5;
  return {lo, hi};
}

struct GeneratedUser {
  UserProfile profile;
  std::vector<Tweet> tweets;
};

inline std::string user_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u%07zu", index);
  return buf;
}

inline GeneratedUser generate_user(const SynthConfig& c, std::size_t index, std::span<const double> cumulative,
                                   std::span<const FrequencyBand* const> bands) {
  std::seed_seq seq{static_cast<std::uint32_t>(c.seed), static_cast<std::uint32_t>(c.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t{index} >> 32)};
  std::mt19937_64 rng(seq);

  const double pick = uniform01(rng) * cumulative.back();
  std::size_t b = 0;
  while (b + 1 < cumulative.size() && pick >= cumulative[b]) ++b;
  const auto [rate_lo, rate_hi] = rate_range(*bands[b]);
  const double rate = rate_lo + (rate_hi - rate_lo) * uniform01(rng);

  const double followers_real = c.follower_median * std::exp(c.follower_sigma * standard_normal(rng));
  const Count followers = std::max<Count>(10, static_cast<Count>(std::llround(followers_real)));

  auto originals = std::max<std::size_t>(10, static_cast<std::size_t>(std::llround(rate * c.weeks)));
  auto retweets = static_cast<std::size_t>(std::llround(c.retweet_ratio * static_cast<double>(originals)));
  if (originals + retweets > kMaxTweetsPerUser) {
    const double scale = static_cast<double>(kMaxTweetsPerUser) / static_cast<double>(originals + retweets);
    originals = std::max<std::size_t>(10, static_cast<std::size_t>(std::floor(originals * scale)));
    retweets = std::min(kMaxTweetsPerUser - originals, static_cast<std::size_t>(std::floor(retweets * scale)));
  }

  // Evenly spaced originals whose span makes originals / span_weeks == rate.
  const Timestamp newest = c.retrieval_time - 4 * kSecondsPerDay;
  const auto span_s = static_cast<Timestamp>(std::llround(static_cast<double>(originals) / rate *
                                                          static_cast<double>(kSecondsPerWeek)));
  const Timestamp oldest = newest - span_s;
  const double step = static_cast<double>(span_s) / static_cast<double>(originals - 1);
  const double appeal = std::exp(c.appeal_sigma * standard_normal(rng));
  const double p = std::min(0.5, c.engagement_base * appeal / (1.0 + c.signal_strength * rate));

  GeneratedUser out;
  auto& u = out.profile;
  u.user_id = user_id_for(index);
  u.followers_count = followers;
  u.friends_count = static_cast<Count>(std::floor(uniform01(rng) * 5.0 * static_cast<double>(followers)));
  u.account_created_at = oldest - static_cast<Timestamp>((100 + uniform01(rng) * 3000) * kSecondsPerDay);
  u.last_tweet_at = newest;
  u.verified = false;

  out.tweets.reserve(originals + retweets);
  for (std::size_t i = 0; i < originals; ++i) {
    Tweet t;
    char id[48];
    std::snprintf(id, sizeof id, "%s-%04zu", u.user_id.c_str(), i);
    t.tweet_id = id;
    t.user_id = u.user_id;
    double at = static_cast<double>(oldest) + step * static_cast<double>(i);
    if (i > 0 && i + 1 < originals) at += (uniform01(rng) - 0.5) * 0.5 * step;
    t.created_at = static_cast<Timestamp>(std::llround(at));
    t.retweet_count = binomial(rng, followers, p);
    t.favourite_count = binomial(rng, followers, p);
    if (c.overreach_fraction > 0 && uniform01(rng) < c.overreach_fraction)
      t.retweet_count = followers + 1 + binomial(rng, followers, 0.1);
    out.tweets.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < retweets; ++i) {
    Tweet t;
    char id[48];
    std::snprintf(id, sizeof id, "%s-r%04zu", u.user_id.c_str(), i);
    t.tweet_id = id;
    t.user_id = u.user_id;
    t.created_at = oldest + static_cast<Timestamp>(uniform01(rng) * static_cast<double>(span_s));
    t.is_retweet = true;
    out.tweets.push_back(std::move(t));
  }
  u.statuses_count = out.tweets.size() + static_cast<Count>(uniform01(rng) * 2000);
  u.favourites_count = static_cast<Count>(uniform01(rng) * 5000);
  return out;
}

}  // namespace synth_detail

inline CorpusSnapshot generate_synthetic_corpus(const SynthConfig& config, unsigned threads = 1) {
  config.check();
  std::vector<double> cumulative;
  std::vector<const FrequencyBand*> bands;
  double total = 0;
  for (const auto& [label, w] : config.band_mix) {
    if (w <= 0) continue;
    total += w;
    cumulative.push_back(total);
    bands.push_back(&band_from_label(label));
  }
  std::vector<synth_detail::GeneratedUser> users(config.user_count);
  detail::parallel_for(config.user_count, threads, [&](std::size_t i) {
    users[i] = synth_detail::generate_user(config, i, cumulative, bands);
  });

  CorpusSnapshot snap;
  snap.retrieval_time = config.retrieval_time;
  snap.metadata["generator"] = "lowfreq-synth";
  snap.metadata["seed"] = std::to_string(config.seed);
  snap.metadata["config"] = to_json(config).dump();
  std::size_t total_tweets = 0;
  for (const auto& u : users) total_tweets += u.tweets.size();
  snap.users.reserve(users.size());
  snap.tweets.reserve(total_tweets);
  for (auto& u : users) {
    snap.users.push_back(std::move(u.profile));
    for (auto& t : u.tweets) snap.tweets.push_back(std::move(t));
  }
  return snap;
}

}  // namespace lowfreq

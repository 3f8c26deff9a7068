#pragma once

// Two-phase pseudo-random user selection: short capture windows repeated
// over a stream, then a seeded draw of the final sample.
//
// Randomness comes from std::mt19937_64 (its output sequence is fixed by
// the standard) with a rejection-based bounded draw, so samples are
// reproducible across platforms for a given seed.

#include <cstdint>
#include <limits>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "screening.hpp"

namespace lowfreq {

inline constexpr std::string_view kSamplerPrng = "mt19937_64+rejection";

struct StreamEvent {
  Timestamp timestamp = 0;
  std::string user_id;
};

struct SamplingPlan {
  Timestamp stream_start = 0;
  Timestamp window_length_s = 600;
  Timestamp period_s = 3600;
  Timestamp duration_s = kSecondsPerWeek;
  std::size_t target_size = 5200;
  std::uint64_t seed = 0;

  std::int64_t window_count() const { return duration_s / period_s; }

  void check() const {
    if (window_length_s <= 0 || period_s <= 0 || duration_s <= 0)
      throw DomainError("sampling plan lengths must be positive");
    if (window_length_s > period_s) throw DomainError("capture window longer than its period");
    if (duration_s % period_s != 0) throw DomainError("sampling duration must be a multiple of the period");
  }
};

// Users seen inside any half-open capture window
// [start + k*period, start + k*period + window) that pass screening,
// deduplicated in first-seen order.
inline std::vector<std::string> simulate_window_sampling(std::span<const StreamEvent> stream, const SamplingPlan& plan,
                                                         const std::map<std::string, ScreeningVerdict>& verdicts) {
  plan.check();
  for (std::size_t i = 1; i < stream.size(); ++i)
    if (stream[i].timestamp < stream[i - 1].timestamp)
      throw DomainError("stream is not sorted by timestamp at event " + std::to_string(i + 1));
  std::vector<std::string> sample;
  std::unordered_set<std::string> seen;
  const Timestamp end = plan.stream_start + plan.duration_s;
  for (const auto& e : stream) {
    if (e.timestamp < plan.stream_start || e.timestamp >= end) continue;
    if ((e.timestamp - plan.stream_start) % plan.period_s >= plan.window_length_s) continue;
    if (seen.count(e.user_id)) continue;
    auto v = verdicts.find(e.user_id);
    if (v == verdicts.end()) throw DomainError("no screening verdict for streamed user " + e.user_id);
    if (!v->second.passed()) continue;
    seen.insert(e.user_id);
    sample.push_back(e.user_id);
  }
  return sample;
}

namespace detail {

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % bound;
}

}  // namespace detail

// min(M, N) distinct members of `initial`, chosen by a seeded partial
// Fisher-Yates shuffle, in draw order.
inline std::vector<std::string> draw_final_sample(std::span<const std::string> initial, std::size_t target,
                                                  std::uint64_t seed) {
  const std::size_t n = initial.size();
  if (target >= n) return {initial.begin(), initial.end()};
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(target);
  for (std::size_t i = 0; i < target; ++i) {
    const auto j = i + static_cast<std::size_t>(detail::bounded_draw(rng, n - i));
    std::swap(idx[i], idx[j]);
    out.push_back(initial[idx[i]]);
  }
  return out;
}

inline std::vector<StreamEvent> load_stream(std::istream& in) {
  std::vector<StreamEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not a JSON object");
    StreamEvent e;
    e.timestamp = detail::read_time(detail::require(j, "timestamp", line_no), "timestamp", line_no);
    e.user_id = detail::read_id(j, "user_id", line_no);
    out.push_back(std::move(e));
  }
  return out;
}

inline void write_stream(std::ostream& os, std::span<const StreamEvent> stream) {
  for (const auto& e : stream) {
    nlohmann::ordered_json j;
    j["timestamp"] = e.timestamp;
    j["user_id"] = e.user_id;
    os << j.dump() << '\n';
  }
}

// Metadata lines start with '#'; then one user_id per line.
inline void write_sample(std::ostream& os, const SamplingPlan& plan, std::size_t initial_size,
                         std::span<const std::string> sample) {
  os << "# prng=" << kSamplerPrng << " seed=" << plan.seed << '\n'
     << "# stream_start=" << plan.stream_start << " window_length_s=" << plan.window_length_s
     << " period_s=" << plan.period_s << " duration_s=" << plan.duration_s << " windows=" << plan.window_count()
     << '\n'
     << "# initial_size=" << initial_size << " target_size=" << plan.target_size << " final_size=" << sample.size()
     << '\n';
  for (const auto& id : sample) os << id << '\n';
}

}  // namespace lowfreq

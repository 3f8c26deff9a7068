#pragma once

// Top-performer groups, band distributions, significance reports and
// timeline reordering by author importance.

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "csv.hpp"
#include "stats.hpp"
#include "user_metrics.hpp"

namespace lowfreq {

enum class UserMetric { AvgTS, PrST, AvgAudInpW, AvgTSPc };

inline constexpr std::array kImportanceMetrics = {UserMetric::AvgTS, UserMetric::PrST, UserMetric::AvgAudInpW,
                                                  UserMetric::AvgTSPc};

inline std::string_view to_string(UserMetric m) {
  switch (m) {
    case UserMetric::AvgTS: return "AvgTS";
    case UserMetric::PrST: return "prST";
    case UserMetric::AvgAudInpW: return "AvgAudInpW";
    case UserMetric::AvgTSPc: return "AvgTSPc";
  }
  return "unknown";
}

inline UserMetric user_metric_from_string(std::string_view s) {
  for (auto m : kImportanceMetrics)
    if (to_string(m) == s) return m;
  throw DomainError("unknown metric '" + std::string(s) + "' (expected AvgTS, prST, AvgAudInpW or AvgTSPc)");
}

inline double metric_value(const UserMetrics& m, UserMetric which) {
  switch (which) {
    case UserMetric::AvgTS: return m.avg_ts;
    case UserMetric::PrST: return m.pr_st;
    case UserMetric::AvgAudInpW: return m.avg_aud_inpw;
    case UserMetric::AvgTSPc: return m.avg_tspc;
  }
  return 0;
}

struct TopPerformerGroup {
  UserMetric metric = UserMetric::AvgTS;
  double pct = 90;
  double threshold = 0;
  std::set<std::string> members;
};

// Users at or above the nearest-rank percentile of `metric`; ties at the
// threshold are all included.
inline TopPerformerGroup top_performer_group(std::span<const UserMetrics> metrics, UserMetric metric, double pct) {
  if (metrics.empty()) throw DomainError("empty metrics: no users to rank");
  std::vector<double> values;
  values.reserve(metrics.size());
  for (const auto& m : metrics) values.push_back(metric_value(m, metric));
  TopPerformerGroup g{metric, pct, stats::nearest_rank_percentile(values, pct), {}};
  for (const auto& m : metrics)
    if (metric_value(m, metric) >= g.threshold) g.members.insert(m.user_id);
  return g;
}

// Share (percent) of the group per band, listed for every band in table
// order including empty ones.
using BandDistribution = std::vector<std::pair<FrequencyBand, double>>;

inline BandDistribution band_distribution(const std::set<std::string>& group, std::span<const UserMetrics> metrics) {
  if (group.empty()) throw DomainError("band distribution of an empty group");
  std::unordered_map<std::string_view, const UserMetrics*> index;
  for (const auto& m : metrics) index.emplace(m.user_id, &m);
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& id : group) {
    auto it = index.find(id);
    if (it == index.end()) throw DomainError("group member " + id + " has no metrics");
    ++counts[it->second->band.lo];
  }
  BandDistribution out;
  const double n = static_cast<double>(group.size());
  for (const auto& b : kFrequencyBands) out.emplace_back(b, 100.0 * static_cast<double>(counts[b.lo]) / n);
  return out;
}

inline std::set<std::string> all_users(std::span<const UserMetrics> metrics) {
  std::set<std::string> ids;
  for (const auto& m : metrics) ids.insert(m.user_id);
  return ids;
}

// Combined share of the bands whose lower bound is below `lo_limit`.
inline double share_below(const BandDistribution& dist, std::int64_t lo_limit) {
  double s = 0;
  for (const auto& [band, share] : dist)
    if (band.lo < lo_limit) s += share;
  return s;
}

inline void write_band_distribution_csv(std::ostream& os, const BandDistribution& dist) {
  csv::write_row(os, {"band", "share_percent"});
  for (const auto& [band, share] : dist) csv::write_row(os, {std::string(band.label), csv::format_real(share)});
}

inline std::vector<double> frequencies_of(const std::set<std::string>& ids, std::span<const UserMetrics> metrics) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& m : metrics)
    if (ids.count(m.user_id)) out.push_back(m.avg_or_tpw);
  if (out.size() != ids.size()) throw DomainError("group member without metrics in the supplied population");
  return out;
}

struct SignificanceReport {
  double alpha = 0.05;
  std::size_t group_size = 0;
  double group_mean = 0;
  double population_mean = 0;
  stats::TTestResult one_sample;
  std::optional<stats::TTestResult> welch;
  std::size_t comparison_size = 0;
  double comparison_mean = 0;

  bool one_sample_rejected() const { return one_sample.rejects(alpha); }
  bool welch_rejected() const { return welch && welch->rejects(alpha); }
};

// A second top-performer group together with the metrics it was drawn from
// (for example the summative corpus).
struct ComparisonGroup {
  std::span<const UserMetrics> population;
  const TopPerformerGroup* group = nullptr;
};

// Tests whether the group's AvgOrTpW is lower than the population mean
// (one-sample) and, when a comparison group is given, lower than that
// group's (Welch).
inline SignificanceReport significance_report(std::span<const UserMetrics> population,
                                              const TopPerformerGroup& group_a,
                                              std::optional<ComparisonGroup> group_b = std::nullopt,
                                              double alpha = 0.05,
                                              stats::Alternative alt = stats::Alternative::Less) {
  if (population.empty()) throw DomainError("empty metrics: no population to test against");
  if (group_a.members.size() < 2) throw DomainError("significance test needs a group of at least 2 users");
  SignificanceReport r;
  r.alpha = alpha;
  const auto a = frequencies_of(group_a.members, population);
  std::vector<double> all;
  for (const auto& m : population) all.push_back(m.avg_or_tpw);
  r.group_size = a.size();
  r.group_mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  r.population_mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
  r.one_sample = stats::one_sample_t_test(a, r.population_mean, alt);
  if (group_b) {
    if (!group_b->group || group_b->group->members.size() < 2)
      throw DomainError("comparison group needs at least 2 users");
    const auto b = frequencies_of(group_b->group->members, group_b->population);
    r.comparison_size = b.size();
    r.comparison_mean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    r.welch = stats::welch_t_test(a, b, alt);
  }
  return r;
}

inline nlohmann::ordered_json to_json(const stats::TTestResult& r, double alpha) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["df"] = r.df;
  j["p"] = r.p;
  j["alternative"] = std::string(stats::to_string(r.alternative));
  j["rejected"] = r.rejects(alpha);
  return j;
}

// `t,df,p,alternative` line for one test.
inline std::string summary_line(const stats::TTestResult& r) {
  return csv::format_real(r.t) + "," + csv::format_real(r.df) + "," + csv::format_real(r.p) + "," +
         std::string(stats::to_string(r.alternative));
}

// Stable ordering: author metric descending, then newest first.
inline std::vector<Tweet> reorder_timeline(std::span<const Tweet> tweets, std::span<const UserMetrics> metrics,
                                           UserMetric key = UserMetric::AvgTSPc) {
  std::unordered_map<std::string_view, double> score;
  for (const auto& m : metrics) score.emplace(m.user_id, metric_value(m, key));
  std::set<std::string> missing;
  for (const auto& t : tweets)
    if (!score.count(t.user_id)) missing.insert(t.user_id);
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw DomainError("no metrics for tweet authors: " + list);
  }
  std::vector<Tweet> out(tweets.begin(), tweets.end());
  std::stable_sort(out.begin(), out.end(), [&](const Tweet& a, const Tweet& b) {
    const double sa = score.at(a.user_id), sb = score.at(b.user_id);
    if (sa != sb) return sa > sb;
    return a.created_at > b.created_at;
  });
  return out;
}

}  // namespace lowfreq

#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowfreq/lowfreq.hpp"

namespace lowfreq::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string input;
  std::string output;
  bool force = false;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  int hours = 72;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file " + path);
  return in;
}

// Writes `content` to `path`, or to `out` when no path was given.
void emit(const std::string& path, const std::string& content, bool force, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  if (fs::exists(path) && !force) throw std::runtime_error("refusing to overwrite " + path + " (pass --force)");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open output file " + path);
  os << content;
  if (!os) throw std::runtime_error("failed writing " + path);
}

CorpusSnapshot load_with_cutoff(const Common& c) {
  auto snap = load_corpus_snapshot(c.input);
  if (c.hours < 0) throw UsageError("--hours must be >= 0");
  return c.hours > 0 ? apply_recency_cutoff(snap, c.hours) : snap;
}

std::unordered_set<std::string> passing_users(const CorpusSnapshot& snap) {
  std::unordered_set<std::string> ids;
  for (const auto& [id, v] : screen_corpus(snap))
    if (v.passed()) ids.insert(id);
  return ids;
}

std::vector<TweetScore> score_snapshot(const CorpusSnapshot& snap, bool all_users, unsigned threads) {
  if (all_users) return score_corpus(snap, threads);
  const auto eligible = passing_users(snap);
  return score_corpus(snap, threads, &eligible);
}

std::vector<UserMetrics> load_metrics(const std::string& path) {
  auto in = open_input(path);
  return read_user_metrics_csv(in);
}

std::string group_file_name(UserMetric m, double pct) {
  return "bands_" + std::string(to_string(m)) + "_p" + csv::format_real(pct) + ".csv";
}

std::string render(const BandDistribution& d) {
  std::ostringstream os;
  write_band_distribution_csv(os, d);
  return os.str();
}

nlohmann::ordered_json distribution_json(const BandDistribution& d) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [band, share] : d) j[std::string(band.label)] = share;
  return j;
}

void add_common_io(CLI::App* sub, Common& c, bool output_required = false) {
  sub->add_option("--input", c.input, "Input file")->required();
  auto* o = sub->add_option("--output", c.output, "Output file (stdout when omitted)");
  if (output_required) o->required();
  sub->add_flag("--force", c.force, "Overwrite existing output files");
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tweet importance scoring and tweet-frequency analysis", "lowfreq"};
  app.require_subcommand(1);
  std::function<void()> action;
  Common c;

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check corpus integrity");
  validate_cmd->add_option("--input", c.input, "Corpus file")->required();
  validate_cmd->callback([&] {
    action = [&] {
      const auto snap = load_corpus_snapshot(c.input);
      std::size_t originals = 0;
      for (const auto& t : snap.tweets) originals += !t.is_retweet;
      out << "ok: " << snap.users.size() << " users, " << snap.tweets.size() << " tweets (" << originals
          << " original), retrieval_time " << snap.retrieval_time << '\n';
    };
  });

  // screen
  auto* screen_cmd = app.add_subcommand("screen", "Emit screening verdicts as CSV");
  add_common_io(screen_cmd, c);
  screen_cmd->add_option("--hours", c.hours, "Recency cutoff in hours (0 disables)")->capture_default_str();
  screen_cmd->callback([&] {
    action = [&] {
      const auto snap = load_with_cutoff(c);
      std::ostringstream os;
      write_verdicts_csv(os, screen_corpus(snap));
      emit(c.output, os.str(), c.force, out);
    };
  });

  // score
  bool include_all_users = false;
  auto* score_cmd = app.add_subcommand("score", "Emit per-tweet TS and TSPc as CSV");
  add_common_io(score_cmd, c);
  score_cmd->add_option("--hours", c.hours, "Recency cutoff in hours (0 disables)")->capture_default_str();
  score_cmd->add_flag("--all-users", include_all_users, "Score every user, not only those passing screening");
  score_cmd->add_option("--threads", c.threads, "Worker threads");
  score_cmd->callback([&] {
    action = [&] {
      const auto snap = load_with_cutoff(c);
      std::ostringstream os;
      write_scores_csv(os, score_snapshot(snap, include_all_users, c.threads));
      emit(c.output, os.str(), c.force, out);
    };
  });

  // user-metrics
  std::string scores_path;
  auto* um_cmd = app.add_subcommand("user-metrics", "Emit per-user metrics as CSV");
  add_common_io(um_cmd, c);
  um_cmd->add_option("--scores", scores_path, "Per-tweet score CSV from `score` (recomputed when omitted)");
  um_cmd->add_option("--hours", c.hours, "Recency cutoff in hours (0 disables)")->capture_default_str();
  um_cmd->add_flag("--all-users", include_all_users, "Include users failing screening");
  um_cmd->add_option("--threads", c.threads, "Worker threads");
  um_cmd->callback([&] {
    action = [&] {
      const auto snap = load_with_cutoff(c);
      std::vector<TweetScore> scores;
      if (scores_path.empty()) {
        scores = score_snapshot(snap, include_all_users, c.threads);
      } else {
        auto in = open_input(scores_path);
        scores = read_scores_csv(in);
      }
      std::ostringstream os;
      write_user_metrics_csv(os, compute_corpus_user_metrics(snap, scores, c.threads));
      emit(c.output, os.str(), c.force, out);
    };
  });

  // analyze
  std::vector<double> pcts{75, 90};
  std::vector<std::string> metric_names;
  double alpha = 0.05;
  std::string alternative = "less";
  auto* analyze_cmd = app.add_subcommand("analyze", "Top-performer groups, band distributions, one-sample tests");
  analyze_cmd->add_option("--input", c.input, "User metrics CSV")->required();
  analyze_cmd->add_option("--output", c.output, "Output directory")->required();
  analyze_cmd->add_flag("--force", c.force, "Overwrite existing output files");
  analyze_cmd->add_option("--pct", pcts, "Percentile thresholds")->capture_default_str();
  analyze_cmd->add_option("--metric", metric_names, "Metrics to rank by (default: all four)");
  analyze_cmd->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  analyze_cmd->add_option("--alternative", alternative, "less | greater | two-sided")->capture_default_str();
  analyze_cmd->callback([&] {
    action = [&] {
      const auto metrics = load_metrics(c.input);
      if (metrics.empty()) throw DomainError("empty metrics: " + c.input + " has no user rows");
      const auto alt = stats::alternative_from_string(alternative);
      std::vector<UserMetric> which;
      for (const auto& name : metric_names) which.push_back(user_metric_from_string(name));
      if (which.empty()) which.assign(kImportanceMetrics.begin(), kImportanceMetrics.end());

      std::vector<std::pair<std::string, std::string>> files;
      const auto base = band_distribution(all_users(metrics), metrics);
      files.emplace_back("bands_base.csv", render(base));

      nlohmann::ordered_json report;
      report["input"] = c.input;
      report["users"] = metrics.size();
      report["alpha"] = alpha;
      report["base_distribution"] = distribution_json(base);
      report["base_share_below_10"] = share_below(base, 10);
      report["groups"] = nlohmann::ordered_json::array();
      std::ostringstream groups_csv;
      csv::write_row(groups_csv, {"metric", "pct", "threshold", "user_id"});
      for (auto m : which) {
        for (double pct : pcts) {
          const auto group = top_performer_group(metrics, m, pct);
          const auto dist = band_distribution(group.members, metrics);
          files.emplace_back(group_file_name(m, pct), render(dist));
          for (const auto& id : group.members)
            csv::write_row(groups_csv, {std::string(to_string(m)), csv::format_real(pct),
                                        csv::format_real(group.threshold), id});
          nlohmann::ordered_json g;
          g["metric"] = std::string(to_string(m));
          g["pct"] = pct;
          g["threshold"] = group.threshold;
          g["size"] = group.members.size();
          g["share_below_10"] = share_below(dist, 10);
          g["distribution"] = distribution_json(dist);
          if (group.members.size() >= 2) {
            const auto sig = significance_report(metrics, group, std::nullopt, alpha, alt);
            g["group_mean_AvgOrTpW"] = sig.group_mean;
            g["population_mean_AvgOrTpW"] = sig.population_mean;
            g["one_sample"] = to_json(sig.one_sample, alpha);
            g["one_sample_summary"] = summary_line(sig.one_sample);
          } else {
            g["one_sample"] = nullptr;
            g["note"] = "group smaller than 2 users; no test";
          }
          report["groups"].push_back(std::move(g));
        }
      }
      files.emplace_back("groups.csv", groups_csv.str());
      files.emplace_back("report.json", report.dump(2) + "\n");

      fs::create_directories(c.output);
      if (!c.force)
        for (const auto& [name, _] : files)
          if (fs::exists(fs::path(c.output) / name))
            throw std::runtime_error("refusing to overwrite " + (fs::path(c.output) / name).string() +
                                     " (pass --force)");
      for (const auto& [name, content] : files) emit((fs::path(c.output) / name).string(), content, true, out);
      out << "wrote " << files.size() << " files to " << c.output << '\n';
    };
  });

  // compare
  std::string against;
  std::string compare_metric = "AvgTS";
  double compare_pct = 75;
  auto* compare_cmd = app.add_subcommand("compare", "Welch test between top groups of two metric files");
  add_common_io(compare_cmd, c);
  compare_cmd->add_option("--against", against, "Second user metrics CSV (e.g. summative)")->required();
  compare_cmd->add_option("--metric", compare_metric, "Metric defining the top group")->capture_default_str();
  compare_cmd->add_option("--pct", compare_pct, "Percentile threshold")->capture_default_str();
  compare_cmd->add_option("--alpha", alpha, "Significance level")->capture_default_str();
  compare_cmd->add_option("--alternative", alternative, "less | greater | two-sided")->capture_default_str();
  compare_cmd->callback([&] {
    action = [&] {
      const auto a = load_metrics(c.input);
      const auto b = load_metrics(against);
      if (a.empty() || b.empty()) throw DomainError("empty metrics: both inputs need user rows");
      const auto metric = user_metric_from_string(compare_metric);
      const auto alt = stats::alternative_from_string(alternative);
      const auto ga = top_performer_group(a, metric, compare_pct);
      const auto gb = top_performer_group(b, metric, compare_pct);
      const auto sig = significance_report(a, ga, ComparisonGroup{b, &gb}, alpha, alt);
      nlohmann::ordered_json report;
      report["metric"] = compare_metric;
      report["pct"] = compare_pct;
      report["alpha"] = alpha;
      report["group_a"] = {{"input", c.input}, {"threshold", ga.threshold}, {"size", sig.group_size},
                           {"mean_AvgOrTpW", sig.group_mean}};
      report["group_b"] = {{"input", against}, {"threshold", gb.threshold}, {"size", sig.comparison_size},
                           {"mean_AvgOrTpW", sig.comparison_mean}};
      report["welch"] = to_json(*sig.welch, alpha);
      report["welch_summary"] = summary_line(*sig.welch);
      report["one_sample_a"] = to_json(sig.one_sample, alpha);
      emit(c.output, report.dump(2) + "\n", c.force, out);
    };
  });

  // sample-size
  std::optional<int> confidence;
  std::optional<double> z;
  double interval = 0;
  double p_hat = 0.5;
  std::optional<double> population;
  auto* ss_cmd = app.add_subcommand("sample-size", "Required sample size for a proportion");
  auto* conf_opt = ss_cmd->add_option("--confidence", confidence, "Confidence level percent (90, 95, 99)");
  ss_cmd->add_option("--z", z, "Critical value (instead of --confidence)")->excludes(conf_opt);
  ss_cmd->add_option("--interval", interval, "Confidence interval (margin) in percent")->required();
  ss_cmd->add_option("--p-hat", p_hat, "Expected proportion")->capture_default_str();
  ss_cmd->add_option("--population", population, "Population size (enables finite-population correction)");
  ss_cmd->callback([&] {
    action = [&] {
      stats::SampleSizeParams p;
      if (z)
        p.z = *z;
      else if (confidence)
        p.z = stats::z_for_confidence(*confidence);
      else
        throw UsageError("sample-size needs --confidence or --z");
      p.margin = interval / 100.0;
      p.p_hat = p_hat;
      p.population = population;
      out << stats::required_sample_size(p) << '\n';
    };
  });

  // simulate-sample
  std::string verdicts_path;
  SamplingPlan plan;
  std::optional<Timestamp> stream_start;
  auto* sim_cmd = app.add_subcommand("simulate-sample", "Windowed stream sampling then a seeded final draw");
  add_common_io(sim_cmd, c);
  sim_cmd->add_option("--verdicts", verdicts_path, "Screening verdict CSV from `screen`")->required();
  sim_cmd->add_option("--seed", plan.seed, "PRNG seed")->capture_default_str();
  sim_cmd->add_option("--target", plan.target_size, "Final sample size")->capture_default_str();
  sim_cmd->add_option("--start", stream_start, "Stream start (epoch seconds; default first event)");
  sim_cmd->add_option("--window", plan.window_length_s, "Capture window seconds")->capture_default_str();
  sim_cmd->add_option("--period", plan.period_s, "Capture period seconds")->capture_default_str();
  sim_cmd->add_option("--duration", plan.duration_s, "Sampling duration seconds")->capture_default_str();
  sim_cmd->callback([&] {
    action = [&] {
      auto in = open_input(c.input);
      const auto stream = load_stream(in);
      auto vin = open_input(verdicts_path);
      const auto verdicts = read_verdicts_csv(vin);
      plan.stream_start = stream_start ? *stream_start : (stream.empty() ? 0 : stream.front().timestamp);
      const auto initial = simulate_window_sampling(stream, plan, verdicts);
      const auto final_sample = draw_final_sample(initial, plan.target_size, plan.seed);
      std::ostringstream os;
      write_sample(os, plan, initial.size(), final_sample);
      emit(c.output, os.str(), c.force, out);
    };
  });

  // synth
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> users;
  std::optional<double> signal;
  std::optional<int> weeks;
  std::optional<double> overreach;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  synth_cmd->add_option("--config", config_path, "JSON config file");
  synth_cmd->add_option("--output", c.output, "Corpus output file (stdout when omitted)");
  synth_cmd->add_flag("--force", c.force, "Overwrite existing output files");
  synth_cmd->add_option("--seed", seed, "Seed (overrides config)");
  synth_cmd->add_option("--users", users, "User count (overrides config)");
  synth_cmd->add_option("--signal", signal, "Planted signal strength (overrides config)");
  synth_cmd->add_option("--weeks", weeks, "Corpus span in weeks (overrides config)");
  synth_cmd->add_option("--overreach", overreach, "Share of over-reach tweets (overrides config)");
  synth_cmd->add_option("--threads", c.threads, "Worker threads");
  synth_cmd->callback([&] {
    action = [&] {
      SynthConfig cfg;
      if (!config_path.empty()) {
        auto in = open_input(config_path);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError(0, config_path + ": " + e.what());
        }
        cfg = synth_config_from_json(j);
      }
      if (seed) cfg.seed = *seed;
      if (users) cfg.user_count = *users;
      if (signal) cfg.signal_strength = *signal;
      if (weeks) cfg.weeks = *weeks;
      if (overreach) cfg.overreach_fraction = *overreach;
      std::ostringstream os;
      save_corpus_snapshot(generate_synthetic_corpus(cfg, c.threads), os);
      emit(c.output, os.str(), c.force, out);
    };
  });

  // reorder
  std::string metrics_path;
  std::string reorder_metric = "AvgTSPc";
  auto* reorder_cmd = app.add_subcommand("reorder", "Reorder tweets by author importance");
  add_common_io(reorder_cmd, c);
  reorder_cmd->add_option("--metrics", metrics_path, "User metrics CSV")->required();
  reorder_cmd->add_option("--metric", reorder_metric, "Author metric to order by")->capture_default_str();
  reorder_cmd->callback([&] {
    action = [&] {
      const auto snap = load_corpus_snapshot(c.input);
      const auto metrics = load_metrics(metrics_path);
      const auto ordered = reorder_timeline(snap.tweets, metrics, user_metric_from_string(reorder_metric));
      std::ostringstream os;
      write_tweet_records(os, ordered);
      emit(c.output, os.str(), c.force, out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    action();
  } catch (const UsageError& e) {
    err << "lowfreq: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "lowfreq: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

}  // namespace lowfreq::cli

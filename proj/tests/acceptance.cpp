// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "lowfreq/lowfreq.hpp"

using namespace lowfreq;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  " << id << "  " << name << ": " << detail << std::endl;
  failures += !ok;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LOWFREQ_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

// ---------------------------------------------------------------------------

void criterion_1() {
  const auto n = stats::required_sample_size({2.58, 0.018, 0.5, 17'000'000.0});
  const auto n_inf = stats::required_sample_size({2.58, 0.018, 0.5, std::nullopt});
  report(1, "sample size", n == 5135,
         "z=2.58 e=0.018 p=0.5 N=17e6 -> " + std::to_string(n) + " (want 5135; without N: " + std::to_string(n_inf) +
             ")");
}

void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20230101);
  std::vector<Tweet> tweets;
  std::vector<Count> followers;
  for (int i = 0; i < 1000; ++i) {
    const Count f = 10 + rng() % 9991;
    Tweet t;
    t.tweet_id = "t" + std::to_string(i);
    t.user_id = "u";
    t.retweet_count = rng() % (2 * f + 1);
    t.favourite_count = rng() % (2 * f + 1);
    if (i % 3 == 0) t.comment_count = rng() % (2 * f + 1);
    if (i % 5 == 0) t.quote_count = rng() % (f / 4 + 1);
    if (i % 7 == 0) t.bookmark_count = rng() % (f / 4 + 1);
    if (i % 50 == 0) t.retweet_count = t.favourite_count = 0, t.comment_count = t.quote_count = t.bookmark_count = 0;
    if (i % 97 == 0) t.retweet_count = f + 1 + rng() % f;
    tweets.push_back(t);
    followers.push_back(f);
  }

  double worst_ts = 0;
  std::vector<TweetScore> scores;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    const auto& t = tweets[i];
    const double f = static_cast<double>(followers[i]);
    double direct = 0;
    bool capped = false, any = false;
    for (Count c : {t.retweet_count, t.favourite_count, t.comments(), t.quotes(), t.bookmarks()}) {
      const double pct = 100.0 * static_cast<double>(c) / f;
      direct += static_cast<double>(c) * pct;
      capped |= pct > 100;
      any |= c > 0;
    }
    auto s = compute_tweet_score(t, followers[i]);
    worst_ts = std::max(worst_ts, std::fabs(s.ts - direct) / std::max(1.0, direct));
    if (s.over_reach != capped || s.zero_engagement != !any) worst_ts = 1;
    scores.push_back(s);
  }
  const auto ranked = compute_percentiles(scores);

  double worst_pc = 0;
  bool caps_ok = true;
  std::size_t pool = 0, n_capped = 0, n_zero = 0;
  for (const auto& s : scores) pool += s.pooled();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double expect;
    if (scores[i].over_reach) {
      expect = 100, ++n_capped;
      caps_ok &= *ranked[i].tspc == 100.0;
    } else if (scores[i].zero_engagement) {
      expect = 0, ++n_zero;
      caps_ok &= *ranked[i].tspc == 0.0;
    } else {
      std::size_t below = 0;
      for (const auto& o : scores) below += o.pooled() && o.ts < scores[i].ts;
      expect = 100.0 * static_cast<double>(below) / static_cast<double>(pool);
    }
    worst_pc = std::max(worst_pc, std::fabs(*ranked[i].tspc - expect));
  }
  const double secs = seconds_since(t0);
  report(2, "TS/TSPc oracle", worst_ts <= 1e-9 && worst_pc <= 1e-9 && caps_ok && n_capped > 0 && n_zero > 0 && secs < 5,
         "max rel TS err " + fmt(worst_ts) + ", max TSPc err " + fmt(worst_pc) + " (tol 1e-9); " +
             std::to_string(n_capped) + " over-reach -> 100, " + std::to_string(n_zero) + " zero -> 0; " + fmt(secs) +
             " s (limit 5)");
}

void criterion_3() {
  double worst_sym = 0;
  bool centre = true;
  for (double df : {1.0, 2.0, 5.0, 30.0, 1000.0}) {
    centre &= stats::student_t_cdf(0, df) == 0.5;
    for (double t = -10; t <= 10; t += 0.05)
      worst_sym = std::max(worst_sym, std::fabs(stats::student_t_cdf(t, df) + stats::student_t_cdf(-t, df) - 1));
  }
  const auto one = stats::one_sample_t_test(std::vector{1.0, 2.0, 3.0}, 4, stats::Alternative::Less);
  const double t_exp = -2 * std::sqrt(3.0);
  const double p_closed = 0.5 + t_exp / (2 * std::sqrt(t_exp * t_exp + 2));  // df = 2
  const auto welch =
      stats::welch_t_test(std::vector{1.0, 2.0, 3.0, 4.0}, std::vector{2.0, 4.0, 6.0, 8.0}, stats::Alternative::Less);
  const double welch_df = 75.0 / 17.0;
  const double welch_p =
      boost::math::cdf(boost::math::students_t_distribution<double>(welch_df), -std::sqrt(3.0));
  const bool ok = centre && worst_sym <= 1e-9 && std::fabs(one.t - t_exp) <= 1e-4 && std::fabs(one.p - p_closed) <= 1e-3 &&
                  std::fabs(welch.t + std::sqrt(3.0)) <= 1e-3 && std::fabs(welch.df - welch_df) <= 1e-3 &&
                  std::fabs(welch.p - welch_p) <= 1e-3;
  report(3, "Student-t", ok,
         "F(0)=0.5 " + std::string(centre ? "yes" : "no") + ", max |F(t)+F(-t)-1| " + fmt(worst_sym) +
             " (tol 1e-9); one-sample t=" + fmt(one.t) + " p=" + fmt(one.p) + " (want -3.4641, " + fmt(p_closed) +
             "); Welch t=" + fmt(welch.t) + " df=" + fmt(welch.df) + " p=" + fmt(welch.p) + " (want -1.73205, " +
             fmt(welch_df) + ", " + fmt(welch_p) + ")");
}

std::vector<UserMetrics> synth_metrics(std::uint64_t seed, double signal) {
  SynthConfig c;
  c.seed = seed;
  c.user_count = 5000;
  c.signal_strength = signal;
  const auto snap = generate_synthetic_corpus(c, threads());
  return compute_corpus_user_metrics(snap, score_corpus(snap, threads()), threads());
}

constexpr std::array kSignalMetrics = {UserMetric::PrST, UserMetric::AvgAudInpW, UserMetric::AvgTSPc};

void criteria_4_and_5() {
  const auto t0 = std::chrono::steady_clock::now();
  const double signal = 0.1;
  const auto planted = synth_metrics(1, signal);
  const double base = share_below(band_distribution(all_users(planted), planted), 10);
  bool recovered = true;
  std::string detail = "signal " + fmt(signal) + ", base share(lo<10) " + fmt(base) + "%;";
  for (auto m : kSignalMetrics) {
    const auto g = top_performer_group(planted, m, 90);
    const double share = share_below(band_distribution(g.members, planted), 10);
    const auto r = significance_report(planted, g);
    recovered &= share > base && r.one_sample.p < 0.05;
    detail += " " + std::string(to_string(m)) + " " + fmt(share) + "% p=" + fmt(r.one_sample.p) + ";";
  }

  // Null arm: seeds 1..20, signal off.
  std::vector<std::vector<UserMetrics>> null_runs;
  std::array<int, kSignalMetrics.size()> rejections{};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    null_runs.push_back(synth_metrics(seed, 0));
    const auto& ms = null_runs.back();
    for (std::size_t k = 0; k < kSignalMetrics.size(); ++k)
      rejections[k] += significance_report(ms, top_performer_group(ms, kSignalMetrics[k], 90)).one_sample_rejected();
  }
  bool null_ok = true;
  detail += " null rejections/20:";
  for (std::size_t k = 0; k < kSignalMetrics.size(); ++k) {
    null_ok &= rejections[k] <= 2;
    detail += " " + std::string(to_string(kSignalMetrics[k])) + " " + std::to_string(rejections[k]);
  }
  const double secs = seconds_since(t0);
  detail += " (limit 2 each); " + fmt(secs) + " s (limit 60)";
  report(4, "planted signal", recovered && null_ok && secs < 60, detail);

  // Pairs (k, k+20): reuse seeds 1..20 from the null arm, generate 21..40.
  int not_rejected = 0;
  for (std::uint64_t k = 1; k <= 20; ++k) {
    const auto other = synth_metrics(k + 20, 0);
    const auto& first = null_runs[k - 1];
    const auto ga = top_performer_group(first, UserMetric::AvgTS, 75);
    const auto gb = top_performer_group(other, UserMetric::AvgTS, 75);
    const auto r = stats::welch_t_test(frequencies_of(ga.members, first), frequencies_of(gb.members, other),
                                       stats::Alternative::TwoSided);
    not_rejected += !r.rejects(0.05);
  }
  report(5, "Welch consistency", not_rejected >= 18,
         std::to_string(not_rejected) + "/20 seed pairs not rejected at alpha 0.05 (need >= 18)");
}

void criterion_6() {
  constexpr Timestamp now = 1'700'000'000;
  auto base = [] {
    UserProfile u;
    u.user_id = "s";
    u.account_created_at = now - 400 * kSecondsPerDay;
    u.followers_count = 100;
    u.friends_count = 100;
    u.statuses_count = 100;
    u.last_tweet_at = now - kSecondsPerDay;
    return u;
  };
  using F = ScreeningFailure;
  struct Toggle {
    F code;
    std::function<void(UserProfile&, std::size_t&)> on, off;
  };
  const std::vector<Toggle> toggles{
      {F::NotActive30d, [](auto& u, auto&) { u.last_tweet_at = now - 30 * kSecondsPerDay - 1; },
       [](auto& u, auto&) { u.last_tweet_at = now - 30 * kSecondsPerDay; }},
      {F::VerifiedAccount, [](auto& u, auto&) { u.verified = true; }, [](auto& u, auto&) { u.verified = false; }},
      {F::TooFewTweets, [](auto&, auto& n) { n = 9; }, [](auto&, auto& n) { n = 10; }},
      {F::MinAccountAge, [](auto& u, auto&) { u.account_created_at = now - 90 * kSecondsPerDay; },
       [](auto& u, auto&) { u.account_created_at = now - 90 * kSecondsPerDay - 1; }},
      {F::MinFollowers, [](auto& u, auto&) { u.followers_count = 9, u.friends_count = 9; },
       [](auto& u, auto&) { u.followers_count = 10, u.friends_count = 9; }},
      {F::FollowRatio, [](auto& u, auto&) { u.followers_count = 10, u.friends_count = 201; },
       [](auto& u, auto&) { u.followers_count = 10, u.friends_count = 200; }},
      {F::DefaultProfile, [](auto& u, auto&) { u.has_profile_image = false; },
       [](auto& u, auto&) { u.has_profile_image = true; }},
  };
  int ok = 0;
  std::string bad;
  for (const auto& tg : toggles) {
    auto u = base();
    std::size_t originals = 20;
    tg.on(u, originals);
    const auto tripped = screen_user(u, originals, now).failures;
    tg.off(u, originals);
    const auto cleared = screen_user(u, originals, now).failures;
    if (tripped == std::vector{tg.code} && cleared.empty())
      ++ok;
    else
      bad += " " + std::string(to_string(tg.code));
  }
  report(6, "screening rules", ok == 7,
         std::to_string(ok) + "/7 reason codes tripped and cleared at their boundaries" + (bad.empty() ? "" : ":" + bad));
}

void criterion_7(const fs::path& dir) {
  const auto t = [&](const std::string& name) { return (dir / name).string(); };
  bool ok = true;
  std::string detail;
  ok &= run_cli("synth --seed 11 --users 400 --threads 1 --output " + t("a.jsonl")) == 0;
  ok &= run_cli("synth --seed 11 --users 400 --threads 1 --output " + t("b.jsonl")) == 0;
  ok &= run_cli("synth --seed 11 --users 400 --threads 4 --output " + t("c.jsonl")) == 0;
  const bool synth_same = ok && slurp(t("a.jsonl")) == slurp(t("b.jsonl")) && slurp(t("a.jsonl")) == slurp(t("c.jsonl"));
  detail += std::string("synth ") + (synth_same ? "identical" : "DIFFERS");

  {
    std::ofstream stream(t("stream.jsonl"));
    std::mt19937_64 rng(3);
    std::vector<StreamEvent> events;
    Timestamp at = 1'650'000'000;
    for (int i = 0; i < 60000; ++i) events.push_back({at += static_cast<Timestamp>(rng() % 20), "u" + std::to_string(rng() % 20000)});
    write_stream(stream, events);
    std::ofstream verdicts(t("verdicts.csv"));
    verdicts << "user_id,passed,failures\n";
    for (int i = 0; i < 20000; ++i) verdicts << 'u' << i << (i % 9 ? ",true,\n" : ",false,follow-ratio\n");
  }
  const std::string sim = "simulate-sample --input " + t("stream.jsonl") + " --verdicts " + t("verdicts.csv") +
                          " --seed 42 --target 1000 --output ";
  const bool sim_ran = run_cli(sim + t("s1.txt")) == 0 && run_cli(sim + t("s2.txt")) == 0;
  const bool sim_same = sim_ran && slurp(t("s1.txt")) == slurp(t("s2.txt")) && !slurp(t("s1.txt")).empty();
  detail += std::string(", simulate-sample ") + (sim_same ? "identical" : "DIFFERS");

  std::vector<std::string> initial;
  for (int i = 0; i < 86557; ++i) initial.push_back("id" + std::to_string(i));
  const bool draw_same = draw_final_sample(initial, 5200, 7) == draw_final_sample(initial, 5200, 7);
  detail += std::string(", draw_final_sample ") + (draw_same ? "identical" : "DIFFERS");

  SynthConfig c;
  c.seed = 11;
  c.user_count = 2000;
  c.weeks = 2;
  std::ostringstream one, many;
  save_corpus_snapshot(generate_synthetic_corpus(c, 1), one);
  save_corpus_snapshot(generate_synthetic_corpus(c, 8), many);
  const bool threads_same = one.str() == many.str();
  detail += std::string(", in-process 1 vs 8 threads ") + (threads_same ? "identical" : "DIFFERS");
  report(7, "determinism", synth_same && sim_same && draw_same && threads_same, detail);
}

void criterion_8() {
  std::mt19937_64 rng(8);
  CorpusSnapshot s;
  s.retrieval_time = 1'700'000'000;
  s.metadata["source"] = "acceptance";
  for (int i = 0; i < 250; ++i) {
    UserProfile u;
    u.user_id = "user" + std::to_string(i);
    u.account_created_at = s.retrieval_time - 500 * kSecondsPerDay;
    u.followers_count = 10 + rng() % 10000;
    u.friends_count = rng() % 500;
    u.statuses_count = rng() % 10000;
    u.favourites_count = rng() % 100;
    u.verified = i % 17 == 0;
    u.has_description = i % 5 != 0;
    if (i % 3) u.last_tweet_at = s.retrieval_time - static_cast<Timestamp>(rng() % 100000);
    s.users.push_back(u);
  }
  const Timestamp boundary = s.retrieval_time - 72 * kSecondsPerHour;
  std::size_t expect_kept = 0;
  for (int i = 0; i < 10000; ++i) {
    Tweet t;
    t.tweet_id = std::to_string(1'000'000'000'000 + i);
    t.user_id = s.users[rng() % s.users.size()].user_id;
    if (i % 500 == 0)
      t.created_at = boundary + (i % 1000 == 0 ? 0 : 1);
    else
      t.created_at = s.retrieval_time - static_cast<Timestamp>(rng() % (10 * kSecondsPerDay));
    expect_kept += t.created_at <= boundary;
    t.retweet_count = rng() % 50;
    t.favourite_count = rng() % 200;
    if (i % 2) t.comment_count = rng() % 9;
    if (i % 3 == 0) t.bookmark_count = 0;
    t.is_retweet = i % 6 == 0;
    t.text = "line\n\"quoted\" \xC3\xA9 " + std::to_string(i);
    if (i % 4 == 0) t.hashtags = {"a", "b"};
    s.tweets.push_back(t);
  }
  std::stringstream first;
  save_corpus_snapshot(s, first);
  const auto loaded = load_corpus_snapshot(first);
  std::stringstream second;
  save_corpus_snapshot(loaded, second);
  const auto reloaded = load_corpus_snapshot(second);
  const bool round_trip = loaded == s && reloaded == loaded;

  const auto cut = apply_recency_cutoff(loaded);
  bool cut_ok = cut.tweets.size() == expect_kept;
  bool boundary_kept = false;
  for (const auto& t : cut.tweets) {
    cut_ok &= t.created_at <= boundary;
    boundary_kept |= t.created_at == boundary;
  }
  report(8, "corpus round trip", round_trip && cut_ok && boundary_kept,
         std::to_string(s.tweets.size()) + " tweets load-save-load " + (round_trip ? "equal" : "DIFFER") +
             "; cutoff kept " + std::to_string(cut.tweets.size()) + " of expected " + std::to_string(expect_kept) +
             (boundary_kept ? ", boundary tweet kept" : ", boundary tweet LOST"));
}

}  // namespace

int main() {
  const fs::path dir = LOWFREQ_TEST_TMP;
  fs::remove_all(dir);
  fs::create_directories(dir);
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criteria_4_and_5();
    criterion_6();
    criterion_7(dir);
    criterion_8();
  } catch (const std::exception& e) {
    std::cout << "FAIL  acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}

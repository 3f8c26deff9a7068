#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "test_support.hpp"

using namespace lowfreq;
using namespace lowfreq::testing;
using Catch::Approx;

namespace {

SynthConfig small(std::uint64_t seed = 7, std::size_t users = 300) {
  SynthConfig c;
  c.seed = seed;
  c.user_count = users;
  return c;
}

// Pearson statistic of `draws` against Binomial(n, p), pooling cells with
// expected count below 5 into the tails.
std::pair<double, int> chi_squared(const std::vector<Count>& draws, Count n, double p) {
  const boost::math::binomial_distribution<double> law(static_cast<double>(n), p);
  std::map<Count, double> observed;
  for (auto d : draws) ++observed[d];
  const double total = static_cast<double>(draws.size());
  double stat = 0, pending_e = 0, pending_o = 0;
  int cells = 0;
  for (Count k = 0; k <= n; ++k) {
    pending_e += total * boost::math::pdf(law, static_cast<double>(k));
    pending_o += observed[k];
    if (pending_e >= 5) {
      stat += (pending_o - pending_e) * (pending_o - pending_e) / pending_e;
      ++cells;
      pending_e = pending_o = 0;
    }
  }
  if (pending_e > 0) stat += (pending_o - pending_e) * (pending_o - pending_e) / pending_e;
  return {stat, cells};
}

}  // namespace

TEST_CASE("binomial sampler matches the binomial law", "[synth]") {
  std::mt19937_64 rng(99);
  for (auto [n, p] : std::vector<std::pair<Count, double>>{{10, 0.3}, {300, 0.01}, {5000, 0.01}, {200, 0.45},
                                                            {100000, 0.002}, {40, 0.5}}) {
    std::vector<Count> draws(20000);
    for (auto& d : draws) {
      d = synth_detail::binomial(rng, n, p);
      REQUIRE(d <= n);
    }
    const auto [stat, cells] = chi_squared(draws, n, p);
    const boost::math::chi_squared_distribution<double> ref(cells - 1);
    INFO("n=" << n << " p=" << p << " chi2=" << stat << " cells=" << cells);
    CHECK(boost::math::cdf(boost::math::complement(ref, stat)) > 1e-4);
  }
  CHECK(synth_detail::binomial(rng, 0, 0.3) == 0);
  CHECK(synth_detail::binomial(rng, 12, 0) == 0);
  CHECK(synth_detail::binomial(rng, 12, 1) == 12);
}

TEST_CASE("same seed gives byte-identical corpora at any thread count", "[synth]") {
  const auto a = serialize(generate_synthetic_corpus(small(), 1));
  CHECK(serialize(generate_synthetic_corpus(small(), 1)) == a);
  CHECK(serialize(generate_synthetic_corpus(small(), 4)) == a);
  CHECK(serialize(generate_synthetic_corpus(small(8), 1)) != a);
}

TEST_CASE("generated corpora validate and pass screening", "[synth][property]") {
  auto c = small(3, 5000);
  c.weeks = 2;
  const auto snap = generate_synthetic_corpus(c, 2);
  CHECK(snap.users.size() == 5000);
  CHECK_NOTHROW(parse(serialize(snap)));
  const auto verdicts = screen_corpus(snap);
  for (const auto& [id, v] : verdicts) {
    INFO(id);
    CHECK(v.passed());
  }
  std::map<std::string, std::size_t> originals;
  std::unordered_map<std::string, Count> followers;
  for (const auto& u : snap.users) followers[u.user_id] = u.followers_count;
  for (const auto& t : snap.tweets) {
    if (t.is_retweet) continue;
    ++originals[t.user_id];
    CHECK(t.retweet_count <= followers[t.user_id]);
    CHECK(t.favourite_count <= followers[t.user_id]);
  }
  REQUIRE(originals.size() == 5000);
  for (const auto& [_, n] : originals) CHECK(n >= 10);
  CHECK(snap.metadata.at("seed") == "3");
}

TEST_CASE("weekly rate lands in the configured band", "[synth]") {
  auto c = small(11, 400);
  c.band_mix = {{"2:3", 1}, {"41:50", 1}};
  const auto snap = generate_synthetic_corpus(c);
  const auto metrics = compute_corpus_user_metrics(snap, score_corpus(snap));
  for (const auto& m : metrics) {
    INFO(m.user_id << " rate " << m.avg_or_tpw);
    CHECK((m.band.label == "2:3" || m.band.label == "41:50"));
  }
}

TEST_CASE("without signal, engagement per follower does not depend on band", "[synth]") {
  auto c = small(5, 5000);
  c.weeks = 2;
  const auto snap = generate_synthetic_corpus(c);
  const auto metrics = compute_corpus_user_metrics(snap, score_corpus(snap));
  // E[AvgAudInpW] = 2 p0 E[appeal] with a log-normal appeal multiplier.
  const double expected = 2 * c.engagement_base * std::exp(c.appeal_sigma * c.appeal_sigma / 2);
  double all = 0, low = 0, high = 0;
  std::size_t n_low = 0, n_high = 0;
  for (const auto& m : metrics) {
    all += m.avg_aud_inpw;
    (m.band.lo < 10 ? low : high) += m.avg_aud_inpw;
    ++(m.band.lo < 10 ? n_low : n_high);
  }
  all /= static_cast<double>(metrics.size());
  low /= static_cast<double>(n_low);
  high /= static_cast<double>(n_high);
  CHECK(all == Approx(expected).epsilon(0.05));
  CHECK(low == Approx(all).epsilon(0.10));
  CHECK(high == Approx(all).epsilon(0.10));
}

TEST_CASE("planted signal lowers engagement for frequent tweeters", "[synth]") {
  auto c = small(5, 2000);
  c.weeks = 2;
  c.signal_strength = 0.2;
  const auto snap = generate_synthetic_corpus(c);
  const auto metrics = compute_corpus_user_metrics(snap, score_corpus(snap));
  double low = 0, high = 0;
  std::size_t n_low = 0, n_high = 0;
  for (const auto& m : metrics) {
    if (m.avg_or_tpw < 5) low += m.avg_aud_inpw, ++n_low;
    if (m.avg_or_tpw > 40) high += m.avg_aud_inpw, ++n_high;
  }
  CHECK(high / static_cast<double>(n_high) < 0.5 * low / static_cast<double>(n_low));
}

TEST_CASE("over-reach injection produces capped tweets", "[synth]") {
  auto c = small(2, 200);
  c.overreach_fraction = 0.1;
  const auto snap = generate_synthetic_corpus(c);
  const auto scores = compute_percentiles(score_corpus(snap));
  std::size_t capped = 0;
  for (const auto& s : scores) {
    if (!s.over_reach) continue;
    ++capped;
    CHECK(*s.tspc == 100);
  }
  CHECK(static_cast<double>(capped) / static_cast<double>(scores.size()) == Approx(0.1).margin(0.02));
}

TEST_CASE("config parsing and validation", "[synth]") {
  const auto c = synth_config_from_json(nlohmann::json::parse(
      R"({"seed": 5, "user_count": 12, "signal_strength": 0.3, "band_mix": {"0:1": 1, "200+": 2}})"));
  CHECK(c.seed == 5);
  CHECK(c.user_count == 12);
  CHECK(c.signal_strength == 0.3);
  CHECK(c.band_mix.size() == 2);
  CHECK(synth_config_from_json(nlohmann::json::parse(to_json(c).dump())).band_mix == c.band_mix);

  CHECK_THROWS(synth_config_from_json(nlohmann::json::parse(R"({"sede": 5})")));
  auto bad = small();
  bad.band_mix = {{"0:1", 0}};
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), DomainError);
  bad = small();
  bad.band_mix = {{"3:4", 1}};
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), DomainError);
  bad = small();
  bad.user_count = 0;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), DomainError);
  bad = small();
  bad.signal_strength = -1;
  CHECK_THROWS_AS(generate_synthetic_corpus(bad), DomainError);
}

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "aviary/features.hpp"
#include "aviary/ingest.hpp"
#include "aviary/rng.hpp"
#include "aviary/synth.hpp"
#include "oracles.hpp"

using namespace aviary;

namespace {

UserRecord load_fixture() {
  std::ifstream in(AVIARY_TEST_DATA_DIR "/fixture_record.jsonl");
  REQUIRE(in.good());
  auto parsed = parse_dataset(in);
  REQUIRE(parsed.records.size() == 1);
  REQUIRE(parsed.rejects.empty());
  return parsed.records.front();
}

std::string random_word(Rng& rng, std::size_t max_len) {
  static const std::string alphabet = "abcd \xC3\xA9";  // includes U+00E9
  std::string out;
  const auto len = rng.below(max_len + 1);
  for (std::uint64_t i = 0; i < len; ++i) {
    const auto pick = rng.below(6);
    if (pick < 5)
      out += alphabet[static_cast<std::size_t>(pick)];
    else
      out += "\xC3\xA9";
  }
  return out;
}

}  // namespace

TEST_CASE("levenshtein basics") {
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("kitten", "sitting") ==
        oracles::levenshtein_oracle("kitten", "sitting"));
}

TEST_CASE("levenshtein counts Unicode scalars, not bytes") {
  // "é" is two bytes but one scalar value.
  CHECK(levenshtein("\xC3\xA9", "e") == 1);
  CHECK(levenshtein("caf\xC3\xA9", "cafe") == 1);
}

TEST_CASE("levenshtein is a metric (vs oracle, random pairs)") {
  Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::string a = random_word(rng, 12);
    const std::string b = random_word(rng, 12);
    const std::string c = random_word(rng, 12);
    const auto ab = levenshtein(a, b);
    CHECK(ab == oracles::levenshtein_oracle(a, b));
    CHECK(ab == levenshtein(b, a));                       // symmetry
    CHECK((ab == 0) == (decode_utf8(a) == decode_utf8(b)));  // identity
    CHECK(levenshtein(a, c) <= ab + levenshtein(b, c));   // triangle
  }
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean(0, 7) == 0.0);
  CHECK(harmonic_mean(5, 5) == 5.0);
  CHECK(harmonic_mean(3, 6) == doctest::Approx(4.0));
}

TEST_CASE("population std") {
  CHECK(population_std({4, 4, 4}) == 0.0);
  CHECK(population_std({0, 2}) == 1.0);
  CHECK(population_std({1, 2, 3, 4}) == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("promotion score") {
  CHECK(promotion_score(std::string("http://www.acme.com"), "acme") == 4.0);
  CHECK(promotion_score(std::nullopt, "bob") == 3.0);
  CHECK(promotion_score(std::string("https://Example.org/shop?x=1"),
                        "example.org") == 0.0);
  // Whitespace is stripped from the name before comparing.
  CHECK(promotion_score(std::string("https://bigstore.com"), "Big Store") ==
        4.0);
}

TEST_CASE("fixture record reproduces the hand-computed vector") {
  const UserRecord rec = load_fixture();
  const FeatureVector f = extract_features(rec);
  CHECK(f[kFavoritesCount] == 200.0);
  CHECK(f[kVerified] == 1.0);
  CHECK(f[kPlainStatuses] == 1.0);
  CHECK(f[kRepliesReceived] == 2.0);
  CHECK(f[kRepliesGiven] == 1.0);
  CHECK(f[kRetweets] == 2.0);
  CHECK(f[kMentions] == 4.0);
  CHECK(f[kTotalUrls] == 4.0);
  CHECK(f[kTotalHashtags] == 3.0);
  CHECK(f[kPromotionScore] == 4.0);
  CHECK(f[kLifeTimeHours] == 240.0);
  CHECK(f[kTweetSpread] == doctest::Approx(10.0 / 240.0).epsilon(1e-12));
  CHECK(f[kStdUrls] == doctest::Approx(std::sqrt(1.36)).epsilon(1e-12));
  CHECK(f[kStdHashtags] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(f[kCollectiveActiveness] == doctest::Approx(665.0).epsilon(1e-12));
  CHECK(f[kDegreeOfInclination] == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(f[kCollectiveInfluence] == 1250.0);
}

TEST_CASE("all-plain window zeroes the entity features") {
  UserRecord rec = load_fixture();
  rec.tweets.resize(1);
  Tweet plain = rec.tweets.front();
  plain.is_retweet = false;
  plain.hashtag_count = plain.url_count = plain.mention_count = 0;
  plain.reply_count.reset();
  plain.in_reply_to_user_id.reset();
  rec.tweets.assign(100, plain);
  const FeatureVector f = extract_features(rec);
  CHECK(f[kPlainStatuses] == 100.0);
  CHECK(f[kRetweets] == 0.0);
  CHECK(f[kMentions] == 0.0);
  CHECK(f[kTotalUrls] == 0.0);
  CHECK(f[kStdUrls] == 0.0);
  CHECK(f[kDegreeOfInclination] == 0.0);
}

TEST_CASE("collective influence is the plain sum") {
  UserRecord rec = load_fixture();
  rec.profile.followers_count = 10;
  rec.profile.listed_count = 2;
  rec.profile.favourites_count = 3;
  CHECK(extract_features(rec)[kCollectiveInfluence] == 15.0);
}

TEST_CASE("degree of inclination equals the shared value on a 40/40 split") {
  UserRecord rec = load_fixture();
  Tweet base = rec.tweets.front();
  base.reply_count.reset();
  base.in_reply_to_user_id.reset();
  rec.tweets.clear();
  for (int i = 0; i < 80; ++i) {
    Tweet t = base;
    t.is_retweet = i < 40;
    t.mention_count = t.is_retweet ? 1 : 0;
    rec.tweets.push_back(t);
  }
  CHECK(extract_features(rec)[kDegreeOfInclination] == 40.0);
}

TEST_CASE("extraction is pure and insensitive to input tweet order") {
  const UserRecord rec = load_fixture();
  const FeatureVector a = extract_features(rec);
  const FeatureVector b = extract_features(rec);
  CHECK(a == b);  // bit-identical

  // Permute tweets, re-ingest (which re-sorts), and compare.
  UserRecord shuffled = rec;
  std::rotate(shuffled.tweets.begin(), shuffled.tweets.begin() + 2,
              shuffled.tweets.end());
  std::istringstream in(serialize_record(shuffled) + "\n");
  const auto parsed = parse_dataset(in);
  REQUIRE(parsed.records.size() == 1);
  CHECK(extract_features(parsed.records.front()) == a);
}

TEST_CASE("plain/retweet/entity partition covers every tweet") {
  SynthConfig config;
  config.total_users = 36;
  config.class_counts = scale_class_counts(36);
  config.seed = 21;
  std::istringstream in(generate_corpus(config));
  const auto parsed = parse_dataset(in);
  for (const auto& rec : parsed.records) {
    const FeatureVector f = extract_features(rec);
    std::size_t entity_non_retweets = 0;
    for (const Tweet& t : rec.tweets)
      if (!t.is_retweet &&
          (t.hashtag_count > 0 || t.url_count > 0 || t.mention_count > 0))
        ++entity_non_retweets;
    CHECK(f[kPlainStatuses] + f[kRetweets] +
              static_cast<double>(entity_non_retweets) ==
          static_cast<double>(rec.tweets.size()));

    const double personal =
        static_cast<double>(rec.tweets.size()) - f[kRetweets];
    CHECK(f[kDegreeOfInclination] <=
          2.0 * std::min(personal, f[kRetweets]) + 1e-9);
    CHECK(f[kDegreeOfInclination] <=
          std::max(personal, f[kRetweets]) + 1e-9);
  }
}

TEST_CASE("feature vector entries satisfy their sign constraints") {
  SynthConfig config;
  config.total_users = 36;
  config.class_counts = scale_class_counts(36);
  config.seed = 22;
  std::istringstream in(generate_corpus(config));
  const auto parsed = parse_dataset(in);
  for (const auto& rec : parsed.records) {
    const FeatureVector f = extract_features(rec);
    for (double v : f) CHECK(std::isfinite(v));
    CHECK((f[kVerified] == 0.0 || f[kVerified] == 1.0));
    for (int i : {0, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16})
      CHECK(f[static_cast<std::size_t>(i)] >= 0.0);
  }
}

TEST_CASE("normalization fit: trivial cases") {
  FeatureVector v{};
  v[0] = 2.0;
  FeatureVector w = v;
  w[0] = 10.0;
  const auto single = fit_normalization({v});
  CHECK(single.min == v);
  CHECK(single.max == v);
  const auto pair = fit_normalization({v, w});
  CHECK(pair.min[0] == 2.0);
  CHECK(pair.max[0] == 10.0);
  for (std::size_t i = 1; i < v.size(); ++i) {
    CHECK(pair.min[i] == pair.max[i]);
  }
}

TEST_CASE("normalization ranges match an independent streaming pass") {
  std::istringstream in(generate_corpus(SynthConfig{}));  // the full 716
  const auto parsed = parse_dataset(in);
  REQUIRE(parsed.records.size() == 716);
  std::vector<FeatureVector> vectors;
  for (const auto& rec : parsed.records)
    vectors.push_back(extract_features(rec));
  const auto fitted = fit_normalization(vectors);
  const auto oracle = oracles::minmax_oracle(vectors);
  CHECK(fitted == oracle);
}

TEST_CASE("apply_normalization clamps and maps boundaries") {
  FeatureVector lo{}, hi{};
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = static_cast<double>(i);
    hi[i] = static_cast<double>(i) + 2.0;
  }
  const auto params = fit_normalization({lo, hi});
  const auto at_min = apply_normalization(lo, params);
  const auto at_max = apply_normalization(hi, params);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(at_min[i] == 0.0);
    CHECK(at_max[i] == 1.0);
  }
  FeatureVector beyond = hi;
  beyond[3] = hi[3] + 5.0;
  CHECK(apply_normalization(beyond, params)[3] == 1.0);

  // Degenerate range maps to 0.
  const auto degenerate = fit_normalization({lo});
  const auto out = apply_normalization(lo, degenerate);
  for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("normalized output is always within [0, 1]") {
  Rng rng(77);
  std::vector<FeatureVector> train(20);
  for (auto& v : train)
    for (auto& x : v) x = rng.real(-100.0, 100.0);
  const auto params = fit_normalization(train);
  for (int trial = 0; trial < 200; ++trial) {
    FeatureVector v;
    for (auto& x : v) x = rng.real(-500.0, 500.0);
    const auto out = apply_normalization(v, params);
    for (double o : out) {
      CHECK(o >= 0.0);
      CHECK(o <= 1.0);
    }
  }
}

TEST_CASE("feature CSV has the pinned header and 9 significant digits") {
  const UserRecord rec = load_fixture();
  std::ostringstream os;
  write_feature_csv(os, {rec}, {extract_features(rec)});
  std::istringstream lines(os.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(header ==
        "user_id,label,f0,f1,f2,f3,f4,f5,f6,f7,f8,f9,f10,f11,f12,f13,f14,f15,"
        "f16");
  CHECK(row.rfind("u1,Business,200,1,1,2,1,2,4,4,3,4,240,0.0416666667,", 0) ==
        0);
}

TEST_CASE("csv escaping quotes commas and doubles quotes") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

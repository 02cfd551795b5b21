#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "aviary/ingest.hpp"
#include "aviary/rng.hpp"
#include "aviary/timeparse.hpp"
#include "aviary/types.hpp"

namespace aviary {

// Deterministic synthetic-corpus generator. Class-conditional templates are
// calibrated so the default 716-user mix lands on the reference aggregate
// statistics (fraction verified near 23%, fraction with at least one reply
// near 82%); the exact parameter values are frozen here and mirrored in
// templates/class_templates.json.

struct ClassTemplate {
  double tweet_rate_min = 0.1, tweet_rate_max = 1.0;  // tweets per hour
  double reply_given_rate = 0.1;   // per-tweet probability of being a reply
  double retweet_rate = 0.1;       // per-tweet probability of being a retweet
  double hashtag_mean = 0.5;       // Poisson means per tweet
  double url_mean = 0.3;
  double mention_mean = 0.8;
  std::uint64_t followers_min = 0, followers_max = 1000;
  std::uint64_t friends_min = 0, friends_max = 1000;
  std::uint64_t listed_min = 0, listed_max = 10;
  std::uint64_t favourites_min = 0, favourites_max = 1000;
  double verified_prob = 0.0;
  double has_url_prob = 0.5;       // profile_url present
  double branded_url_prob = 0.5;   // URL host echoes the account name
  double age_days_min = 100, age_days_max = 1000;
  double retweet_received_mean = 0.5;  // per-tweet retweet_count
  double reply_received_rate = 0.1;    // per-tweet probability reply_count > 0

  friend bool operator==(const ClassTemplate&, const ClassTemplate&) = default;
};

using ClassTemplates = std::array<ClassTemplate, kNumClasses>;

// Row layout, matching the member order of ClassTemplate:
//   {rate_min, rate_max, reply_given, retweet,
//    hashtag_mean, url_mean, mention_mean,
//    followers_min/max, friends_min/max, listed_min/max, favourites_min/max,
//    verified_prob, has_url_prob, branded_url_prob,
//    age_days_min/max, retweet_received_mean, reply_received_rate}
inline ClassTemplates default_class_templates() {
  ClassTemplates t;
  // Personal: casual home users, low to mild activity, tiny audience.
  t[0] = {0.02, 0.2, 0.10, 0.20,
          0.15, 0.08, 0.7,
          20, 400, 50, 500, 0, 4, 50, 3000,
          0.02, 0.15, 0.5,
          500, 2500, 0.05, 0.10};
  // Professional: highly interactive, follow many, followed by many.
  t[1] = {0.2, 1.5, 0.25, 0.15,
          0.4, 0.25, 1.2,
          2000, 80000, 500, 5000, 20, 400, 1000, 30000,
          0.25, 0.70, 0.5,
          700, 3000, 2.0, 0.35};
  // Business: frequent tweeting, little interaction, branded website.
  t[2] = {1.0, 4.0, 0.02, 0.05,
          0.8, 0.5, 0.5,
          5000, 100000, 100, 2000, 30, 500, 100, 2000,
          0.30, 0.95, 0.9,
          400, 2500, 1.0, 0.15};
  // Spam: bot-rate posting, throwaway young accounts, follows many blindly.
  t[3] = {60.0, 250.0, 0.015, 0.45,
          1.5, 1.2, 2.0,
          5, 150, 1000, 5000, 0, 2, 0, 50,
          0.0, 0.50, 0.05,
          10, 200, 0.02, 0.02};
  // FeedNews: automated reposting services, zero replies by definition.
  t[4] = {40.0, 120.0, 0.0, 0.25,
          0.8, 0.9, 0.1,
          10000, 500000, 0, 100, 100, 2000, 0, 100,
          0.55, 0.90, 0.7,
          700, 3000, 3.0, 0.25};
  // Viral: amplification bots, fake likes and followers, trend hijacking.
  t[5] = {50.0, 180.0, 0.015, 0.60,
          2.0, 0.8, 1.5,
          500, 20000, 2000, 20000, 0, 20, 1000, 50000,
          0.02, 0.80, 0.3,
          100, 1000, 1.5, 0.05};
  return t;
}

inline void validate_templates(const ClassTemplates& templates) {
  for (int c = 0; c < kNumClasses; ++c) {
    const ClassTemplate& t = templates[static_cast<std::size_t>(c)];
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(t.reply_given_rate) || !prob_ok(t.retweet_rate) ||
        !prob_ok(t.verified_prob) || !prob_ok(t.has_url_prob) ||
        !prob_ok(t.branded_url_prob) || !prob_ok(t.reply_received_rate))
      throw ConfigError(std::string("template probability out of range for ") +
                        kClassNames[static_cast<std::size_t>(c)]);
    if (t.tweet_rate_min <= 0 || t.tweet_rate_max < t.tweet_rate_min ||
        t.age_days_min <= 0 || t.age_days_max < t.age_days_min ||
        t.followers_max < t.followers_min || t.friends_max < t.friends_min ||
        t.listed_max < t.listed_min || t.favourites_max < t.favourites_min)
      throw ConfigError(std::string("template range empty for ") +
                        kClassNames[static_cast<std::size_t>(c)]);
    if (t.hashtag_mean < 0 || t.url_mean < 0 || t.mention_mean < 0 ||
        t.retweet_received_mean < 0)
      throw ConfigError(std::string("template mean negative for ") +
                        kClassNames[static_cast<std::size_t>(c)]);
  }
  // Feed/news accounts are not interactive at all.
  if (templates[static_cast<std::size_t>(UserClass::FeedNews)]
          .reply_given_rate != 0.0)
    throw ConfigError("FeedNews template must have reply_given_rate = 0");
}

struct SynthConfig {
  int total_users = 716;
  std::array<int, kNumClasses> class_counts = {19, 399, 157, 49, 51, 41};
  std::uint64_t seed = 42;
  int corruption_count = 0;

  void validate() const {
    if (total_users < 1) throw ConfigError("total_users must be >= 1");
    if (corruption_count < 0)
      throw ConfigError("corruption_count must be >= 0");
    int sum = 0;
    for (int c : class_counts) {
      if (c < 0) throw ConfigError("class counts must be >= 0");
      sum += c;
    }
    if (sum != total_users)
      throw ConfigError("class counts must sum to total_users");
  }
};

// Largest-remainder apportionment of the default class mix onto a new total.
inline std::array<int, kNumClasses> scale_class_counts(int total) {
  constexpr std::array<int, kNumClasses> base = {19, 399, 157, 49, 51, 41};
  std::array<int, kNumClasses> out{};
  std::array<double, kNumClasses> remainder{};
  int assigned = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const double exact =
        static_cast<double>(total) * base[static_cast<std::size_t>(c)] / 716.0;
    out[static_cast<std::size_t>(c)] = static_cast<int>(exact);
    remainder[static_cast<std::size_t>(c)] =
        exact - std::floor(exact);
    assigned += out[static_cast<std::size_t>(c)];
  }
  while (assigned < total) {
    int pick = 0;
    for (int c = 1; c < kNumClasses; ++c)
      if (remainder[static_cast<std::size_t>(c)] >
          remainder[static_cast<std::size_t>(pick)])
        pick = c;
    ++out[static_cast<std::size_t>(pick)];
    remainder[static_cast<std::size_t>(pick)] = -1.0;
    ++assigned;
  }
  return out;
}

namespace detail_synth {

// All synthetic timestamps hang off a fixed reference instant so output is a
// pure function of the config.
inline constexpr std::int64_t kReferenceTime =
    detail_time::days_from_civil(2014, 6, 1) * 86400;

inline constexpr std::array<const char*, 24> kNameWords = {
    "amber", "birch",  "cedar",  "delta",  "ember",  "fable",
    "grove", "harbor", "indigo", "juniper", "kite",  "lumen",
    "maple", "nimbus", "onyx",   "prairie", "quartz", "raven",
    "sable", "tundra", "umber",  "vista",  "willow", "zephyr"};

inline constexpr std::array<const char*, 16> kFillerWords = {
    "update", "today",  "new",    "check",  "great",  "time",
    "more",   "daily",  "weekly", "launch", "story",  "local",
    "report", "watch",  "live",   "event"};

inline std::string pick_word(Rng& rng) {
  return kNameWords[static_cast<std::size_t>(rng.below(kNameWords.size()))];
}

inline std::string make_text(Rng& rng, const Tweet& t) {
  std::string text;
  if (t.is_retweet) text = "RT @" + pick_word(rng) + ": ";
  const int words = 3 + static_cast<int>(rng.below(5));
  for (int i = 0; i < words; ++i) {
    if (!text.empty() && text.back() != ' ') text += ' ';
    text += kFillerWords[static_cast<std::size_t>(rng.below(kFillerWords.size()))];
  }
  return text;
}

inline UserRecord make_user(int user_index, UserClass cls,
                            const ClassTemplate& t, Rng& rng) {
  UserRecord rec;
  UserProfile& p = rec.profile;
  rec.label = cls;

  const double age_days = rng.real(t.age_days_min, t.age_days_max);
  p.created_at = kReferenceTime - std::llround(age_days * 86400.0);
  p.verified = rng.bernoulli(t.verified_prob);
  p.followers_count = static_cast<std::uint64_t>(
      rng.int_in(static_cast<std::int64_t>(t.followers_min),
                 static_cast<std::int64_t>(t.followers_max)));
  p.friends_count = static_cast<std::uint64_t>(
      rng.int_in(static_cast<std::int64_t>(t.friends_min),
                 static_cast<std::int64_t>(t.friends_max)));
  p.listed_count = static_cast<std::uint64_t>(
      rng.int_in(static_cast<std::int64_t>(t.listed_min),
                 static_cast<std::int64_t>(t.listed_max)));
  p.favourites_count = static_cast<std::uint64_t>(
      rng.int_in(static_cast<std::int64_t>(t.favourites_min),
                 static_cast<std::int64_t>(t.favourites_max)));

  const std::string first = pick_word(rng);
  const std::string second = pick_word(rng);
  p.display_name = first + " " + second;
  p.display_name[0] = static_cast<char>(p.display_name[0] - 'a' + 'A');
  p.user_id = std::to_string(1000000 + user_index);
  p.screen_name = first + "_" + second + "_" + std::to_string(user_index);

  if (rng.bernoulli(t.has_url_prob)) {
    if (rng.bernoulli(t.branded_url_prob)) {
      p.profile_url = "https://www." + first + second + ".com";
    } else {
      p.profile_url = "https://" + pick_word(rng) + pick_word(rng) + ".net";
    }
  }

  const double rate = rng.real(t.tweet_rate_min, t.tweet_rate_max);
  std::int64_t when = kReferenceTime;
  for (int j = 0; j < kMaxTweetsPerUser; ++j) {
    const double gap_seconds = rng.exponential(rate) * 3600.0;
    when -= std::max<std::int64_t>(1, std::llround(gap_seconds));
    if (when <= p.created_at) break;
    Tweet tw;
    tw.created_at = when;
    tw.tweet_id = p.user_id + "-" + std::to_string(j);
    tw.is_retweet = rng.bernoulli(t.retweet_rate);
    if (!tw.is_retweet && rng.bernoulli(t.reply_given_rate))
      tw.in_reply_to_user_id = std::to_string(rng.below(100000));
    tw.hashtag_count = rng.poisson(t.hashtag_mean);
    tw.url_count = rng.poisson(t.url_mean);
    tw.mention_count = rng.poisson(t.mention_mean);
    if (tw.is_retweet && tw.mention_count == 0) tw.mention_count = 1;
    tw.retweet_count = rng.poisson(t.retweet_received_mean);
    tw.reply_count = rng.bernoulli(t.reply_received_rate)
                         ? 1 + rng.poisson(1.0)
                         : 0;
    tw.text = make_text(rng, tw);
    rec.tweets.push_back(std::move(tw));
  }
  if (rec.tweets.empty()) {
    Tweet tw;
    tw.created_at = p.created_at + (kReferenceTime - p.created_at) / 2;
    tw.tweet_id = p.user_id + "-0";
    tw.text = "hello";
    rec.tweets.push_back(std::move(tw));
  }

  const double age_hours = age_days * 24.0;
  p.statuses_count = std::max<std::uint64_t>(
      rec.tweets.size(),
      static_cast<std::uint64_t>(
          std::llround(age_hours * rate * rng.real(0.6, 1.0))));

  if (rng.bernoulli(0.08)) {
    p.description.clear();
  } else {
    const int words = 3 + static_cast<int>(rng.below(5));
    for (int i = 0; i < words; ++i) {
      if (!p.description.empty()) p.description += ' ';
      p.description += kFillerWords[static_cast<std::size_t>(
          rng.below(kFillerWords.size()))];
    }
  }
  return rec;
}

inline constexpr std::array<const char*, 12> kRequiredFields = {
    "user_id",        "screen_name",     "display_name", "description",
    "created_at",     "verified",        "followers_count", "friends_count",
    "listed_count",   "favourites_count", "statuses_count", "tweets"};

// Drops one uniformly chosen required field so the record fails validation.
inline std::string corrupt_line(const UserRecord& rec, Rng& rng) {
  nlohmann::json obj = record_to_json(rec);
  const auto field =
      kRequiredFields[static_cast<std::size_t>(rng.below(kRequiredFields.size()))];
  if (std::string(field) == "tweets")
    obj.erase("tweets");
  else
    obj["profile"].erase(field);
  return obj.dump();
}

}  // namespace detail_synth

// Emits total_users labeled records (exact class counts) plus
// corruption_count invalid ones, interleaved at deterministic positions.
// Byte output is a pure function of the config and templates.
inline std::vector<std::string> generate_corpus_lines(
    const SynthConfig& config,
    const ClassTemplates& templates = default_class_templates()) {
  config.validate();
  validate_templates(templates);

  std::vector<UserClass> labels;
  labels.reserve(static_cast<std::size_t>(config.total_users));
  for (int c = 0; c < kNumClasses; ++c)
    for (int i = 0; i < config.class_counts[static_cast<std::size_t>(c)]; ++i)
      labels.push_back(static_cast<UserClass>(c));
  Rng label_rng = Rng::stream(config.seed, rng_streams::kSynthLabelTag);
  label_rng.shuffle(labels);

  const int total_lines = config.total_users + config.corruption_count;
  std::vector<bool> corrupt_at(static_cast<std::size_t>(total_lines), false);
  if (config.corruption_count > 0) {
    Rng pos_rng = Rng::stream(config.seed, rng_streams::kSynthCorruptTag);
    for (int pos : pos_rng.sample_indices(config.corruption_count, total_lines))
      corrupt_at[static_cast<std::size_t>(pos)] = true;
  }

  std::vector<std::string> lines;
  lines.reserve(static_cast<std::size_t>(total_lines));
  int next_valid = 0, next_corrupt = 0;
  for (int pos = 0; pos < total_lines; ++pos) {
    if (corrupt_at[static_cast<std::size_t>(pos)]) {
      const int user_index = config.total_users + next_corrupt;
      const auto cls = static_cast<UserClass>(next_corrupt % kNumClasses);
      Rng rng = Rng::stream(config.seed, rng_streams::kSynthUserTag +
                                             static_cast<std::uint64_t>(user_index));
      const UserRecord rec = detail_synth::make_user(
          user_index, cls, templates[static_cast<std::size_t>(cls)], rng);
      lines.push_back(detail_synth::corrupt_line(rec, rng));
      ++next_corrupt;
    } else {
      const UserClass cls = labels[static_cast<std::size_t>(next_valid)];
      Rng rng = Rng::stream(config.seed, rng_streams::kSynthUserTag +
                                             static_cast<std::uint64_t>(next_valid));
      lines.push_back(serialize_record(detail_synth::make_user(
          next_valid, cls, templates[static_cast<std::size_t>(cls)], rng)));
      ++next_valid;
    }
  }
  return lines;
}

inline std::string generate_corpus(
    const SynthConfig& config,
    const ClassTemplates& templates = default_class_templates()) {
  std::string out;
  for (const auto& line : generate_corpus_lines(config, templates)) {
    out += line;
    out += '\n';
  }
  return out;
}

// Aggregate corpus measures; replies are counted as given (a tweet posted in
// reply to another user), matching the non-interactivity reading for feeds.
struct CorpusStatistics {
  std::size_t user_count = 0;
  double fraction_verified = 0.0;
  double fraction_at_least_one_reply = 0.0;
  double fraction_more_than_ten_replies = 0.0;
  double fraction_hundred_tweets_in_hour = 0.0;
  std::uint64_t total_mentions = 0;
  std::uint64_t total_urls = 0;
  std::uint64_t total_retweets = 0;
  std::uint64_t total_hashtags = 0;
};

inline CorpusStatistics corpus_statistics(
    const std::vector<UserRecord>& records) {
  CorpusStatistics s;
  s.user_count = records.size();
  if (records.empty()) return s;
  std::size_t verified = 0, one_reply = 0, ten_replies = 0, rapid = 0;
  for (const auto& rec : records) {
    if (rec.profile.verified) ++verified;
    std::size_t replies = 0;
    for (const Tweet& t : rec.tweets) {
      if (t.in_reply_to_user_id) ++replies;
      if (t.is_retweet) ++s.total_retweets;
      s.total_mentions += t.mention_count;
      s.total_urls += t.url_count;
      s.total_hashtags += t.hashtag_count;
    }
    if (replies >= 1) ++one_reply;
    if (replies > 10) ++ten_replies;
    if (rec.tweets.size() == static_cast<std::size_t>(kMaxTweetsPerUser) &&
        rec.tweets.front().created_at - rec.tweets.back().created_at <= 3600)
      ++rapid;
  }
  const auto n = static_cast<double>(records.size());
  s.fraction_verified = static_cast<double>(verified) / n;
  s.fraction_at_least_one_reply = static_cast<double>(one_reply) / n;
  s.fraction_more_than_ten_replies = static_cast<double>(ten_replies) / n;
  s.fraction_hundred_tweets_in_hour = static_cast<double>(rapid) / n;
  return s;
}

inline nlohmann::json statistics_to_json(const CorpusStatistics& s) {
  return nlohmann::json{
      {"user_count", s.user_count},
      {"fraction_verified", s.fraction_verified},
      {"fraction_at_least_one_reply", s.fraction_at_least_one_reply},
      {"fraction_more_than_ten_replies", s.fraction_more_than_ten_replies},
      {"fraction_hundred_tweets_in_hour", s.fraction_hundred_tweets_in_hour},
      {"total_mentions", s.total_mentions},
      {"total_urls", s.total_urls},
      {"total_retweets", s.total_retweets},
      {"total_hashtags", s.total_hashtags}};
}

// --- template file I/O ----------------------------------------------------------

inline constexpr int kTemplateFormatVersion = 1;

inline nlohmann::json template_to_json(const ClassTemplate& t) {
  return nlohmann::json{
      {"tweet_rate_per_hour", {{"min", t.tweet_rate_min}, {"max", t.tweet_rate_max}}},
      {"reply_given_rate", t.reply_given_rate},
      {"retweet_rate", t.retweet_rate},
      {"hashtag_mean", t.hashtag_mean},
      {"url_mean", t.url_mean},
      {"mention_mean", t.mention_mean},
      {"followers", {{"min", t.followers_min}, {"max", t.followers_max}}},
      {"friends", {{"min", t.friends_min}, {"max", t.friends_max}}},
      {"listed", {{"min", t.listed_min}, {"max", t.listed_max}}},
      {"favourites", {{"min", t.favourites_min}, {"max", t.favourites_max}}},
      {"verified_prob", t.verified_prob},
      {"has_url_prob", t.has_url_prob},
      {"branded_url_prob", t.branded_url_prob},
      {"age_days", {{"min", t.age_days_min}, {"max", t.age_days_max}}},
      {"retweet_received_mean", t.retweet_received_mean},
      {"reply_received_rate", t.reply_received_rate}};
}

inline ClassTemplate template_from_json(const nlohmann::json& obj) {
  ClassTemplate t;
  t.tweet_rate_min = obj.at("tweet_rate_per_hour").at("min").get<double>();
  t.tweet_rate_max = obj.at("tweet_rate_per_hour").at("max").get<double>();
  t.reply_given_rate = obj.at("reply_given_rate").get<double>();
  t.retweet_rate = obj.at("retweet_rate").get<double>();
  t.hashtag_mean = obj.at("hashtag_mean").get<double>();
  t.url_mean = obj.at("url_mean").get<double>();
  t.mention_mean = obj.at("mention_mean").get<double>();
  t.followers_min = obj.at("followers").at("min").get<std::uint64_t>();
  t.followers_max = obj.at("followers").at("max").get<std::uint64_t>();
  t.friends_min = obj.at("friends").at("min").get<std::uint64_t>();
  t.friends_max = obj.at("friends").at("max").get<std::uint64_t>();
  t.listed_min = obj.at("listed").at("min").get<std::uint64_t>();
  t.listed_max = obj.at("listed").at("max").get<std::uint64_t>();
  t.favourites_min = obj.at("favourites").at("min").get<std::uint64_t>();
  t.favourites_max = obj.at("favourites").at("max").get<std::uint64_t>();
  t.verified_prob = obj.at("verified_prob").get<double>();
  t.has_url_prob = obj.at("has_url_prob").get<double>();
  t.branded_url_prob = obj.at("branded_url_prob").get<double>();
  t.age_days_min = obj.at("age_days").at("min").get<double>();
  t.age_days_max = obj.at("age_days").at("max").get<double>();
  t.retweet_received_mean = obj.at("retweet_received_mean").get<double>();
  t.reply_received_rate = obj.at("reply_received_rate").get<double>();
  return t;
}

inline nlohmann::json templates_to_json(const ClassTemplates& templates) {
  nlohmann::json by_class;
  for (int c = 0; c < kNumClasses; ++c)
    by_class[kClassNames[static_cast<std::size_t>(c)]] =
        template_to_json(templates[static_cast<std::size_t>(c)]);
  return nlohmann::json{{"format_version", kTemplateFormatVersion},
                        {"templates", std::move(by_class)}};
}

inline ClassTemplates templates_from_json(const nlohmann::json& obj) {
  if (!obj.is_object() || !obj.contains("format_version") ||
      obj.at("format_version").get<int>() != kTemplateFormatVersion)
    throw ConfigError("unsupported template file");
  ClassTemplates out;
  const auto& by_class = obj.at("templates");
  for (int c = 0; c < kNumClasses; ++c)
    out[static_cast<std::size_t>(c)] = template_from_json(
        by_class.at(kClassNames[static_cast<std::size_t>(c)]));
  validate_templates(out);
  return out;
}

}  // namespace aviary

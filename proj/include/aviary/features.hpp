#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "aviary/types.hpp"

namespace aviary {

inline constexpr int kNumFeatures = 17;

// Fixed feature order. Indices are part of the CSV and model contracts.
enum FeatureIndex : int {
  kFavoritesCount = 0,
  kVerified = 1,
  kPlainStatuses = 2,
  kRepliesReceived = 3,
  kRepliesGiven = 4,
  kRetweets = 5,
  kMentions = 6,
  kTotalUrls = 7,
  kTotalHashtags = 8,
  kPromotionScore = 9,
  kLifeTimeHours = 10,
  kTweetSpread = 11,
  kStdUrls = 12,
  kStdHashtags = 13,
  kCollectiveActiveness = 14,
  kDegreeOfInclination = 15,
  kCollectiveInfluence = 16,
};

using FeatureVector = std::array<double, kNumFeatures>;

inline constexpr std::array<const char*, kNumFeatures> kFeatureNames = {
    "favorites_count",  "verified",       "plain_statuses",
    "replies_received", "replies_given",  "retweets",
    "mentions",         "total_urls",     "total_hashtags",
    "promotion_score",  "life_time_hours", "tweet_spread",
    "std_urls",         "std_hashtags",   "collective_activeness",
    "degree_of_inclination", "collective_influence"};

// Floor for time denominators: one second, in hours.
inline constexpr double kTimeEpsilonHours = 1.0 / 3600.0;

// --- small numeric building blocks -----------------------------------------

// 0 when either input is 0 (zero-dominates convention), else 2ab/(a+b).
inline double harmonic_mean(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return 2.0 * a * b / (a + b);
}

// Population form (divisor N). Caller guarantees at least one value.
inline double population_std(const std::vector<std::uint64_t>& values) {
  const std::size_t n = values.size();
  double mean = 0.0;
  for (auto v : values) mean += static_cast<double>(v);
  mean /= static_cast<double>(n);
  double acc = 0.0;
  for (auto v : values) {
    const double d = static_cast<double>(v) - mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

// UTF-8 to Unicode scalar values; an invalid byte stands for itself.
inline std::vector<std::uint32_t> decode_utf8(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    std::uint32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1FU;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0FU;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07U;
    }
    bool ok = len > 0 && i + static_cast<std::size_t>(len) <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      const auto bk = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((bk & 0xC0) != 0x80)
        ok = false;
      else
        cp = (cp << 6) | (bk & 0x3FU);
    }
    if (ok) {
      out.push_back(cp);
      i += static_cast<std::size_t>(len);
    } else {
      out.push_back(b0);
      ++i;
    }
  }
  return out;
}

// Minimum insertions/deletions/substitutions over Unicode scalar values.
inline std::uint64_t levenshtein(std::string_view a, std::string_view b) {
  const auto ca = decode_utf8(a);
  const auto cb = decode_utf8(b);
  const std::size_t n = ca.size(), m = cb.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::uint64_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint64_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint64_t up = row[j];
      if (ca[i - 1] == cb[j - 1]) {
        row[j] = diag;
      } else {
        row[j] = 1 + std::min({row[j - 1], up, diag});
      }
      diag = up;
    }
  }
  return row[m];
}

// --- promotion score ---------------------------------------------------------

namespace detail_features {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string canonical_name(std::string_view name) {
  std::string lowered = ascii_lower(name);
  std::string out;
  out.reserve(lowered.size());
  for (char c : lowered) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v')
      continue;
    out += c;
  }
  return out;
}

inline std::string canonical_host(std::string_view url) {
  std::string s = ascii_lower(url);
  if (const auto scheme = s.find("://"); scheme != std::string::npos)
    s.erase(0, scheme + 3);
  if (s.rfind("www.", 0) == 0) s.erase(0, 4);
  if (const auto cut = s.find_first_of("/?#"); cut != std::string::npos)
    s.erase(cut);
  return s;
}

}  // namespace detail_features

// Edit distance between the website host and the account name, a self-branding
// proxy. Without a URL the canonical name length serves as a maximal-distance
// stand-in.
inline double promotion_score(const std::optional<std::string>& profile_url,
                              std::string_view display_name) {
  const std::string name = detail_features::canonical_name(display_name);
  if (!profile_url)
    return static_cast<double>(decode_utf8(name).size());
  const std::string host = detail_features::canonical_host(*profile_url);
  return static_cast<double>(levenshtein(host, name));
}

// --- the 17-entry vector -----------------------------------------------------

struct FeatureOptions {
  // The account name the website URL is compared against.
  bool promotion_uses_screen_name = false;
};

inline FeatureVector extract_features(const UserRecord& record,
                                      const FeatureOptions& opt = {}) {
  const UserProfile& p = record.profile;
  const std::vector<Tweet>& tweets = record.tweets;
  const auto n = static_cast<double>(tweets.size());

  FeatureVector f{};
  f[kFavoritesCount] = static_cast<double>(p.favourites_count);
  f[kVerified] = p.verified ? 1.0 : 0.0;

  std::uint64_t plain = 0, replies_received = 0, replies_given = 0;
  std::uint64_t retweets = 0, mentions = 0, urls = 0, hashtags = 0;
  std::uint64_t retweet_count_received = 0;
  std::vector<std::uint64_t> url_counts, hashtag_counts;
  url_counts.reserve(tweets.size());
  hashtag_counts.reserve(tweets.size());
  for (const Tweet& t : tweets) {
    if (!t.is_retweet && t.hashtag_count == 0 && t.url_count == 0 &&
        t.mention_count == 0)
      ++plain;
    if (t.reply_count && *t.reply_count > 0) ++replies_received;
    if (t.in_reply_to_user_id) ++replies_given;
    if (t.is_retweet) ++retweets;
    mentions += t.mention_count;
    urls += t.url_count;
    hashtags += t.hashtag_count;
    retweet_count_received += t.retweet_count;
    url_counts.push_back(t.url_count);
    hashtag_counts.push_back(t.hashtag_count);
  }
  f[kPlainStatuses] = static_cast<double>(plain);
  f[kRepliesReceived] = static_cast<double>(replies_received);
  f[kRepliesGiven] = static_cast<double>(replies_given);
  f[kRetweets] = static_cast<double>(retweets);
  f[kMentions] = static_cast<double>(mentions);
  f[kTotalUrls] = static_cast<double>(urls);
  f[kTotalHashtags] = static_cast<double>(hashtags);

  f[kPromotionScore] = promotion_score(
      p.profile_url, opt.promotion_uses_screen_name ? p.screen_name
                                                    : p.display_name);

  // Tweets are most recent first, so [0] is the newest.
  const double life_hours =
      static_cast<double>(tweets.front().created_at - p.created_at) / 3600.0;
  f[kLifeTimeHours] = life_hours;
  f[kTweetSpread] = static_cast<double>(retweet_count_received) /
                    std::max(life_hours, kTimeEpsilonHours);
  f[kStdUrls] = population_std(url_counts);
  f[kStdHashtags] = population_std(hashtag_counts);
  f[kCollectiveActiveness] =
      static_cast<double>(p.statuses_count + p.friends_count + p.listed_count) /
      std::max(life_hours / 168.0, kTimeEpsilonHours);
  const double personal = n - static_cast<double>(retweets);
  f[kDegreeOfInclination] =
      harmonic_mean(personal, static_cast<double>(retweets));
  f[kCollectiveInfluence] = static_cast<double>(
      p.followers_count + p.listed_count + p.favourites_count);
  return f;
}

// --- min-max normalization ----------------------------------------------------

// Per-feature (min, max) ranges, fit on training data only.
struct NormalizationParams {
  FeatureVector min{};
  FeatureVector max{};

  friend bool operator==(const NormalizationParams&,
                         const NormalizationParams&) = default;
};

inline NormalizationParams fit_normalization(
    const std::vector<FeatureVector>& vectors) {
  if (vectors.empty())
    throw InvalidInputError("fit_normalization requires at least one vector");
  NormalizationParams p;
  p.min = vectors.front();
  p.max = vectors.front();
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      p.min[i] = std::min(p.min[i], v[i]);
      p.max[i] = std::max(p.max[i], v[i]);
    }
  }
  return p;
}

// (v - min) / (max - min), clamped to [0, 1]; a degenerate range maps to 0.
inline FeatureVector apply_normalization(const FeatureVector& v,
                                         const NormalizationParams& p) {
  FeatureVector out{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double range = p.max[i] - p.min[i];
    out[i] = range > 0.0
                 ? std::clamp((v[i] - p.min[i]) / range, 0.0, 1.0)
                 : 0.0;
  }
  return out;
}

// --- CSV export ----------------------------------------------------------------

inline std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string format_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

// Raw (un-normalized) features, 9 significant digits, one row per record.
inline void write_feature_csv(std::ostream& os,
                              const std::vector<UserRecord>& records,
                              const std::vector<FeatureVector>& vectors) {
  os << "user_id,label";
  for (int i = 0; i < kNumFeatures; ++i) os << ",f" << i;
  os << '\n';
  for (std::size_t r = 0; r < records.size(); ++r) {
    os << csv_escape(records[r].profile.user_id) << ',';
    if (records[r].label) os << to_string(*records[r].label);
    for (double v : vectors[r]) os << ',' << format_significant(v, 9);
    os << '\n';
  }
}

}  // namespace aviary

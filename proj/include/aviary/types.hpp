#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace aviary {

inline constexpr int kNumClasses = 6;
inline constexpr int kMaxTweetsPerUser = 100;

// Canonical order is load-bearing: serialization uses the names, every
// tie-break uses the index.
enum class UserClass : int {
  Personal = 0,
  Professional = 1,
  Business = 2,
  Spam = 3,
  FeedNews = 4,
  Viral = 5,
};

inline constexpr std::array<const char*, kNumClasses> kClassNames = {
    "Personal", "Professional", "Business", "Spam", "FeedNews", "Viral"};

inline const char* to_string(UserClass c) {
  return kClassNames[static_cast<std::size_t>(c)];
}

inline std::optional<UserClass> user_class_from_string(const std::string& s) {
  for (int i = 0; i < kNumClasses; ++i) {
    if (s == kClassNames[static_cast<std::size_t>(i)])
      return static_cast<UserClass>(i);
  }
  return std::nullopt;
}

struct UserProfile {
  std::string user_id;
  std::string screen_name;
  std::string display_name;
  std::string description;
  std::optional<std::string> profile_url;  // expanded form, user supplied
  std::int64_t created_at = 0;             // UTC seconds
  bool verified = false;
  std::uint64_t followers_count = 0;
  std::uint64_t friends_count = 0;
  std::uint64_t listed_count = 0;
  std::uint64_t favourites_count = 0;
  std::uint64_t statuses_count = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct Tweet {
  std::string tweet_id;
  std::int64_t created_at = 0;  // UTC seconds
  std::string text;
  bool is_retweet = false;
  std::uint64_t retweet_count = 0;
  std::optional<std::uint64_t> reply_count;
  std::optional<std::string> in_reply_to_user_id;
  std::uint64_t hashtag_count = 0;
  std::uint64_t url_count = 0;
  std::uint64_t mention_count = 0;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

// One account: profile, up to 100 tweets most recent first, optional label.
struct UserRecord {
  UserProfile profile;
  std::vector<Tweet> tweets;
  std::optional<UserClass> label;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

// Error taxonomy shared across modules; the CLI maps these to exit codes.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateDatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UndefinedAucError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aviary

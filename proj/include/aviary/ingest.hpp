#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aviary/timeparse.hpp"
#include "aviary/types.hpp"

namespace aviary {

// Line-delimited JSON ingestion. One UserRecord object per non-empty line:
//   {"profile": {...}, "tweets": [{...}, ...], "label": "Professional"}
// Records with missing or ill-typed required information are dropped and
// reported, never fatal; >100 tweets is a warning and truncates to the 100
// most recent.

enum class IssueKind {
  BadJson,
  MissingField,
  TypeMismatch,
  InvalidValue,
  EmptyTweetList,
  TooManyTweets,  // warning, not an error
};

inline const char* reason_code(IssueKind k) {
  switch (k) {
    case IssueKind::BadJson: return "bad_json";
    case IssueKind::MissingField: return "missing_field";
    case IssueKind::TypeMismatch: return "type_mismatch";
    case IssueKind::InvalidValue: return "invalid_value";
    case IssueKind::EmptyTweetList: return "empty_tweet_list";
    case IssueKind::TooManyTweets: return "too_many_tweets";
  }
  return "unknown";
}

struct ValidationIssue {
  IssueKind kind;
  std::string field;
};

struct ValidateResult {
  std::optional<UserRecord> record;
  std::vector<ValidationIssue> errors;    // non-empty iff !record
  std::vector<ValidationIssue> warnings;  // e.g. tweet list truncated

  bool ok() const { return record.has_value(); }
};

struct Reject {
  std::size_t line;  // 1-based input line number
  std::string reason;
  std::string detail;
};

struct ParseResult {
  std::vector<UserRecord> records;
  std::vector<Reject> rejects;
  std::vector<Reject> warnings;
};

namespace detail_ingest {

using nlohmann::json;

// Fallback token scanner for archives without pre-extracted entities.
// Token rules: #\w+, @\w+, https?://\S+ (URLs consumed first, one pass).
struct EntityCounts {
  std::uint64_t hashtags = 0, urls = 0, mentions = 0;
};

inline bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

inline EntityCounts scan_entities(std::string_view text) {
  EntityCounts out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto starts_with = [&](std::string_view prefix) {
    return text.substr(i, prefix.size()) == prefix;
  };
  while (i < n) {
    if (starts_with("http://") || starts_with("https://")) {
      std::size_t j = i + (starts_with("https://") ? 8 : 7);
      if (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) {
        ++out.urls;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j])))
          ++j;
      }
      i = j;
    } else if ((text[i] == '#' || text[i] == '@') && i + 1 < n &&
               is_word_char(text[i + 1])) {
      (text[i] == '#' ? out.hashtags : out.mentions)++;
      ++i;
      while (i < n && is_word_char(text[i])) ++i;
    } else {
      ++i;
    }
  }
  return out;
}

class FieldReader {
 public:
  FieldReader(const json& obj, std::string prefix,
              std::vector<ValidationIssue>& issues)
      : obj_(obj), prefix_(std::move(prefix)), issues_(issues) {}

  bool has(const char* name) const { return obj_.contains(name); }

  std::optional<std::string> required_string(const char* name) {
    if (!has(name)) return missing(name), std::nullopt;
    if (!obj_[name].is_string()) return mismatch(name), std::nullopt;
    return obj_[name].get<std::string>();
  }

  std::optional<std::string> optional_string(const char* name) {
    if (!has(name) || obj_[name].is_null()) return std::nullopt;
    if (!obj_[name].is_string()) return mismatch(name), std::nullopt;
    return obj_[name].get<std::string>();
  }

  std::optional<bool> required_bool(const char* name) {
    if (!has(name)) return missing(name), std::nullopt;
    if (!obj_[name].is_boolean()) return mismatch(name), std::nullopt;
    return obj_[name].get<bool>();
  }

  // Counts must be non-negative integers; floats and negatives are type
  // mismatches.
  std::optional<std::uint64_t> required_count(const char* name) {
    if (!has(name)) return missing(name), std::nullopt;
    return read_count(name);
  }

  std::optional<std::uint64_t> optional_count(const char* name) {
    if (!has(name) || obj_[name].is_null()) return std::nullopt;
    return read_count(name);
  }

  std::optional<std::int64_t> required_timestamp(const char* name) {
    auto raw = required_string(name);
    if (!raw) return std::nullopt;
    auto parsed = parse_timestamp(*raw);
    if (!parsed) return mismatch(name), std::nullopt;
    return parsed;
  }

  void invalid(const char* name) {
    issues_.push_back({IssueKind::InvalidValue, prefix_ + name});
  }

 private:
  void missing(const char* name) {
    issues_.push_back({IssueKind::MissingField, prefix_ + name});
  }
  void mismatch(const char* name) {
    issues_.push_back({IssueKind::TypeMismatch, prefix_ + name});
  }

  std::optional<std::uint64_t> read_count(const char* name) {
    const json& v = obj_[name];
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    return mismatch(name), std::nullopt;
  }

  const json& obj_;
  std::string prefix_;
  std::vector<ValidationIssue>& issues_;
};

inline std::optional<UserProfile> read_profile(
    const json& obj, std::vector<ValidationIssue>& issues) {
  FieldReader r(obj, "profile.", issues);
  UserProfile p;
  bool ok = true;
  auto take = [&](auto& dst, auto&& value) {
    if (value)
      dst = *value;
    else
      ok = false;
  };
  take(p.user_id, r.required_string("user_id"));
  take(p.screen_name, r.required_string("screen_name"));
  take(p.display_name, r.required_string("display_name"));
  take(p.description, r.required_string("description"));
  p.profile_url = r.optional_string("profile_url");
  take(p.created_at, r.required_timestamp("created_at"));
  take(p.verified, r.required_bool("verified"));
  take(p.followers_count, r.required_count("followers_count"));
  take(p.friends_count, r.required_count("friends_count"));
  take(p.listed_count, r.required_count("listed_count"));
  take(p.favourites_count, r.required_count("favourites_count"));
  take(p.statuses_count, r.required_count("statuses_count"));
  if (ok && p.user_id.empty()) r.invalid("user_id"), ok = false;
  if (ok && p.screen_name.empty()) r.invalid("screen_name"), ok = false;
  if (!ok) return std::nullopt;
  return p;
}

inline std::optional<Tweet> read_tweet(const json& obj, std::size_t index,
                                       std::vector<ValidationIssue>& issues) {
  FieldReader r(obj, "tweets[" + std::to_string(index) + "].", issues);
  Tweet t;
  bool ok = true;
  auto take = [&](auto& dst, auto&& value) {
    if (value)
      dst = *value;
    else
      ok = false;
  };
  take(t.tweet_id, r.required_string("tweet_id"));
  take(t.created_at, r.required_timestamp("created_at"));
  take(t.text, r.required_string("text"));
  take(t.is_retweet, r.required_bool("is_retweet"));
  take(t.retweet_count, r.required_count("retweet_count"));
  t.reply_count = r.optional_count("reply_count");
  t.in_reply_to_user_id = r.optional_string("in_reply_to_user_id");

  const bool has_hashtags = obj.contains("hashtag_count");
  const bool has_urls = obj.contains("url_count");
  const bool has_mentions = obj.contains("mention_count");
  EntityCounts scanned;
  if ((!has_hashtags || !has_urls || !has_mentions) && ok)
    scanned = scan_entities(t.text);
  if (has_hashtags)
    take(t.hashtag_count, r.required_count("hashtag_count"));
  else
    t.hashtag_count = scanned.hashtags;
  if (has_urls)
    take(t.url_count, r.required_count("url_count"));
  else
    t.url_count = scanned.urls;
  if (has_mentions)
    take(t.mention_count, r.required_count("mention_count"));
  else
    t.mention_count = scanned.mentions;

  if (ok && t.is_retweet && t.mention_count == 0)
    r.invalid("mention_count"), ok = false;
  if (!ok) return std::nullopt;
  return t;
}

}  // namespace detail_ingest

// Returns a UserRecord iff every required field is present and type-correct
// and at least one tweet exists. Tweets are re-sorted most recent first; a
// list longer than 100 keeps the 100 most recent and yields a warning.
inline ValidateResult validate_record(const nlohmann::json& candidate) {
  using detail_ingest::read_profile;
  using detail_ingest::read_tweet;

  ValidateResult result;
  auto& issues = result.errors;
  if (!candidate.is_object()) {
    issues.push_back({IssueKind::TypeMismatch, "(root)"});
    return result;
  }

  UserRecord rec;
  std::optional<UserProfile> profile;
  if (!candidate.contains("profile")) {
    issues.push_back({IssueKind::MissingField, "profile"});
  } else if (!candidate["profile"].is_object()) {
    issues.push_back({IssueKind::TypeMismatch, "profile"});
  } else {
    profile = read_profile(candidate["profile"], issues);
  }

  std::vector<Tweet> tweets;
  bool tweets_ok = false;
  if (!candidate.contains("tweets")) {
    issues.push_back({IssueKind::MissingField, "tweets"});
  } else if (!candidate["tweets"].is_array()) {
    issues.push_back({IssueKind::TypeMismatch, "tweets"});
  } else if (candidate["tweets"].empty()) {
    issues.push_back({IssueKind::EmptyTweetList, "tweets"});
  } else {
    tweets_ok = true;
    std::size_t i = 0;
    for (const auto& tj : candidate["tweets"]) {
      if (!tj.is_object()) {
        issues.push_back(
            {IssueKind::TypeMismatch, "tweets[" + std::to_string(i) + "]"});
        tweets_ok = false;
      } else if (auto t = read_tweet(tj, i, issues)) {
        tweets.push_back(std::move(*t));
      } else {
        tweets_ok = false;
      }
      ++i;
    }
  }

  std::optional<UserClass> label;
  if (candidate.contains("label") && !candidate["label"].is_null()) {
    if (!candidate["label"].is_string()) {
      issues.push_back({IssueKind::TypeMismatch, "label"});
    } else {
      label = user_class_from_string(candidate["label"].get<std::string>());
      if (!label) issues.push_back({IssueKind::InvalidValue, "label"});
    }
  }

  if (profile && tweets_ok) {
    std::stable_sort(tweets.begin(), tweets.end(),
                     [](const Tweet& a, const Tweet& b) {
                       return a.created_at > b.created_at;
                     });
    if (tweets.size() > static_cast<std::size_t>(kMaxTweetsPerUser)) {
      result.warnings.push_back({IssueKind::TooManyTweets, "tweets"});
      tweets.resize(kMaxTweetsPerUser);
    }
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      if (tweets[i].created_at < profile->created_at) {
        issues.push_back({IssueKind::InvalidValue,
                          "tweets[" + std::to_string(i) + "].created_at"});
      }
    }
  }

  if (!issues.empty()) return result;

  rec.profile = std::move(*profile);
  rec.tweets = std::move(tweets);
  rec.label = label;
  result.record = std::move(rec);
  return result;
}

namespace detail_ingest {

inline std::string issue_detail(const std::vector<ValidationIssue>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += reason_code(issue.kind);
    out += ": ";
    out += issue.field;
  }
  return out;
}

}  // namespace detail_ingest

// Parses a whole JSONL stream. Per-line failures never abort the parse; an
// unreadable stream throws IoError. Line numbers are 1-based and count every
// physical line, blank ones included.
inline ParseResult parse_dataset(std::istream& in) {
  if (!in) throw IoError("input stream is not readable");
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      out.rejects.push_back({line_no, reason_code(IssueKind::BadJson),
                             "line is not valid JSON"});
      continue;
    }
    ValidateResult v = validate_record(parsed);
    for (const auto& w : v.warnings)
      out.warnings.push_back({line_no, reason_code(w.kind),
                              "kept the 100 most recent tweets"});
    if (v.ok()) {
      out.records.push_back(std::move(*v.record));
    } else {
      out.rejects.push_back({line_no, reason_code(v.errors.front().kind),
                             detail_ingest::issue_detail(v.errors)});
    }
  }
  if (in.bad()) throw IoError("I/O failure while reading input");
  return out;
}

inline nlohmann::json record_to_json(const UserRecord& rec) {
  nlohmann::json profile{
      {"user_id", rec.profile.user_id},
      {"screen_name", rec.profile.screen_name},
      {"display_name", rec.profile.display_name},
      {"description", rec.profile.description},
      {"created_at", format_timestamp(rec.profile.created_at)},
      {"verified", rec.profile.verified},
      {"followers_count", rec.profile.followers_count},
      {"friends_count", rec.profile.friends_count},
      {"listed_count", rec.profile.listed_count},
      {"favourites_count", rec.profile.favourites_count},
      {"statuses_count", rec.profile.statuses_count},
  };
  if (rec.profile.profile_url) profile["profile_url"] = *rec.profile.profile_url;

  nlohmann::json tweets = nlohmann::json::array();
  for (const Tweet& t : rec.tweets) {
    nlohmann::json tj{
        {"tweet_id", t.tweet_id},
        {"created_at", format_timestamp(t.created_at)},
        {"text", t.text},
        {"is_retweet", t.is_retweet},
        {"retweet_count", t.retweet_count},
        {"hashtag_count", t.hashtag_count},
        {"url_count", t.url_count},
        {"mention_count", t.mention_count},
    };
    if (t.reply_count) tj["reply_count"] = *t.reply_count;
    if (t.in_reply_to_user_id) tj["in_reply_to_user_id"] = *t.in_reply_to_user_id;
    tweets.push_back(std::move(tj));
  }

  nlohmann::json out{{"profile", std::move(profile)},
                     {"tweets", std::move(tweets)}};
  if (rec.label) out["label"] = to_string(*rec.label);
  return out;
}

inline std::string serialize_record(const UserRecord& rec) {
  return record_to_json(rec).dump();
}

inline void write_jsonl(std::ostream& os,
                        const std::vector<UserRecord>& records) {
  for (const auto& rec : records) os << serialize_record(rec) << '\n';
}

// Reject report: JSONL of {"line": n, "reason": code, "detail": text}.
inline void write_reject_report(std::ostream& os,
                                const std::vector<Reject>& rejects) {
  for (const auto& r : rejects) {
    nlohmann::json obj{
        {"line", r.line}, {"reason", r.reason}, {"detail", r.detail}};
    os << obj.dump() << '\n';
  }
}

}  // namespace aviary

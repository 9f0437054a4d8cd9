#ifndef GCAL_DATA_MODEL_H_
#define GCAL_DATA_MODEL_H_

// Corpus schema, JSON-Lines ingestion, attribute one-hot encoding and the
// stratified train/validation split.
//
// On-disk layout of a dataset root:
//   news.jsonl      {"id", "text", "label": "fake" | "true"}
//   comments.jsonl  {"id", "news_id", "user_id", "text", "timestamp",
//                    "likes", "retweets", "replies"}
//   users.jsonl     {"id", "followers", "friends", "statuses", "verified"}

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gcal/tokenizer.h"

namespace gcal {

enum class Label : int { kFake = 0, kTrue = 1 };

std::string LabelName(Label label);

struct NewsItem {
  std::string id;
  std::vector<std::vector<TokenId>> sentences;
  Label label = Label::kFake;
  std::vector<std::string> raw_sentences;

  bool operator==(const NewsItem&) const = default;
};

struct CommentAttributes {
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::int64_t replies = 0;

  bool operator==(const CommentAttributes&) const = default;
};

struct Comment {
  std::string id;
  std::string news_id;
  std::string user_id;
  std::vector<TokenId> tokens;
  std::int64_t timestamp = 0;
  CommentAttributes attributes;
  std::string text;

  bool operator==(const Comment&) const = default;
};

struct UserAttributes {
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t statuses = 0;
  bool verified = false;

  bool operator==(const UserAttributes&) const = default;
};

struct User {
  std::string id;
  UserAttributes attributes;

  bool operator==(const User&) const = default;
};

// Immutable after construction; safe for concurrent read-only use.
struct Dataset {
  std::vector<NewsItem> news;
  std::map<std::string, Comment> comments;
  std::map<std::string, User> users;
  Vocabulary vocabulary;

  bool operator==(const Dataset&) const = default;

  std::size_t count(Label label) const;
  // Comments of each news id ordered by (timestamp, id).
  std::map<std::string, std::vector<const Comment*>> comments_by_news() const;
};

struct IngestConfig {
  int max_news_sentences = 50;
  int max_sentence_words = 50;
  int max_comment_words = 20;
  int min_freq = 2;
  // Abort when more than this fraction of a file's non-blank lines fail.
  double max_malformed_fraction = 0.5;
};

// Unvalidated records as they appear in the JSON-Lines files.
struct RawNews {
  std::string id;
  std::string text;
  Label label = Label::kFake;
};

struct RawComment {
  std::string id;
  std::string news_id;
  std::string user_id;
  std::string text;
  std::int64_t timestamp = 0;
  CommentAttributes attributes;
};

struct RawUser {
  std::string id;
  UserAttributes attributes;
};

struct RawCorpus {
  std::vector<RawNews> news;
  std::vector<RawComment> comments;
  std::vector<RawUser> users;
};

struct FileStats {
  std::string file;
  std::size_t lines = 0;  // non-blank lines
  std::size_t parsed = 0;
  std::size_t skipped = 0;               // syntax or schema failures
  std::vector<std::string> diagnostics;  // "file:line: reason", capped
};

struct IngestReport {
  FileStats news_file;
  FileStats comments_file;
  FileStats users_file;

  std::size_t true_news = 0;
  std::size_t fake_news = 0;
  std::size_t users = 0;
  // Retained comment records and user-comment edges. Equal by construction
  // (one author per comment); both are reported.
  std::size_t comments = 0;
  std::size_t comment_user_edges = 0;

  std::size_t duplicate_ids = 0;
  std::size_t dropped_empty_news = 0;
  std::size_t dropped_empty_comments = 0;
  std::size_t dropped_dangling_comments = 0;  // unknown news or user
  std::size_t dropped_unreferenced_users = 0;
  std::size_t news_without_comments = 0;
  std::size_t vocabulary_size = 0;
};

// Reads the three JSON-Lines files. Throws Error(kMissingFile) when a file is
// absent, Error(kMissingContent) when news.jsonl holds no records and
// Error(kMalformedRecord) when a file exceeds the malformed-line threshold.
RawCorpus ReadRawCorpus(const std::filesystem::path& root, const IngestConfig& config,
                        IngestReport* report);
// Validates, tokenizes and filters raw records into a Dataset.
Dataset BuildDataset(const RawCorpus& raw, const IngestConfig& config, IngestReport* report);
Dataset ParseDataset(const std::filesystem::path& root, const IngestConfig& config,
                     IngestReport* report = nullptr);

void WriteRawCorpus(const std::filesystem::path& root, const RawCorpus& raw);

// Sentence segmentation on terminal punctuation followed by whitespace, and
// on line breaks. Returned sentences are trimmed and non-empty.
std::vector<std::string> SplitSentences(const std::string& text);

// Base-10 logarithmic count buckets: [0], [1,10), [10,100), ... , [100k, inf).
struct AttributeSpec {
  std::vector<std::int64_t> bucket_edges = {1, 10, 100, 1000, 10000, 100000};

  int buckets() const { return static_cast<int>(bucket_edges.size()) + 1; }
  int user_width() const { return 3 * buckets() + 2; }
  int comment_width() const { return 3 * buckets(); }
};

// Throws Error(kNegativeCount) for negative counts.
int CountBucket(std::int64_t count, const AttributeSpec& spec = {});
// [followers | friends | statuses | verified(false,true)]
std::vector<double> EncodeAttributes(const User& user, const AttributeSpec& spec = {});
// [likes | retweets | replies]
std::vector<double> EncodeAttributes(const Comment& comment, const AttributeSpec& spec = {});

// Stratified by label; news order inside each part follows the input order.
std::pair<Dataset, Dataset> SplitDataset(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed);

// Self-contained JSON cache of a validated Dataset (vocabulary included).
void SaveDatasetCache(const std::filesystem::path& path, const Dataset& dataset);
Dataset LoadDatasetCache(const std::filesystem::path& path);

// Multi-line "key = value" rendering of the ingest counts.
std::string FormatIngestReport(const IngestReport& report);

}  // namespace gcal

#endif  // GCAL_DATA_MODEL_H_

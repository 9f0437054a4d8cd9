#include "gcal/data_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gcal/container.h"
#include "gcal/error.h"
#include "gcal/random.h"
#include "json.hpp"

namespace gcal {
namespace {

using nlohmann::json;

constexpr std::size_t kMaxDiagnostics = 20;

// Schema violation inside one record; carries the reason for the diagnostic.
struct RecordError {
  std::string reason;
};

std::string RequireString(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw RecordError{std::string("field '") + key + "' missing or not a string"};
  }
  return it->get<std::string>();
}

std::int64_t RequireInteger(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw RecordError{std::string("field '") + key + "' missing or not an integer"};
  }
  return it->get<std::int64_t>();
}

std::int64_t RequireCount(const json& j, const char* key) {
  const std::int64_t v = RequireInteger(j, key);
  if (v < 0) {
    throw RecordError{std::string(ErrorCodeName(ErrorCode::kNegativeCount)) + ": field '" + key +
                      "' = " + std::to_string(v)};
  }
  return v;
}

template <typename Record, typename Decode>
std::vector<Record> ReadJsonLines(const std::filesystem::path& path, const IngestConfig& config,
                                  FileStats& stats, Decode decode) {
  stats.file = path.filename().string();
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kMissingFile, path.string() + " not found");
  }
  std::vector<Record> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    ++stats.lines;
    std::string reason;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw RecordError{"record is not a JSON object"};
      records.push_back(decode(j));
      ++stats.parsed;
      continue;
    } catch (const json::exception& e) {
      reason = std::string("syntax error: ") + e.what();
    } catch (const RecordError& e) {
      reason = e.reason;
    }
    ++stats.skipped;
    if (stats.diagnostics.size() < kMaxDiagnostics) {
      stats.diagnostics.push_back(stats.file + ":" + std::to_string(line_no) + ": " + reason);
    }
  }
  if (stats.lines > 0 && static_cast<double>(stats.skipped) >
                             config.max_malformed_fraction * static_cast<double>(stats.lines)) {
    std::ostringstream msg;
    msg << stats.file << ": " << stats.skipped << " of " << stats.lines << " lines unparseable";
    for (const std::string& d : stats.diagnostics) msg << "\n  " << d;
    throw Error(ErrorCode::kMalformedRecord, msg.str());
  }
  return records;
}

RawNews DecodeNews(const json& j) {
  RawNews n;
  n.id = RequireString(j, "id");
  n.text = RequireString(j, "text");
  const std::string label = RequireString(j, "label");
  if (label == "fake") {
    n.label = Label::kFake;
  } else if (label == "true") {
    n.label = Label::kTrue;
  } else {
    throw RecordError{"label must be \"fake\" or \"true\", got \"" + label + "\""};
  }
  if (n.id.empty()) throw RecordError{"empty id"};
  return n;
}

RawComment DecodeComment(const json& j) {
  RawComment c;
  c.id = RequireString(j, "id");
  c.news_id = RequireString(j, "news_id");
  c.user_id = RequireString(j, "user_id");
  c.text = RequireString(j, "text");
  c.timestamp = RequireInteger(j, "timestamp");
  c.attributes.likes = RequireCount(j, "likes");
  c.attributes.retweets = RequireCount(j, "retweets");
  c.attributes.replies = RequireCount(j, "replies");
  if (c.id.empty()) throw RecordError{"empty id"};
  return c;
}

RawUser DecodeUser(const json& j) {
  RawUser u;
  u.id = RequireString(j, "id");
  u.attributes.followers = RequireCount(j, "followers");
  u.attributes.friends = RequireCount(j, "friends");
  u.attributes.statuses = RequireCount(j, "statuses");
  auto it = j.find("verified");
  if (it == j.end() || !it->is_boolean()) {
    throw RecordError{"field 'verified' missing or not a boolean"};
  }
  u.attributes.verified = it->get<bool>();
  if (u.id.empty()) throw RecordError{"empty id"};
  return u;
}

bool IsSentenceEnd(char c) { return c == '.' || c == '!' || c == '?'; }

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void AppendOneHot(std::vector<double>& out, int bucket, int width) {
  for (int i = 0; i < width; ++i) out.push_back(i == bucket ? 1.0 : 0.0);
}

Dataset SubsetByNews(const Dataset& dataset, const std::vector<std::size_t>& keep) {
  Dataset out;
  out.vocabulary = dataset.vocabulary;
  std::set<std::string> news_ids;
  for (std::size_t i : keep) {
    out.news.push_back(dataset.news[i]);
    news_ids.insert(dataset.news[i].id);
  }
  for (const auto& [id, c] : dataset.comments) {
    if (news_ids.count(c.news_id) == 0) continue;
    out.comments.emplace(id, c);
    out.users.emplace(c.user_id, dataset.users.at(c.user_id));
  }
  return out;
}

}  // namespace

std::string LabelName(Label label) { return label == Label::kFake ? "fake" : "true"; }

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(
      news.begin(), news.end(), [label](const NewsItem& n) { return n.label == label; }));
}

std::map<std::string, std::vector<const Comment*>> Dataset::comments_by_news() const {
  std::map<std::string, std::vector<const Comment*>> out;
  for (const auto& [id, c] : comments) out[c.news_id].push_back(&c);
  for (auto& [news_id, list] : out) {
    std::sort(list.begin(), list.end(), [](const Comment* a, const Comment* b) {
      return std::tie(a->timestamp, a->id) < std::tie(b->timestamp, b->id);
    });
  }
  return out;
}

RawCorpus ReadRawCorpus(const std::filesystem::path& root, const IngestConfig& config,
                        IngestReport* report) {
  IngestReport local;
  IngestReport& r = report != nullptr ? *report : local;
  RawCorpus raw;
  raw.news = ReadJsonLines<RawNews>(root / "news.jsonl", config, r.news_file, DecodeNews);
  if (raw.news.empty()) {
    throw Error(ErrorCode::kMissingContent,
                (root / "news.jsonl").string() + " contains no news records");
  }
  raw.comments =
      ReadJsonLines<RawComment>(root / "comments.jsonl", config, r.comments_file, DecodeComment);
  raw.users = ReadJsonLines<RawUser>(root / "users.jsonl", config, r.users_file, DecodeUser);
  return raw;
}

std::vector<std::string> SplitSentences(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      if (!Trim(current).empty()) out.push_back(Trim(current));
      current.clear();
      continue;
    }
    current.push_back(c);
    if (IsSentenceEnd(c)) {
      // Keep runs like "?!" or "..." together.
      while (i + 1 < text.size() && IsSentenceEnd(text[i + 1])) current.push_back(text[++i]);
      if (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))) {
        if (!Trim(current).empty()) out.push_back(Trim(current));
        current.clear();
      }
    }
  }
  if (!Trim(current).empty()) out.push_back(Trim(current));
  return out;
}

Dataset BuildDataset(const RawCorpus& raw, const IngestConfig& config, IngestReport* report) {
  IngestReport local;
  IngestReport& r = report != nullptr ? *report : local;

  // Exact-id collisions: first record wins.
  std::vector<const RawNews*> news;
  std::vector<const RawComment*> comments;
  std::map<std::string, const RawUser*> users;
  {
    std::set<std::string> seen;
    for (const RawNews& n : raw.news) {
      if (seen.insert(n.id).second) {
        news.push_back(&n);
      } else {
        ++r.duplicate_ids;
      }
    }
    seen.clear();
    for (const RawComment& c : raw.comments) {
      if (seen.insert(c.id).second) {
        comments.push_back(&c);
      } else {
        ++r.duplicate_ids;
      }
    }
    for (const RawUser& u : raw.users) {
      if (!users.emplace(u.id, &u).second) ++r.duplicate_ids;
    }
  }

  std::vector<std::string> corpus;
  corpus.reserve(news.size() + comments.size());
  for (const RawNews* n : news) corpus.push_back(n->text);
  for (const RawComment* c : comments) corpus.push_back(c->text);

  Dataset ds;
  ds.vocabulary = Vocabulary::Build(corpus, config.min_freq);

  std::set<std::string> kept_news;
  for (const RawNews* n : news) {
    NewsItem item;
    item.id = n->id;
    item.label = n->label;
    for (const std::string& sentence : SplitSentences(n->text)) {
      if (static_cast<int>(item.sentences.size()) == config.max_news_sentences) break;
      std::vector<TokenId> ids = Tokenize(sentence, ds.vocabulary, config.max_sentence_words);
      if (ids.empty()) continue;
      item.sentences.push_back(std::move(ids));
      item.raw_sentences.push_back(sentence);
    }
    if (item.sentences.empty()) {
      ++r.dropped_empty_news;
      continue;
    }
    kept_news.insert(item.id);
    ds.news.push_back(std::move(item));
  }

  for (const RawComment* c : comments) {
    if (kept_news.count(c->news_id) == 0 || users.count(c->user_id) == 0) {
      ++r.dropped_dangling_comments;
      continue;
    }
    Comment comment;
    comment.id = c->id;
    comment.news_id = c->news_id;
    comment.user_id = c->user_id;
    comment.timestamp = c->timestamp;
    comment.attributes = c->attributes;
    comment.text = c->text;
    comment.tokens = Tokenize(c->text, ds.vocabulary, config.max_comment_words);
    if (comment.tokens.empty()) {
      ++r.dropped_empty_comments;
      continue;
    }
    ds.comments.emplace(comment.id, std::move(comment));
  }

  std::set<std::string> referenced;
  for (const auto& [id, c] : ds.comments) referenced.insert(c.user_id);
  for (const auto& [id, u] : users) {
    if (referenced.count(id) == 0) {
      ++r.dropped_unreferenced_users;
      continue;
    }
    ds.users.emplace(id, User{u->id, u->attributes});
  }

  r.true_news = ds.count(Label::kTrue);
  r.fake_news = ds.count(Label::kFake);
  r.users = ds.users.size();
  r.comments = ds.comments.size();
  r.comment_user_edges = ds.comments.size();
  const auto by_news = ds.comments_by_news();
  r.news_without_comments = 0;
  for (const NewsItem& n : ds.news) {
    if (by_news.count(n.id) == 0) ++r.news_without_comments;
  }
  r.vocabulary_size = static_cast<std::size_t>(ds.vocabulary.size());
  return ds;
}

Dataset ParseDataset(const std::filesystem::path& root, const IngestConfig& config,
                     IngestReport* report) {
  IngestReport local;
  IngestReport& r = report != nullptr ? *report : local;
  const RawCorpus raw = ReadRawCorpus(root, config, &r);
  return BuildDataset(raw, config, &r);
}

void WriteRawCorpus(const std::filesystem::path& root, const RawCorpus& raw) {
  std::filesystem::create_directories(root);
  std::ostringstream news;
  for (const RawNews& n : raw.news) {
    news << json{{"id", n.id}, {"text", n.text}, {"label", LabelName(n.label)}}.dump() << "\n";
  }
  std::ostringstream comments;
  for (const RawComment& c : raw.comments) {
    json j;
    j["id"] = c.id;
    j["news_id"] = c.news_id;
    j["user_id"] = c.user_id;
    j["text"] = c.text;
    j["timestamp"] = c.timestamp;
    j["likes"] = c.attributes.likes;
    j["retweets"] = c.attributes.retweets;
    j["replies"] = c.attributes.replies;
    comments << j.dump() << "\n";
  }
  std::ostringstream users;
  for (const RawUser& u : raw.users) {
    json j;
    j["id"] = u.id;
    j["followers"] = u.attributes.followers;
    j["friends"] = u.attributes.friends;
    j["statuses"] = u.attributes.statuses;
    j["verified"] = u.attributes.verified;
    users << j.dump() << "\n";
  }
  WriteTextAtomic(root / "news.jsonl", news.str());
  WriteTextAtomic(root / "comments.jsonl", comments.str());
  WriteTextAtomic(root / "users.jsonl", users.str());
}

int CountBucket(std::int64_t count, const AttributeSpec& spec) {
  if (count < 0) {
    throw Error(ErrorCode::kNegativeCount, "count " + std::to_string(count));
  }
  int bucket = 0;
  for (std::int64_t edge : spec.bucket_edges) {
    if (count >= edge) ++bucket;
  }
  return bucket;
}

std::vector<double> EncodeAttributes(const User& user, const AttributeSpec& spec) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.user_width()));
  AppendOneHot(out, CountBucket(user.attributes.followers, spec), spec.buckets());
  AppendOneHot(out, CountBucket(user.attributes.friends, spec), spec.buckets());
  AppendOneHot(out, CountBucket(user.attributes.statuses, spec), spec.buckets());
  AppendOneHot(out, user.attributes.verified ? 1 : 0, 2);
  return out;
}

std::vector<double> EncodeAttributes(const Comment& comment, const AttributeSpec& spec) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.comment_width()));
  AppendOneHot(out, CountBucket(comment.attributes.likes, spec), spec.buckets());
  AppendOneHot(out, CountBucket(comment.attributes.retweets, spec), spec.buckets());
  AppendOneHot(out, CountBucket(comment.attributes.replies, spec), spec.buckets());
  return out;
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& dataset, double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(MixSeed(seed, 0x5b1170));
  std::vector<std::size_t> train;
  std::vector<std::size_t> valid;
  for (Label label : {Label::kFake, Label::kTrue}) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < dataset.news.size(); ++i) {
      if (dataset.news[i].label == label) group.push_back(i);
    }
    Shuffle(group, rng);
    const auto n_train =
        static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(group.size())));
    train.insert(train.end(), group.begin(), group.begin() + n_train);
    valid.insert(valid.end(), group.begin() + n_train, group.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(valid.begin(), valid.end());
  return {SubsetByNews(dataset, train), SubsetByNews(dataset, valid)};
}

void SaveDatasetCache(const std::filesystem::path& path, const Dataset& dataset) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["vocabulary"] = dataset.vocabulary.tokens();
  auto& news = j["news"] = nlohmann::ordered_json::array();
  for (const NewsItem& n : dataset.news) {
    news.push_back({{"id", n.id},
                    {"label", LabelName(n.label)},
                    {"sentences", n.sentences},
                    {"raw_sentences", n.raw_sentences}});
  }
  auto& comments = j["comments"] = nlohmann::ordered_json::array();
  for (const auto& [id, c] : dataset.comments) {
    comments.push_back({{"id", c.id},
                        {"news_id", c.news_id},
                        {"user_id", c.user_id},
                        {"tokens", c.tokens},
                        {"timestamp", c.timestamp},
                        {"likes", c.attributes.likes},
                        {"retweets", c.attributes.retweets},
                        {"replies", c.attributes.replies},
                        {"text", c.text}});
  }
  auto& users = j["users"] = nlohmann::ordered_json::array();
  for (const auto& [id, u] : dataset.users) {
    users.push_back({{"id", u.id},
                     {"followers", u.attributes.followers},
                     {"friends", u.attributes.friends},
                     {"statuses", u.attributes.statuses},
                     {"verified", u.attributes.verified}});
  }
  WriteTextAtomic(path, j.dump() + "\n");
}

Dataset LoadDatasetCache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  Dataset ds;
  try {
    const json j = json::parse(in);
    if (j.at("format_version").get<int>() != 1) {
      throw Error(ErrorCode::kCorruptFile, path.string() + ": unsupported format_version");
    }
    ds.vocabulary = Vocabulary::FromTokens(j.at("vocabulary").get<std::vector<std::string>>());
    for (const json& n : j.at("news")) {
      NewsItem item;
      item.id = n.at("id");
      item.label = n.at("label") == "fake" ? Label::kFake : Label::kTrue;
      item.sentences = n.at("sentences").get<std::vector<std::vector<TokenId>>>();
      item.raw_sentences = n.at("raw_sentences").get<std::vector<std::string>>();
      ds.news.push_back(std::move(item));
    }
    for (const json& c : j.at("comments")) {
      Comment comment;
      comment.id = c.at("id");
      comment.news_id = c.at("news_id");
      comment.user_id = c.at("user_id");
      comment.tokens = c.at("tokens").get<std::vector<TokenId>>();
      comment.timestamp = c.at("timestamp");
      comment.attributes = {c.at("likes"), c.at("retweets"), c.at("replies")};
      comment.text = c.at("text");
      ds.comments.emplace(comment.id, std::move(comment));
    }
    for (const json& u : j.at("users")) {
      User user;
      user.id = u.at("id");
      user.attributes = {u.at("followers"), u.at("friends"), u.at("statuses"), u.at("verified")};
      ds.users.emplace(user.id, std::move(user));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  for (const auto& [id, c] : ds.comments) {
    if (ds.users.count(c.user_id) == 0) {
      throw Error(ErrorCode::kCorruptFile, "comment " + id + " references unknown user");
    }
  }
  return ds;
}

std::string FormatIngestReport(const IngestReport& r) {
  std::ostringstream out;
  out << "users = " << r.users << "\n"
      << "comment_user_records = " << r.comment_user_edges << "\n"
      << "comments = " << r.comments << "\n"
      << "true_news = " << r.true_news << "\n"
      << "fake_news = " << r.fake_news << "\n"
      << "news_without_comments = " << r.news_without_comments << "\n"
      << "vocabulary_size = " << r.vocabulary_size << "\n"
      << "duplicate_ids = " << r.duplicate_ids << "\n"
      << "dropped_empty_news = " << r.dropped_empty_news << "\n"
      << "dropped_empty_comments = " << r.dropped_empty_comments << "\n"
      << "dropped_dangling_comments = " << r.dropped_dangling_comments << "\n"
      << "dropped_unreferenced_users = " << r.dropped_unreferenced_users << "\n";
  for (const FileStats* f : {&r.news_file, &r.comments_file, &r.users_file}) {
    out << f->file << ".lines = " << f->lines << "\n"
        << f->file << ".parsed = " << f->parsed << "\n"
        << f->file << ".skipped = " << f->skipped << "\n";
    for (const std::string& d : f->diagnostics) out << "# " << d << "\n";
  }
  return out.str();
}

}  // namespace gcal

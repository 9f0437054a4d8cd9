#ifndef GCAL_REPORT_H_
#define GCAL_REPORT_H_

// Plain "key = value" run reports, one entry per line in insertion order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gcal {

class Report {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value);  // shortest round-trip form
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, std::size_t value) {
    set(key, static_cast<std::int64_t>(value));
  }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  // Appends every line of another report under "<prefix>.".
  void merge(const std::string& prefix, const Report& other);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string get(const std::string& key) const;  // "" when absent
  bool contains(const std::string& key) const;

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string FormatDouble(double value);

// Parses "key = value" lines; '#' starts a comment line. Throws
// Error(kMalformedRecord) on a line without '='.
std::map<std::string, std::string> ParseKeyValueText(const std::string& text);
std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path);

}  // namespace gcal

#endif  // GCAL_REPORT_H_

#include "gcal/report.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gcal/container.h"
#include "gcal/error.h"

namespace gcal {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string FormatDouble(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void Report::set(const std::string& key, const std::string& value) {
  for (auto& entry : entries_) {
    if (entry.first == key) {
      entry.second = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, FormatDouble(value)); }

void Report::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }

void Report::merge(const std::string& prefix, const Report& other) {
  for (const auto& [key, value] : other.entries_) set(prefix + "." + key, value);
}

std::string Report::get(const std::string& key) const {
  for (const auto& entry : entries_) {
    if (entry.first == key) return entry.second;
  }
  return "";
}

bool Report::contains(const std::string& key) const {
  for (const auto& entry : entries_) {
    if (entry.first == key) return true;
  }
  return false;
}

std::string Report::str() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + " = " + value + "\n";
  return out;
}

void Report::save(const std::filesystem::path& path) const { WriteTextAtomic(path, str()); }

std::map<std::string, std::string> ParseKeyValueText(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(number) + ": expected key = value");
    }
    out[Trim(trimmed.substr(0, eq))] = Trim(trimmed.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> ReadKeyValueFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseKeyValueText(buffer.str());
}

}  // namespace gcal

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace regvar {

// Plain-text key-value run configuration: one `section.key = value` per line,
// '#' starts a comment. Keys are validated against an explicit schema before
// any computation; unknown or duplicate keys are rejected.
class RunConfig {
 public:
  static RunConfig load(const std::string& path, const std::set<std::string>& schema);
  static RunConfig parse(const std::string& text, const std::set<std::string>& schema);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;        // "5,5,10"
  std::vector<double> get_double_list(const std::string& key) const;  // "3,2,1"

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace regvar

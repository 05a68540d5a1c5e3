#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace quadsim {

// Flat `key = value` text files shared by the parameter, gains, trajectory
// and run configuration formats. `#` starts a comment; the `=` is optional.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& name);
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string text(const std::string& key) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> number_list(const std::string& key) const;

  // Throws ConfigError if the file holds keys that were never read.
  void reject_unknown_keys() const;

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

}  // namespace quadsim

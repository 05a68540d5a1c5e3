#include "quadsim/keyvalue.hpp"

#include <fstream>
#include <sstream>

#include "quadsim/errors.hpp"

namespace quadsim {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& name, const std::string& key,
                    const std::string& value) {
  std::size_t used = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) {
    throw ConfigError(name + ": key '" + key + "' has non-numeric value '" +
                      value + "'");
  }
  return parsed;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& name) {
  KeyValueFile kv;
  kv.name_ = name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::string key, value;
    if (const auto eq = line.find('='); eq != std::string::npos) {
      key = trim(line.substr(0, eq));
      value = trim(line.substr(eq + 1));
    } else {
      const auto ws = line.find_first_of(" \t");
      if (ws == std::string::npos) {
        throw ConfigError(name + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
      }
      key = trim(line.substr(0, ws));
      value = trim(line.substr(ws + 1));
    }
    if (key.empty() || value.empty()) {
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    if (kv.values_.count(key) != 0) {
      throw ConfigError(name + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    }
    kv.values_[key] = value;
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open file: " + path.string());
  }
  return parse(in, path.string());
}

bool KeyValueFile::has(const std::string& key) const {
  return values_.count(key) != 0;
}

double KeyValueFile::number(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  }
  consumed_.insert(key);
  return parse_number(name_, key, it->second);
}

double KeyValueFile::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::string KeyValueFile::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(name_ + ": missing required key '" + key + "'");
  }
  consumed_.insert(key);
  return it->second;
}

std::string KeyValueFile::text_or(const std::string& key,
                                  const std::string& fallback) const {
  return has(key) ? text(key) : fallback;
}

std::vector<double> KeyValueFile::number_list(const std::string& key) const {
  std::istringstream stream(text(key));
  std::vector<double> out;
  std::string item;
  while (stream >> item) {
    if (item == ",") continue;
    if (!item.empty() && item.back() == ',') item.pop_back();
    if (item.empty()) continue;
    out.push_back(parse_number(name_, key, item));
  }
  return out;
}

void KeyValueFile::reject_unknown_keys() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key) == 0) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(name_ + ": unknown keys: " + unknown);
  }
}

}  // namespace quadsim

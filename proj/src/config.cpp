#include "config.hpp"

#include <fstream>
#include <sstream>

namespace ernn {

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": line " + std::to_string(line_no) +
                        ": expected `key = value`");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ": line " + std::to_string(line_no) +
                        ": empty key");
    config.entries_[key] = value;
  }
  return config;
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::require(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError("missing required config key: " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key) const {
  return require(key);
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(require(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not a number");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  try {
    return std::stoi(require(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not an integer");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

uint64_t Config::get_uint64(const std::string& key, uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(require(key));
  } catch (const std::logic_error&) {
    throw ConfigError("config key " + key + " is not an unsigned integer");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  std::string v = require(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::vector<double> Config::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> values;
  std::istringstream ss(require(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(trim(item)));
    } catch (const std::logic_error&) {
      throw ConfigError("config key " + key + " has a non-numeric item: " + item);
    }
  }
  if (values.empty()) throw ConfigError("config key " + key + " is empty");
  return values;
}

}  // namespace ernn

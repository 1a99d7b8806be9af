#include "ksmz/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ksmz {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw std::runtime_error("config: malformed section at line " + std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      cfg.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(lineno));
    cfg.sections_[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end() || s->second.count(key) == 0)
    throw std::runtime_error("config: missing [" + section + "] " + key);
  return s->second.at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (trim(v.substr(pos)) != "")
    throw std::runtime_error("config: [" + section + "] " + key + " is not a number: " + v);
  return x;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  std::size_t pos = 0;
  const long x = std::stol(v, &pos, 10);
  if (trim(v.substr(pos)) != "")
    throw std::runtime_error("config: [" + section + "] " + key + " is not an integer: " + v);
  return x;
}

long Config::get_long(const std::string& section, const std::string& key, long fallback) const {
  return has(section, key) ? get_long(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get_string(section, key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw std::runtime_error("config: [" + section + "] " + key + " is not a boolean: " + v);
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key) const {
  std::vector<int> out;
  std::string v = get_string(section, key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  int x;
  while (in >> x) out.push_back(x);
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

}  // namespace ksmz

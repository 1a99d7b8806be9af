#ifndef KSMZ_CONFIG_HPP
#define KSMZ_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ksmz {

/// Plain-text `key = value` configuration grouped into [section] blocks.
/// Lines starting with # or ; are comments.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace ksmz

#endif

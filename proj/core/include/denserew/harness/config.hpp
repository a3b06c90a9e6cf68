#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace denserew::harness {

/// Line-oriented `key = value` file. `[section]` headers prefix the keys
/// that follow them ("section.key"); `#` and `;` start comments.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load_file(const std::string& path);

  bool contains(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list.
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;

  /// Throws InvalidArgument naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

/// "1..5" (inclusive range), "1,2,7" (list) or "20" (seeds 0..19). A
/// single explicit seed is written "7..7".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace denserew::harness

#include "denserew/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "denserew/error.hpp"

namespace denserew::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw Error(Errc::ParseError, "value of '" + key + "' is not a valid number: '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(trim(part));
  return out;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::string section;
  std::istringstream in(text);
  std::size_t lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": empty key");
    c.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::int64_t>(key, it->second);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::ParseError, "value of '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, std::vector<double> fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const auto& part : split(it->second, ',')) out.push_back(parse_number<double>(key, part));
  return out;
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_)
    if (!known.contains(k)) throw Error(Errc::InvalidArgument, "unknown config key '" + k + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  const std::string whole = trim(text);
  if (!whole.empty() && whole.find_first_of(",.") == std::string::npos) {
    const auto count = parse_number<std::uint64_t>("seeds", whole);
    if (count == 0) throw Error(Errc::ParseError, "seed count must be positive");
    for (std::uint64_t s = 0; s < count; ++s) out.push_back(s);
    return out;
  }
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    if (const auto dots = part.find(".."); dots != std::string::npos) {
      const auto lo = parse_number<std::uint64_t>("seeds", trim(part.substr(0, dots)));
      const auto hi = parse_number<std::uint64_t>("seeds", trim(part.substr(dots + 2)));
      if (hi < lo) throw Error(Errc::ParseError, "seed range " + part + " is reversed");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_number<std::uint64_t>("seeds", part));
    }
  }
  if (out.empty()) throw Error(Errc::ParseError, "empty seed list");
  return out;
}

}  // namespace denserew::harness

#pragma once

// "key=value" text documents (one pair per line, '#' starts a comment).
// Used by the datacube sidecar header and the formation config.

#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mrca {

class KeyValues
{
public:
  static KeyValues parse(std::istream& in, const std::string& what = "config")
  {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument(what + ":" + std::to_string(lineno) + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw std::invalid_argument(what + ":" + std::to_string(lineno) + ": empty key");
      if (kv.values_.count(key))
        throw std::invalid_argument(what + ": duplicate key '" + key + "'");
      kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
  }

  static KeyValues parse_string(const std::string& text, const std::string& what = "config")
  {
    std::istringstream in(text);
    return parse(in, what);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::string& get(const std::string& key) const
  {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("missing key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const
  {
    return has(key) ? get(key) : fallback;
  }

  double get_double(const std::string& key) const
  {
    const auto& s = get(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty())
      throw std::invalid_argument("key '" + key + "': '" + s + "' is not a number");
    return v;
  }

  std::uint64_t get_uint(const std::string& key) const
  {
    const auto& s = get(key);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("key '" + key + "': '" + s + "' is not a non-negative integer");
    return std::stoull(s);
  }

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  std::string str() const
  {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
  }

private:
  static std::string trim(const std::string& s)
  {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, std::string> values_;
};

/// Shortest round-trip representation of a double.
inline std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the short form when it parses back exactly.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[64];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

} // namespace mrca

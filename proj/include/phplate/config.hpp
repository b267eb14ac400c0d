#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phplate {

/// Configuration problem with the offending line (0 if unknown) and key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& message)
      : std::runtime_error(format(source, line, field, message)), line_(line), field_(field) {}
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& source, int line, const std::string& field,
                            const std::string& message) {
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += ": [" + field + "]";
    return out + ": " + message;
  }
  int line_;
  std::string field_;
};

/// Sectioned key = value text. '#' and ';' start comments; keys outside any
/// section are errors. Every key must be consumed (finish() reports the
/// first unused one).
class IniDocument {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
  };

  static IniDocument parse(std::istream& in, std::string source = "<config>") {
    IniDocument doc;
    doc.source_ = std::move(source);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto cut = raw.find_first_of("#;");
      std::string text = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
      if (text.empty()) continue;
      if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError(doc.source_, line, "", "unterminated section header");
        section = trim(text.substr(1, text.size() - 2));
        if (section.empty()) throw ConfigError(doc.source_, line, "", "empty section name");
        doc.sections_[section];
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ConfigError(doc.source_, line, "", "expected 'key = value'");
      const std::string key = trim(text.substr(0, eq)), value = trim(text.substr(eq + 1));
      if (section.empty()) throw ConfigError(doc.source_, line, key, "key outside of a section");
      if (key.empty()) throw ConfigError(doc.source_, line, "", "empty key");
      auto& keys = doc.sections_[section];
      if (keys.count(key)) throw ConfigError(doc.source_, line, section + "." + key, "duplicate key");
      keys[key] = Entry{value, line, false};
    }
    return doc;
  }

  static IniDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open config file");
    return parse(in, path);
  }

  const std::string& source() const { return source_; }
  bool has_section(const std::string& s) const { return sections_.count(s) > 0; }
  bool has(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    return it != sections_.end() && it->second.count(k) > 0;
  }

  std::optional<std::string> raw(const std::string& s, const std::string& k) {
    auto it = sections_.find(s);
    if (it == sections_.end()) return std::nullopt;
    auto e = it->second.find(k);
    if (e == it->second.end()) return std::nullopt;
    e->second.used = true;
    return e->second.value;
  }

  int line_of(const std::string& s, const std::string& k) const {
    auto it = sections_.find(s);
    if (it == sections_.end()) return 0;
    auto e = it->second.find(k);
    return e == it->second.end() ? 0 : e->second.line;
  }

  std::string get_string(const std::string& s, const std::string& k, const std::string& fallback) {
    return raw(s, k).value_or(fallback);
  }
  std::string require_string(const std::string& s, const std::string& k) {
    auto v = raw(s, k);
    if (!v) throw ConfigError(source_, 0, s + "." + k, "missing required key");
    return *v;
  }

  double get_double(const std::string& s, const std::string& k, double fallback) {
    auto v = raw(s, k);
    return v ? to_double(s, k, *v) : fallback;
  }
  double require_double(const std::string& s, const std::string& k) {
    return to_double(s, k, require_string(s, k));
  }
  int get_int(const std::string& s, const std::string& k, int fallback) {
    auto v = raw(s, k);
    return v ? to_int(s, k, *v) : fallback;
  }

  /// Errors on a value that is not one of `choices`.
  std::string get_choice(const std::string& s, const std::string& k, const std::string& fallback,
                         const std::vector<std::string>& choices) {
    const std::string v = get_string(s, k, fallback);
    for (const auto& c : choices)
      if (c == v) return v;
    std::string list;
    for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
    fail(s, k, "invalid value '" + v + "' (expected one of: " + list + ")");
  }

  [[noreturn]] void fail(const std::string& s, const std::string& k, const std::string& message) const {
    throw ConfigError(source_, line_of(s, k), s + (k.empty() ? "" : "." + k), message);
  }

  void finish() const {
    for (const auto& [section, keys] : sections_)
      for (const auto& [key, entry] : keys)
        if (!entry.used) throw ConfigError(source_, entry.line, section + "." + key, "unknown key");
  }

 private:
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }

  double to_double(const std::string& s, const std::string& k, const std::string& v) const {
    std::size_t pos = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size()) fail(s, k, "expected a number, got '" + v + "'");
    return out;
  }

  int to_int(const std::string& s, const std::string& k, const std::string& v) const {
    std::size_t pos = 0;
    int out = 0;
    try {
      out = std::stoi(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v.size()) fail(s, k, "expected an integer, got '" + v + "'");
    return out;
  }

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace phplate

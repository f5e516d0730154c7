#include "manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "textio.hpp"

namespace rcg {

Manifest Manifest::parse(std::istream& in, const std::string& source) {
  Manifest m;
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    const std::string body = textio::trim(line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3)
        fail(ErrorCode::Parse, where + ": malformed section header '" + body + "'");
      section = textio::trim(body.substr(1, body.size() - 2));
      m.entries_[section];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Parse, where + ": expected 'key = value'");
    if (section.empty()) fail(ErrorCode::Parse, where + ": key outside of any [section]");
    const std::string key = textio::trim(body.substr(0, eq));
    const std::string value = textio::trim(body.substr(eq + 1));
    if (key.empty()) fail(ErrorCode::Parse, where + ": empty key");
    if (m.entries_[section].count(key))
      fail(ErrorCode::Parse, where + ": duplicate key '" + section + "." + key + "'");
    m.entries_[section][key] = {value, where};
  }
  return m;
}

Manifest Manifest::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest '" + path + "'");
  Manifest m = parse(in, path);
  m.base_dir_ = std::filesystem::path(path).parent_path().string();
  return m;
}

std::string Manifest::resolve_path(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir_.empty()) return path;
  return (std::filesystem::path(base_dir_) / p).string();
}

void Manifest::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    fail(ErrorCode::Parse, "override '" + assignment + "': expected section.key=value");
  const std::string section = textio::trim(assignment.substr(0, dot));
  const std::string key = textio::trim(assignment.substr(dot + 1, eq - dot - 1));
  if (section.empty() || key.empty())
    fail(ErrorCode::Parse, "override '" + assignment + "': empty section or key");
  entries_[section][key] = {textio::trim(assignment.substr(eq + 1)), "override"};
}

void Manifest::merge_section(const Manifest& other, const std::string& section) {
  const auto it = other.entries_.find(section);
  if (it == other.entries_.end()) return;
  for (const auto& [k, e] : it->second) entries_[section].emplace(k, e);
}

void Manifest::merge_section(const Manifest& other, const std::string& from, const std::string& to,
                             const std::map<std::string, std::string>& keys) {
  const auto it = other.entries_.find(from);
  if (it == other.entries_.end()) return;
  for (const auto& [k, e] : it->second) {
    const auto target = keys.find(k);
    if (target == keys.end()) fail(ErrorCode::Parse, e.origin + ": unknown field '" + from + "." + k + "'");
    entries_[to].emplace(target->second, e);
  }
}

std::vector<std::string> Manifest::sections() const {
  std::vector<std::string> out;
  for (const auto& [s, keys] : entries_) out.push_back(s);
  return out;
}

const Manifest::Entry* Manifest::find(const std::string& section, const std::string& key) const {
  const auto s = entries_.find(section);
  if (s == entries_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool Manifest::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

bool Manifest::has_section(const std::string& section) const { return entries_.count(section) > 0; }

void Manifest::field_error(const std::string& section, const std::string& key,
                           const std::string& what) const {
  const Entry* e = find(section, key);
  const std::string where = e ? e->origin + ": " : std::string();
  fail(ErrorCode::Parse, where + "field '" + section + "." + key + "': " + what);
}

void Manifest::record(const std::string& section, const std::string& key,
                      const std::string& value) const {
  resolved_[section][key] = value;
}

std::string Manifest::get_string(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) fail(ErrorCode::Parse, "missing required field '" + section + "." + key + "'");
  record(section, key, e->value);
  return e->value;
}

std::string Manifest::get_string(const std::string& section, const std::string& key,
                                 const std::string& fallback) const {
  const Entry* e = find(section, key);
  const std::string v = e ? e->value : fallback;
  record(section, key, v);
  return v;
}

double Manifest::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    return textio::parse_double(v, section + "." + key);
  } catch (const Error&) {
    field_error(section, key, "not a number: '" + v + "'");
  }
}

double Manifest::get_double(const std::string& section, const std::string& key,
                            double fallback) const {
  if (!has(section, key)) {
    record(section, key, textio::format_shortest(fallback));
    return fallback;
  }
  return get_double(section, key);
}

long long Manifest::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    return textio::parse_int(v, section + "." + key);
  } catch (const Error&) {
    field_error(section, key, "not an integer: '" + v + "'");
  }
}

long long Manifest::get_int(const std::string& section, const std::string& key,
                            long long fallback) const {
  if (!has(section, key)) {
    record(section, key, std::to_string(fallback));
    return fallback;
  }
  return get_int(section, key);
}

std::uint64_t Manifest::get_uint64(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  std::size_t pos = 0;
  std::uint64_t out = 0;
  try {
    if (!v.empty() && v[0] != '-') out = std::stoull(v, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) field_error(section, key, "not an unsigned integer: '" + v + "'");
  return out;
}

std::uint64_t Manifest::get_uint64(const std::string& section, const std::string& key,
                                   std::uint64_t fallback) const {
  if (!has(section, key)) {
    record(section, key, std::to_string(fallback));
    return fallback;
  }
  return get_uint64(section, key);
}

bool Manifest::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const std::string v = get_string(section, key, fallback ? "true" : "false");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  field_error(section, key, "not a boolean: '" + v + "'");
}

std::vector<double> Manifest::get_doubles(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    return textio::parse_doubles(v, section + "." + key);
  } catch (const Error&) {
    field_error(section, key, "not a list of numbers: '" + v + "'");
  }
}

std::vector<double> Manifest::get_doubles(const std::string& section, const std::string& key,
                                          const std::vector<double>& fallback) const {
  if (!has(section, key)) {
    std::string joined;
    for (double v : fallback) joined += (joined.empty() ? "" : " ") + textio::format_shortest(v);
    record(section, key, joined);
    return fallback;
  }
  return get_doubles(section, key);
}

std::vector<std::string> Manifest::get_words(const std::string& section, const std::string& key,
                                             const std::vector<std::string>& fallback) const {
  if (!has(section, key)) {
    std::string joined;
    for (const auto& w : fallback) joined += (joined.empty() ? "" : " ") + w;
    record(section, key, joined);
    return fallback;
  }
  return textio::split_ws(get_string(section, key));
}

void Manifest::check_all_used() const {
  for (const auto& [section, keys] : entries_) {
    for (const auto& [key, e] : keys) {
      const auto s = resolved_.find(section);
      if (s == resolved_.end() || !s->second.count(key))
        fail(ErrorCode::Parse, e.origin + ": unknown field '" + section + "." + key + "'");
    }
  }
}

std::string Manifest::resolved_text() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : resolved_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : keys) out << key << " = " << value << "\n";
  }
  return out.str();
}

}  // namespace rcg

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rcg {

// Key-value experiment manifest:
//
//   # comment
//   [section]
//   key = value
//
// Every lookup records the value actually used (including defaults) so the
// resolved manifest can be echoed; keys that are never read are reported as
// unknown by check_all_used().
class Manifest {
 public:
  static Manifest parse(std::istream& in, const std::string& source = "manifest");
  static Manifest parse_file(const std::string& path);

  // "section.key=value"; creates the entry if missing.
  void apply_override(const std::string& assignment);
  // Pulls the keys of another manifest's [section] in, without overwriting.
  void merge_section(const Manifest& other, const std::string& section);
  // Same, reading other's [from] into [to] with keys renamed by `keys`
  // (source key -> target key); a source key missing from the map is an error.
  void merge_section(const Manifest& other, const std::string& from, const std::string& to,
                     const std::map<std::string, std::string>& keys);
  std::vector<std::string> sections() const;

  // Relative paths inside the manifest are taken relative to its directory.
  std::string resolve_path(const std::string& path) const;
  const std::string& base_dir() const { return base_dir_; }

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  std::uint64_t get_uint64(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint64(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_words(const std::string& section, const std::string& key,
                                     const std::vector<std::string>& fallback) const;

  // Throws a Parse error naming the first key that was never read.
  void check_all_used() const;
  // Sections and keys in sorted order, values as resolved.
  std::string resolved_text() const;
  const std::map<std::string, std::map<std::string, std::string>>& resolved() const {
    return resolved_;
  }

 private:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "override"
  };
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void field_error(const std::string& section, const std::string& key,
                                const std::string& what) const;
  void record(const std::string& section, const std::string& key, const std::string& value) const;

  std::map<std::string, std::map<std::string, Entry>> entries_;
  std::string base_dir_;
  mutable std::map<std::string, std::map<std::string, std::string>> resolved_;
};

}  // namespace rcg

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Flat key=value configuration. Layers are merged in order of precedence:
// built-in defaults, then a config file, then command-line flags; the last
// assignment of a key wins.
namespace mitk {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Settings {
 public:
  // Throws ConfigError for keys outside known_keys().
  void set(const std::string& key, const std::string& value);
  // Lines of `key = value`; '#' starts a comment. Errors name the line.
  void load_file(const std::filesystem::path& path);
  void load_text(std::string_view text, const std::string& origin = "<text>");
  // Entries of `over` replace ours.
  void merge(const Settings& over);

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const;
  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }
  // Sorted `key=value` lines.
  [[nodiscard]] std::string to_text() const;

  [[nodiscard]] static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

// Name of the environment variable that supplies the default seed.
inline constexpr const char* kSeedEnvVar = "MITK_SEED";

// Value typed accessors; all throw ConfigError naming the key on bad input.
double parse_real(const std::string& key, const std::string& text);
std::size_t parse_count(const std::string& key, const std::string& text);
std::vector<std::size_t> parse_widths(const std::string& key, const std::string& text);
std::vector<std::string> parse_list(const std::string& text);

}  // namespace mitk

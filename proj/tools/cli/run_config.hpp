#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mellin_deconv::cli {

/// Bad command line, configuration or input file.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { integer, real, text, boolean, real_list, integer_list };

struct Key {
  std::string name;
  Kind kind;
  nlohmann::json fallback;
  std::string help;
};

/// Keys accepted by one subcommand, in display order.
const std::vector<Key>& schema(const std::string& command);

/// Flag spelling of a key: "slope_tol" -> "--slope-tol".
std::string flag_name(const std::string& key);

/// Flat key/value run configuration. Defaults, then the config file, then
/// flags; every stage is checked against the schema.
class RunConfig {
 public:
  explicit RunConfig(std::string command);

  /// Merges a JSON object; unknown keys and wrongly typed values throw.
  void merge(const nlohmann::json& doc);
  /// Parses a flag value according to the key's kind.
  void set_from_text(const std::string& key, const std::string& text);

  const std::string& command() const { return command_; }
  /// The document echoed by --dump-config; it re-parses to the same run.
  nlohmann::json dump() const;

  bool is_null(const std::string& key) const;
  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;
  std::vector<std::size_t> integer_list(const std::string& key) const;

 private:
  const Key& key(const std::string& name) const;
  void assign(const Key& k, const nlohmann::json& value);
  const nlohmann::json& value(const std::string& name) const;

  std::string command_;
  std::map<std::string, nlohmann::json> values_;
};

/// Reads a JSON config file; it must hold one object.
nlohmann::json read_config_file(const std::string& path);

}  // namespace mellin_deconv::cli

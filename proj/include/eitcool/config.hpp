#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eitcool/errors.hpp"

namespace eitcool {

// Thrown for syntax and schema problems. line is 0 when the problem is not
// tied to one line (e.g. a missing required key).
class ConfigError : public Error {
 public:
  ConfigError(std::string message, std::string key, std::size_t line = 0);
  const std::string& key() const { return key_; }
  std::size_t line() const { return line_; }

 private:
  std::string key_;
  std::size_t line_;
};

enum class ValueKind { Number, Text, NumberList, TextList };

struct KeySpec {
  std::string_view key;
  ValueKind kind;
  // Empty: no default. For a required key this means the file must set it;
  // for an optional key the value simply stays unset.
  std::string_view default_value;
  bool required;
  std::string_view help;
};

// The complete schema, in the order keys are echoed to the provenance log.
const std::vector<KeySpec>& config_schema();

enum class ValueSource { File, Default, Derived };
std::string_view to_string(ValueSource s);

struct ProvenanceEntry {
  std::string key;
  std::string value;
  ValueSource source;
};

// Flat dotted-key configuration after parsing and schema checks. Values keep
// their text form; typed accessors convert on demand.
class ConfigFile {
 public:
  static ConfigFile parse(std::string_view text, std::string name = "<string>");
  static ConfigFile load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }

  bool has(std::string_view key) const;
  double number(std::string_view key) const;
  std::optional<double> optional_number(std::string_view key) const;
  std::string text_value(std::string_view key) const;
  std::vector<double> number_list(std::string_view key) const;
  std::vector<std::string> text_list(std::string_view key) const;

  // Every key that has a value, with where it came from.
  std::vector<ProvenanceEntry> provenance() const;

 private:
  struct Value {
    std::string text;
    std::size_t line;  // 0 for defaults
    ValueSource source;
  };
  const Value& value(std::string_view key) const;

  std::string name_;
  std::string text_;
  std::map<std::string, Value, std::less<>> values_;
};

// Edit distance, used for "did you mean" suggestions.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::string nearest_key(std::string_view key);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace eitcool

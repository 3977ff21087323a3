#pragma once
// Minimal INI reader: [section] headers, key = value pairs, # or ; comments,
// with line numbers kept for error reporting.
#include <string>
#include <vector>

namespace tcar {

struct IniEntry {
  std::string key, value;
  int line = 0;
};

struct IniSection {
  std::string name;
  int line = 0;
  std::vector<IniEntry> entries;
};

struct IniDoc {
  std::vector<IniSection> sections;
  const IniSection* find(const std::string& name) const;
};

// origin names the source (file path) in error messages.
IniDoc parse_ini(const std::string& text, const std::string& origin);

}  // namespace tcar

#include "tcar/ini.hpp"

#include <algorithm>

#include "tcar/errors.hpp"

namespace tcar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw validation_error(origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

const IniSection* IniDoc::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

IniDoc parse_ini(const std::string& text, const std::string& origin) {
  IniDoc doc;
  int line = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line;

    const size_t cmt = raw.find_first_of("#;");
    if (cmt != std::string::npos) raw.erase(cmt);
    const std::string s = trim(raw);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (name.empty()) fail(origin, line, "empty section name");
      doc.sections.push_back({name, line, {}});
      continue;
    }

    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(origin, line, "empty key");
    if (doc.sections.empty()) fail(origin, line, "key '" + key + "' outside any section");
    doc.sections.back().entries.push_back({key, value, line});
  }
  return doc;
}

}  // namespace tcar

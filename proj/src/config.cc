// Copyright 2026 The VOCA-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voca/config.h"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "voca/binary_io.h"
#include "voca/error.h"

namespace voca {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

int ParseInt(std::string_view text, std::string_view what) {
  const std::string t = Trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  Require(!t.empty() && *end == '\0' && errno == 0 && v >= INT32_MIN &&
              v <= INT32_MAX,
          ErrorCode::kConfiguration,
          std::string(what) + ": expected an integer, got '" + t + "'");
  return static_cast<int>(v);
}

double ParseDouble(std::string_view text, std::string_view what) {
  const std::string t = Trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  Require(!t.empty() && *end == '\0' && errno != ERANGE,
          ErrorCode::kConfiguration,
          std::string(what) + ": expected a number, got '" + t + "'");
  return v;
}

std::vector<double> ParseDoubleList(std::string_view text,
                                    std::string_view what) {
  std::string t(text);
  for (char& ch : t) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(t);
  std::vector<double> out;
  for (std::string item; in >> item;) out.push_back(ParseDouble(item, what));
  return out;
}

KeyValueFile KeyValueFile::Parse(std::string_view text) {
  KeyValueFile out;
  std::istringstream in{std::string(text)};
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (t.front() == '[') {
      Require(t.back() == ']' && t.size() > 2, ErrorCode::kConfiguration,
              where + ": malformed section header");
      section = Trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    Require(eq != std::string::npos, ErrorCode::kConfiguration,
            where + ": expected key = value");
    const std::string key = Trim(std::string_view(t).substr(0, eq));
    Require(!key.empty(), ErrorCode::kConfiguration, where + ": empty key");
    out.sections_[section][key] = Trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

bool KeyValueFile::Has(const std::string& section,
                       const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key);
}

const std::string& KeyValueFile::Get(const std::string& section,
                                     const std::string& key) const {
  auto s = sections_.find(section);
  if (s != sections_.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  Fail(ErrorCode::kConfiguration,
       "missing key '" + (section.empty() ? key : section + "." + key) + "'");
}

std::string KeyValueFile::GetOr(const std::string& section,
                                const std::string& key,
                                const std::string& fallback) const {
  return Has(section, key) ? Get(section, key) : fallback;
}

int KeyValueFile::GetInt(const std::string& section,
                         const std::string& key) const {
  return ParseInt(Get(section, key), section + "." + key);
}

double KeyValueFile::GetDouble(const std::string& section,
                               const std::string& key) const {
  return ParseDouble(Get(section, key), section + "." + key);
}

std::vector<double> KeyValueFile::GetDoubles(const std::string& section,
                                             const std::string& key) const {
  return ParseDoubleList(Get(section, key), section + "." + key);
}

void KeyValueFile::Set(const std::string& section, const std::string& key,
                       const std::string& value) {
  sections_[section][key] = value;
}

void KeyValueFile::ApplyOverride(std::string_view assignment) {
  const auto eq = assignment.find('=');
  Require(eq != std::string_view::npos, ErrorCode::kConfiguration,
          "override '" + std::string(assignment) + "' lacks '='");
  const std::string lhs = Trim(assignment.substr(0, eq));
  const auto dot = lhs.rfind('.');
  const std::string section = dot == std::string::npos ? "" : lhs.substr(0, dot);
  const std::string key = dot == std::string::npos ? lhs : lhs.substr(dot + 1);
  Require(!key.empty(), ErrorCode::kConfiguration,
          "override '" + std::string(assignment) + "' has an empty key");
  Set(section, key, Trim(assignment.substr(eq + 1)));
}

std::string KeyValueFile::Format() const {
  std::string out;
  for (const auto& [section, keys] : sections_) {
    if (!section.empty()) out += "[" + section + "]\n";
    for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
  }
  return out;
}

KeyValueFile ReadKeyValueFile(const std::filesystem::path& path) {
  const std::vector<char> bytes = ReadFileBytes(path);
  return KeyValueFile::Parse(std::string_view(bytes.data(), bytes.size()));
}

}  // namespace voca

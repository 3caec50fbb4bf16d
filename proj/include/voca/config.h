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

#ifndef VOCA_CONFIG_H_
#define VOCA_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace voca {

std::string Trim(std::string_view s);

// Flat "key = value" text with optional [section] headers. Keys before the
// first header live in section "". '#' starts a comment.
class KeyValueFile {
 public:
  static KeyValueFile Parse(std::string_view text);

  bool Has(const std::string& section, const std::string& key) const;
  // Missing keys are configuration errors.
  const std::string& Get(const std::string& section,
                         const std::string& key) const;
  std::string GetOr(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
  int GetInt(const std::string& section, const std::string& key) const;
  double GetDouble(const std::string& section, const std::string& key) const;
  // Comma or whitespace separated.
  std::vector<double> GetDoubles(const std::string& section,
                                 const std::string& key) const;

  void Set(const std::string& section, const std::string& key,
           const std::string& value);
  // "section.key=value" (or "key=value" for the root section).
  void ApplyOverride(std::string_view assignment);

  const std::map<std::string, std::map<std::string, std::string>>& sections()
      const {
    return sections_;
  }
  std::string Format() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

KeyValueFile ReadKeyValueFile(const std::filesystem::path& path);

int ParseInt(std::string_view text, std::string_view what);
double ParseDouble(std::string_view text, std::string_view what);
std::vector<double> ParseDoubleList(std::string_view text,
                                    std::string_view what);

}  // namespace voca

#endif  // VOCA_CONFIG_H_

// Copyright 2026 The wordpros Authors
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

// "key = value" text files: one entry per line, '#' starts a comment, lists
// are comma separated. Every key must be consumed; leftovers are an error so
// typos do not silently fall back to defaults.

#ifndef WORDPROS_KVCONFIG_H_
#define WORDPROS_KVCONFIG_H_

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace wordpros {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyValues {
 public:
  static KeyValues parse(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void get(const std::string& key, std::string& out);
  void get(const std::string& key, int& out);
  void get(const std::string& key, std::int64_t& out);
  void get(const std::string& key, std::uint64_t& out);
  void get(const std::string& key, double& out);
  void get(const std::string& key, bool& out);
  void get(const std::string& key, std::vector<double>& out);

  /// Throws if any key was never read.
  void finish() const;

 private:
  const std::string* take(const std::string& key);
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace wordpros

#endif  // WORDPROS_KVCONFIG_H_

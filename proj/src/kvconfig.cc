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

#include "wordpros/kvconfig.h"

#include <sstream>

namespace wordpros {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T, typename F>
T convert(const std::string& key, const std::string& v, F f) {
  try {
    std::size_t pos = 0;
    T out = f(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad value for '" + key + "': '" + v + "'");
  }
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (kv.values_.count(key)) throw ConfigError("duplicate key '" + key + "'");
    kv.values_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

const std::string* KeyValues::take(const std::string& key) {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

void KeyValues::get(const std::string& key, std::string& out) {
  if (const auto* v = take(key)) out = *v;
}

void KeyValues::get(const std::string& key, int& out) {
  if (const auto* v = take(key)) {
    out = convert<int>(key, *v, [](const std::string& s, std::size_t* p) { return std::stoi(s, p); });
  }
}

void KeyValues::get(const std::string& key, std::int64_t& out) {
  if (const auto* v = take(key)) {
    out = convert<std::int64_t>(key, *v,
                                [](const std::string& s, std::size_t* p) { return std::stoll(s, p); });
  }
}

void KeyValues::get(const std::string& key, std::uint64_t& out) {
  if (const auto* v = take(key)) {
    out = convert<std::uint64_t>(
        key, *v, [](const std::string& s, std::size_t* p) { return std::stoull(s, p); });
  }
}

void KeyValues::get(const std::string& key, double& out) {
  if (const auto* v = take(key)) {
    out = convert<double>(key, *v, [](const std::string& s, std::size_t* p) { return std::stod(s, p); });
  }
}

void KeyValues::get(const std::string& key, bool& out) {
  if (const auto* v = take(key)) {
    if (*v == "true" || *v == "1" || *v == "yes") {
      out = true;
    } else if (*v == "false" || *v == "0" || *v == "no") {
      out = false;
    } else {
      throw ConfigError("bad boolean for '" + key + "': '" + *v + "'");
    }
  }
}

void KeyValues::get(const std::string& key, std::vector<double>& out) {
  if (const auto* v = take(key)) {
    out.clear();
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      out.push_back(convert<double>(key, item,
                                    [](const std::string& s, std::size_t* p) { return std::stod(s, p); }));
    }
  }
}

void KeyValues::finish() const {
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) throw ConfigError("unknown key '" + k + "'");
  }
}

}  // namespace wordpros

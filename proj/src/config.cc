// fam/config.cc

// Copyright 2026  The factored-am authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fam/config.hh"

#include <fstream>
#include <sstream>

namespace fam {

namespace {
std::string Strip(const std::string &s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}
}  // namespace

Config Config::Parse(const std::string &text) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      FAM_CHECK(line.back() == ']') << "line " << lineno
                                    << ": malformed section header: " << line;
      section = Strip(line.substr(1, line.size() - 2));
      FAM_CHECK(!section.empty()) << "line " << lineno << ": empty section";
      continue;
    }
    size_t eq = line.find('=');
    FAM_CHECK(eq != std::string::npos)
        << "line " << lineno << ": expected key = value, got: " << line;
    std::string key = Strip(line.substr(0, eq));
    std::string value = Strip(line.substr(eq + 1));
    FAM_CHECK(!key.empty()) << "line " << lineno << ": empty key";
    FAM_CHECK(!cfg.values_[section].count(key))
        << "line " << lineno << ": duplicate key [" << section << "] " << key;
    cfg.values_[section][key] = value;
  }
  return cfg;
}

Config Config::ReadFile(const std::string &path) {
  std::ifstream in(path);
  FAM_CHECK(in.good()) << "cannot open config file " << path;
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

const std::string *Config::find(const std::string &section,
                                const std::string &key) const {
  auto s = values_.find(section);
  if (s == values_.end()) return nullptr;
  auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  consumed_[section][key] = true;
  return &k->second;
}

bool Config::has(const std::string &section, const std::string &key) const {
  return find(section, key) != nullptr;
}

std::string Config::get_string(const std::string &section,
                               const std::string &key,
                               const std::string &default_value) const {
  const std::string *v = find(section, key);
  return v ? *v : default_value;
}

int Config::get_int(const std::string &section, const std::string &key,
                    int default_value) const {
  const std::string *v = find(section, key);
  if (!v) return default_value;
  try {
    size_t pos = 0;
    int r = std::stoi(*v, &pos);
    FAM_CHECK(pos == v->size()) << "";
    return r;
  } catch (const std::exception &) {
    throw Error("config [" + section + "] " + key + ": not an integer: " + *v);
  }
}

double Config::get_double(const std::string &section, const std::string &key,
                          double default_value) const {
  const std::string *v = find(section, key);
  if (!v) return default_value;
  try {
    size_t pos = 0;
    double r = std::stod(*v, &pos);
    FAM_CHECK(pos == v->size()) << "";
    return r;
  } catch (const std::exception &) {
    throw Error("config [" + section + "] " + key + ": not a number: " + *v);
  }
}

bool Config::get_bool(const std::string &section, const std::string &key,
                      bool default_value) const {
  const std::string *v = find(section, key);
  if (!v) return default_value;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw Error("config [" + section + "] " + key + ": not a boolean: " + *v);
}

std::vector<double> Config::get_double_list(
    const std::string &section, const std::string &key,
    const std::vector<double> &dflt) const {
  const std::string *v = find(section, key);
  if (!v) return dflt;
  std::vector<double> out;
  std::istringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Strip(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception &) {
      throw Error("config [" + section + "] " + key +
                  ": not a number: " + item);
    }
  }
  FAM_CHECK(!out.empty()) << "config [" << section << "] " << key
                          << ": empty list";
  return out;
}

std::vector<std::string> Config::get_string_list(
    const std::string &section, const std::string &key,
    const std::vector<std::string> &dflt) const {
  const std::string *v = find(section, key);
  if (!v) return dflt;
  std::vector<std::string> out;
  std::istringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Strip(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void Config::set(const std::string &section, const std::string &key,
                 const std::string &value) {
  values_[section][key] = value;
}

void Config::check_all_consumed() const {
  for (const auto &[section, keys] : values_)
    for (const auto &[key, value] : keys)
      if (!consumed_[section][key])
        throw Error("unknown config key [" + section + "] " + key);
}

std::string Config::to_string() const {
  std::ostringstream out;
  for (const auto &[section, keys] : values_) {
    out << "[" << section << "]\n";
    for (const auto &[key, value] : keys) out << key << " = " << value << "\n";
  }
  return out.str();
}

}  // namespace fam

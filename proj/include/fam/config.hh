// fam/config.hh
// Sectioned key=value configuration files with unknown-key rejection.

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

#ifndef FAM_CONFIG_HH_
#define FAM_CONFIG_HH_

#include <map>
#include <string>
#include <vector>

#include "fam/common.hh"

namespace fam {

// Format:
//   [section]
//   key = value        # trailing comments allowed
// Empty lines and lines starting with '#' are ignored.
class Config {
 public:
  Config() = default;
  static Config Parse(const std::string &text);
  static Config ReadFile(const std::string &path);

  bool has(const std::string &section, const std::string &key) const;

  std::string get_string(const std::string &section, const std::string &key,
                         const std::string &default_value) const;
  int get_int(const std::string &section, const std::string &key,
              int default_value) const;
  double get_double(const std::string &section, const std::string &key,
                    double default_value) const;
  bool get_bool(const std::string &section, const std::string &key,
                bool default_value) const;
  // Comma-separated lists.
  std::vector<double> get_double_list(const std::string &section,
                                      const std::string &key,
                                      const std::vector<double> &dflt) const;
  std::vector<std::string> get_string_list(
      const std::string &section, const std::string &key,
      const std::vector<std::string> &dflt) const;

  void set(const std::string &section, const std::string &key,
           const std::string &value);

  // Throws when a key was never requested through a getter (typo safety).
  // Call after all getters ran.
  void check_all_consumed() const;

  std::string to_string() const;

 private:
  const std::string *find(const std::string &section,
                          const std::string &key) const;
  // section -> key -> value
  std::map<std::string, std::map<std::string, std::string>> values_;
  mutable std::map<std::string, std::map<std::string, bool>> consumed_;
};

}  // namespace fam

#endif  // FAM_CONFIG_HH_

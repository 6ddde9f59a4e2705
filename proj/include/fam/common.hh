// fam/common.hh

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

#ifndef FAM_COMMON_HH_
#define FAM_COMMON_HH_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fam {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// FAM_CHECK(cond) << "message";  throws fam::Error when cond is false.
namespace internal {
class CheckStream {
 public:
  CheckStream(const char *cond, const char *file, int line) {
    os_ << file << ":" << line << ": check failed: " << cond << " ";
  }
  template <typename T>
  CheckStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }
  [[noreturn]] ~CheckStream() noexcept(false) { throw Error(os_.str()); }

 private:
  std::ostringstream os_;
};
}  // namespace internal

#define FAM_CHECK(cond)                                       \
  if (cond) {                                                 \
  } else                                                      \
    ::fam::internal::CheckStream(#cond, __FILE__, __LINE__)

#define FAM_ERROR() ::fam::internal::CheckStream("error", __FILE__, __LINE__)

}  // namespace fam

#endif  // FAM_COMMON_HH_

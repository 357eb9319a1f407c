// digitvec/log.h

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIGITVEC_LOG_H_
#define DIGITVEC_LOG_H_

#include <functional>
#include <sstream>
#include <string>

namespace digitvec {

enum class LogLevel { kInfo, kWarning };

using LogHandler = std::function<void(LogLevel, const std::string &)>;

/// Replaces the sink for log messages (default: stderr, info suppressed
/// unless verbose).  Returns the previous handler.
LogHandler SetLogHandler(LogHandler handler);
void SetVerbose(bool verbose);

/// Number of warnings emitted since process start (or last reset).
long WarningCount();
void ResetWarningCount();

namespace internal {

class LogMessage {
 public:
  LogMessage(LogLevel level, const char *func) : level_(level) {
    stream_ << func << "(): ";
  }
  ~LogMessage();
  std::ostream &stream() { return stream_; }

 private:
  LogLevel level_;
  std::ostringstream stream_;
};

}  // namespace internal
}  // namespace digitvec

#define DV_WARN \
  ::digitvec::internal::LogMessage(::digitvec::LogLevel::kWarning, __func__).stream()
#define DV_LOG \
  ::digitvec::internal::LogMessage(::digitvec::LogLevel::kInfo, __func__).stream()

#endif  // DIGITVEC_LOG_H_

// digitvec/log.cc

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

#include "digitvec/log.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace digitvec {
namespace {

std::mutex g_log_mutex;
std::atomic<long> g_warning_count{0};
std::atomic<bool> g_verbose{false};

void DefaultHandler(LogLevel level, const std::string &msg) {
  if (level == LogLevel::kWarning)
    std::cerr << "WARNING (digitvec) " << msg << '\n';
  else if (g_verbose)
    std::cerr << "LOG (digitvec) " << msg << '\n';
}

LogHandler &Handler() {
  static LogHandler handler = DefaultHandler;
  return handler;
}

}  // namespace

LogHandler SetLogHandler(LogHandler handler) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  LogHandler old = Handler();
  Handler() = handler ? std::move(handler) : LogHandler(DefaultHandler);
  return old;
}

void SetVerbose(bool verbose) { g_verbose = verbose; }

long WarningCount() { return g_warning_count; }
void ResetWarningCount() { g_warning_count = 0; }

namespace internal {

LogMessage::~LogMessage() {
  if (level_ == LogLevel::kWarning) ++g_warning_count;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  Handler()(level_, stream_.str());
}

}  // namespace internal
}  // namespace digitvec

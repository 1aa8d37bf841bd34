// Copyright 2026 The FeatProp Authors
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

#pragma once

#include <cstdlib>
#include <iostream>
#include <string>
#include <string_view>

namespace featprop::log {

// Minimal stderr logger. Verbosity comes from the FEATPROP_LOG environment
// variable: off, error, warn (default), info, debug.

enum class Level : int { Off = 0, Error = 1, Warn = 2, Info = 3, Debug = 4 };

inline Level level_from_env() {
  const char* env = std::getenv("FEATPROP_LOG");
  if (env == nullptr) return Level::Warn;
  const std::string v(env);
  if (v == "off" || v == "none") return Level::Off;
  if (v == "error") return Level::Error;
  if (v == "warn" || v == "warning") return Level::Warn;
  if (v == "info") return Level::Info;
  if (v == "debug") return Level::Debug;
  return Level::Warn;
}

inline Level level() {
  static const Level cached = level_from_env();
  return cached;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(level()); }

inline void write(Level l, std::string_view tag, std::string_view msg) {
  if (!enabled(l)) return;
  std::cerr << "[featprop] " << tag << ": " << msg << '\n';
}

inline void error(std::string_view msg) { write(Level::Error, "error", msg); }
inline void warn(std::string_view msg) { write(Level::Warn, "warn", msg); }
inline void info(std::string_view msg) { write(Level::Info, "info", msg); }
inline void debug(std::string_view msg) { write(Level::Debug, "debug", msg); }

}  // namespace featprop::log

// Copyright 2026 The nzip Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nzip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitIo = 2;             // missing or unreadable input, unwritable output
inline constexpr int kExitFailedRows = 3;     // rd-curve finished but some sweep points diverged
inline constexpr int kExitModelMismatch = 4;  // file compressed with a different model
inline constexpr int kExitBadFile = 5;        // corrupt, truncated or unsupported file
inline constexpr int kExitUsage = 64;

// Runs one command line; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Worker cap from NZIP_THREADS (default 1).
unsigned worker_limit();

}  // namespace nzip::cli

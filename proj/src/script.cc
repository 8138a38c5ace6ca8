// Copyright 2026 The MDBT Authors.
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

#include "mdbt/script.h"

#include <sstream>

namespace mdbt {
namespace {

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

std::vector<Turn> ParseScript(std::string_view text, std::vector<std::string> *warnings) {
  std::vector<Turn> turns;
  std::string system;
  bool skip_turn = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  for (int number = 1; std::getline(in, raw); ++number) {
    const std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    const std::string speaker = colon == std::string::npos ? "" : Trim(line.substr(0, colon));
    const std::string utterance = colon == std::string::npos ? "" : Trim(line.substr(colon + 1));
    if (speaker == "system") {
      system = utterance;
    } else if (speaker == "user") {
      if (!skip_turn) turns.push_back(MakeTurn(system, utterance));
      system.clear();
      skip_turn = false;
    } else {
      if (warnings) {
        warnings->push_back("line " + std::to_string(number) +
                            ": expected 'system: ...' or 'user: ...', turn skipped");
      }
      skip_turn = true;
    }
  }
  return turns;
}

}  // namespace mdbt

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

#ifndef MDBT_SCRIPT_H_
#define MDBT_SCRIPT_H_

#include <string>
#include <string_view>
#include <vector>

#include "mdbt/corpus.h"

namespace mdbt {

// Plain-text dialogue for the track command:
//
//   system: how can i help you ?
//   user: i want turkish food
//
// A user line closes a turn; the system line before it is optional. Blank
// lines and lines starting with '#' are ignored. Anything else is reported in
// `warnings` (with its line number) and skipped along with its turn.
std::vector<Turn> ParseScript(std::string_view text, std::vector<std::string> *warnings);

}  // namespace mdbt

#endif  // MDBT_SCRIPT_H_

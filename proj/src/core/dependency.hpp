/*
 * Copyright (c) 2026, The trdec Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/corpus_io.hpp"

namespace trdec {

struct DependencyTree {
  Sentence tokens;
  std::vector<std::size_t> heads;  // 1-based head per token, 0 = root

  std::size_t root() const;  // 1-based index of the root token

  /// Throws ErrorCode::Parse unless the heads form a single-rooted
  /// arborescence over the tokens.
  void validate() const;
};

/// Reads blank-line separated CoNLL blocks. Rows with three tab-separated
/// columns are (index, form, head); rows with seven or more follow CoNLL-X /
/// CoNLL-U and take the head from column 7. Comment lines ('#') and CoNLL-U
/// multiword or empty-node rows are skipped.
std::vector<DependencyTree> read_conll_deps(const std::filesystem::path& path);

/// Same, over in-memory text; `source` names the input in error messages.
std::vector<DependencyTree> parse_conll_deps(const std::string& text,
                                             const std::string& source = "<input>");

}  // namespace trdec

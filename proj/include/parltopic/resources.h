/*
 * Copyright 2026 The parltopic Authors
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

// Files under resources/, compiled into the library.

#include <string_view>

namespace parltopic::resources {

std::string_view cap_labels_tsv();
std::string_view guidelines_txt();
std::string_view teacher_prompt_txt();
std::string_view public_lands_keywords_tsv();
std::string_view partyfacts_example_tsv();
std::string_view vdem_example_tsv();

}  // namespace parltopic::resources

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

#include <string>
#include <string_view>

#include "parltopic/common.h"

namespace parltopic {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

/// Splits "http://host:port/some/path". Only plain http is supported.
inline Endpoint split_endpoint(std::string_view url, std::string_view default_path = "/") {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw ValidationError("endpoint must start with http://: " + std::string(url));
  }
  auto slash = url.find('/', scheme.size());
  if (slash == std::string_view::npos) {
    return {std::string(url), std::string(default_path)};
  }
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

}  // namespace parltopic

// Copyright 2026 The hubojoin Authors
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

// Fixed graphs shared by the unit tests.

#pragma once

#include "hubojoin/query_graph.hpp"

namespace fixtures {

using hubojoin::QueryGraph;
using hubojoin::Shape;

/// Cards 10/20/30, f01 = 0.5, f12 = 0.1.
inline QueryGraph chain3() {
  return QueryGraph(Shape::kChain, {10, 20, 30}, {{0, 1, 0.5}, {1, 2, 0.1}});
}

/// Center 0, cards 10/20/30, f01 = 0.5, f02 = 0.1.
inline QueryGraph star3() {
  return QueryGraph(Shape::kStar, {10, 20, 30}, {{0, 1, 0.5}, {0, 2, 0.1}});
}

inline QueryGraph single_edge() { return QueryGraph(Shape::kChain, {4, 5}, {{0, 1, 0.25}}); }

}  // namespace fixtures

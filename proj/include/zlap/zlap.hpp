// Copyright 2026 The zlap Authors
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

#ifndef ZLAP_ZLAP_HPP
#define ZLAP_ZLAP_HPP

#include "zlap/dense_oracle.hpp"
#include "zlap/embeddings.hpp"
#include "zlap/error.hpp"
#include "zlap/graph.hpp"
#include "zlap/harness.hpp"
#include "zlap/inference.hpp"
#include "zlap/knn.hpp"
#include "zlap/parallel.hpp"
#include "zlap/solver.hpp"
#include "zlap/sparse.hpp"

#endif  // ZLAP_ZLAP_HPP

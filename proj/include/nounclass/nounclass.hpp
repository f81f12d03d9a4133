// Copyright 2026 The nounclass Authors.
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

#ifndef NOUNCLASS_NOUNCLASS_HPP_
#define NOUNCLASS_NOUNCLASS_HPP_

#include "nounclass/classifier.hpp"
#include "nounclass/embedding_store.hpp"
#include "nounclass/fetch.hpp"
#include "nounclass/io.hpp"
#include "nounclass/lexicon.hpp"
#include "nounclass/pipeline.hpp"
#include "nounclass/taxonomy.hpp"
#include "nounclass/text.hpp"
#include "nounclass/wordnet.hpp"

#endif  // NOUNCLASS_NOUNCLASS_HPP_

// Copyright 2026 The dihmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "dihmm/corpus.hpp"
#include "dihmm/decoding.hpp"
#include "dihmm/error.hpp"
#include "dihmm/eval.hpp"
#include "dihmm/gaussian.hpp"
#include "dihmm/ingest.hpp"
#include "dihmm/model.hpp"
#include "dihmm/presets.hpp"
#include "dihmm/rng.hpp"
#include "dihmm/serialize.hpp"
#include "dihmm/synth.hpp"
#include "dihmm/training.hpp"
#include "dihmm/types.hpp"

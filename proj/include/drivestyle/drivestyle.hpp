// Copyright 2026 The drivestyle Authors.
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

#pragma once

#include "drivestyle/chi_squared.hpp"
#include "drivestyle/common.hpp"
#include "drivestyle/corpus_properties.hpp"
#include "drivestyle/geometry.hpp"
#include "drivestyle/instruction.hpp"
#include "drivestyle/json_util.hpp"
#include "drivestyle/loss.hpp"
#include "drivestyle/metrics.hpp"
#include "drivestyle/pipeline.hpp"
#include "drivestyle/plot.hpp"
#include "drivestyle/polynomial.hpp"
#include "drivestyle/random.hpp"
#include "drivestyle/sampler.hpp"
#include "drivestyle/scenario.hpp"
#include "drivestyle/scenario_io.hpp"
#include "drivestyle/spline.hpp"
#include "drivestyle/style_cost.hpp"
#include "drivestyle/style_filter.hpp"
#include "drivestyle/synthetic.hpp"

// Copyright 2026 The mhamcl Authors
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

#ifndef MHAMCL__MHAMCL_HPP_
#define MHAMCL__MHAMCL_HPP_

#include "mhamcl/errors.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/gridmap.hpp"
#include "mhamcl/scan.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/records.hpp"
#include "mhamcl/filter.hpp"
#include "mhamcl/matcher.hpp"
#include "mhamcl/multihyp.hpp"
#include "mhamcl/localizer.hpp"
#include "mhamcl/metrics.hpp"
#include "mhamcl/sim.hpp"
#include "mhamcl/runlog.hpp"
#include "mhamcl/config.hpp"
#include "mhamcl/commands.hpp"

#endif  // MHAMCL__MHAMCL_HPP_

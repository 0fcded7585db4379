// Copyright 2026 The cuatrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CUATRACE_CUATRACE_HPP
#define CUATRACE_CUATRACE_HPP

#include "cuatrace/error.hpp"
#include "cuatrace/extract.hpp"
#include "cuatrace/grid.hpp"
#include "cuatrace/grid_io.hpp"
#include "cuatrace/image.hpp"
#include "cuatrace/interval.hpp"
#include "cuatrace/mask.hpp"
#include "cuatrace/mask_io.hpp"
#include "cuatrace/metrics.hpp"
#include "cuatrace/negsynth.hpp"
#include "cuatrace/pruner.hpp"
#include "cuatrace/run.hpp"
#include "cuatrace/stp.hpp"
#include "cuatrace/synth.hpp"
#include "cuatrace/trajectory.hpp"
#include "cuatrace/ttp.hpp"

#endif  // CUATRACE_CUATRACE_HPP

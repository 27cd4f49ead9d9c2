// Copyright 2026 The modular-ppt Authors
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

#include "modular_ppt/choi.hpp"
#include "modular_ppt/cones.hpp"
#include "modular_ppt/constructions.hpp"
#include "modular_ppt/errors.hpp"
#include "modular_ppt/gns.hpp"
#include "modular_ppt/io.hpp"
#include "modular_ppt/linalg.hpp"
#include "modular_ppt/ppt_optim.hpp"
#include "modular_ppt/random.hpp"

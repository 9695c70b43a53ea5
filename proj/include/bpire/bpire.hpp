/*
 * Copyright (C) 2026 bpire contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BPIRE_BPIRE_HPP
#define BPIRE_BPIRE_HPP

#include "bpire/analytics.hpp"
#include "bpire/config.hpp"
#include "bpire/count.hpp"
#include "bpire/env_model.hpp"
#include "bpire/mc_verify.hpp"
#include "bpire/rng.hpp"
#include "bpire/runner.hpp"
#include "bpire/sampler.hpp"
#include "bpire/trajectory.hpp"

#endif // BPIRE_BPIRE_HPP

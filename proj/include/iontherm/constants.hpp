// Copyright 2026 The iontherm Authors
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

#pragma once

namespace iontherm::constants {

// CODATA 2018 values. Every physical conversion in the toolkit goes through
// this table so outputs do not drift between builds.
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg
inline constexpr double boltzmann = 1.380649e-23;          // J / K
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

}  // namespace iontherm::constants

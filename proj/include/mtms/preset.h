// Copyright 2026 The MTMS Toolkit Authors
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


#ifndef MTMS_PRESET_H
#define MTMS_PRESET_H

#include <numbers>

namespace mtms::paper {

// Experimental parameters of the reference two-ion setup.
inline constexpr double delta_rad_per_s = 2 * std::numbers::pi * 292.0;
inline constexpr double gate_time_s = 3.42e-3;
inline constexpr double lamb_dicke = 0.004;
inline constexpr double carrier_rabi_rad_per_s = 2 * std::numbers::pi * 36e3;
inline constexpr double trap_frequency_rad_per_s = 2 * std::numbers::pi * 461e3;
inline constexpr double nbar_cooled = 0.1;
inline constexpr double nbar_doppler = 53.0;
/// Largest heating rate on the heating figure, quanta/s.
inline constexpr double max_heating_rate = 300.0;
/// Largest |Delta/delta| on the detuning figure.
inline constexpr double max_detuning_ratio = 0.2;

}  // namespace mtms::paper

#endif

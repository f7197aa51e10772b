// Copyright 2026 The rydcz Authors
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

// Adiabatic and eCD gates at T = 0.54 us, s = 1, V = 2 pi 500 MHz.

#include <cstdio>

#include "rydcz/dynamics.hpp"

int main() {
  using namespace rydcz;
  const double V = mhz_to_rad(500.0);
  const SweepParams sweep = SweepParams::scaled(0.54e-6, 1.0);

  const GateResult adiabatic = simulate_adiabatic(sweep, V);
  std::printf("adiabatic: raw %.3e  phase-optimized %.3e  theta %.4f\n", adiabatic.infidelity_raw,
              adiabatic.infidelity_phase_opt, adiabatic.theta_opt);

  const ECDParams ecd{calibrate_osc_freq(sweep.omega_max, SmoothedSweep(sweep)), V};
  const GateResult e = simulate_ecd(sweep, ecd);
  std::printf("ecd (omega = 2 pi %.1f MHz): raw %.3e  phase-optimized %.3e  leakage %.2e\n",
              ecd.osc_freq / mhz_to_rad(1.0), e.infidelity_raw, e.infidelity_phase_opt, e.mean_leakage());
  return 0;
}

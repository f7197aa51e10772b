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

// Optimizes a band-limited pulse at T = 0.14 us, s = 1 and writes it to
// ./optimized_pulse.

#include <cstdio>

#include "rydcz/experiments.hpp"

int main() {
  using namespace rydcz;
  OptimizerConfig cfg = OptimizerConfig::for_scaling(0.14e-6, 1.0);
  cfg.n_starts = 2;
  const OptimizedPulse p = optimize(mhz_to_rad(500.0), cfg);
  std::printf("infidelity %.3e after %d iterations (start %d, converged %d), pulse area %.3f rad\n",
              p.final_infidelity, p.iterations, p.best_start, p.converged ? 1 : 0, pulse_area(p.omega_ctrl));
  save_optimized_pulse(p, "optimized_pulse");
  return 0;
}

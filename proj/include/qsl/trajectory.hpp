// Copyright 2026 The qsl Authors
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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qsl/estimation.hpp"
#include "qsl/purification.hpp"
#include "qsl/qstate.hpp"

namespace qsl {

/// A sampled open-system evolution rho(t) with whatever extra structure the
/// producing channel knows: analytic d rho/dt, a purification, a closed-form
/// fidelity to the initial state.
struct ChannelTrajectory {
    std::string label;
    std::vector<double> t_grid;
    std::function<DensityOperator(double)> rho;
    // Analytic d rho/dt; a central difference is used when empty.
    std::function<ComplexMatrix(double)> drho;
    std::optional<purification::PurifiedEvolution> purified;
    // F_B(rho(0), rho(t)) in closed form, when known.
    std::function<double(double)> exact_fidelity;
    // The information diverges (integrably) as t -> 0+.
    bool singular_at_zero = false;

    estimation::StateFamily family() const { return {rho, drho}; }

    ComplexMatrix derivative(double t) const { return family().derivative(t); }

    double qfi(double t) const {
        const double eps = drho ? estimation::kAnalyticSupportEps : estimation::kSupportEps;
        return estimation::solve_sld(rho(t), derivative(t), eps).qfi;
    }
};

} // namespace qsl

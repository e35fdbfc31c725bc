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

#include <numbers>
#include <stdexcept>
#include <string>

namespace qsl {

// Natural units. Every formula that carries the reduced Planck constant
// spells it out, so this is the only place to change it.
inline constexpr double hbar = 1.0;
inline constexpr double pi = std::numbers::pi;

// ---- error taxonomy ----

/// Input outside the mathematical domain of an operation (m > 1 for the
/// elliptic integral, a materially negative eigenvalue, t = 0 on a singular
/// purification, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input: wrong dimensions, non-Hermitian matrix, unnormalized
/// probabilities, bad configuration values.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative routine ran out of budget. The best available estimate is kept.
class non_convergence : public std::runtime_error {
public:
    non_convergence(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_estimate_(best_estimate) {}

    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

/// Root finder called on an interval without a sign change.
class bracketing_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qsl

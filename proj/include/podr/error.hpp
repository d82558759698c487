// Copyright 2026 The PODR Authors
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

#ifndef PODR_ERROR_HPP
#define PODR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace podr {

/// Bad user input: config documents, CLI arguments, incompatible sizes.
/// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Failure of a numerical stage (non-convergence, unreachable threshold,
/// non-finite data). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Pseudo-time iteration stopped before reaching the residual tolerance.
class ConvergenceError : public NumericalError {
   public:
    ConvergenceError(const std::string &what, double final_residual, int iterations)
        : NumericalError(what), final_residual_(final_residual), iterations_(iterations) {}

    double final_residual() const noexcept { return final_residual_; }
    int iterations() const noexcept { return iterations_; }

   private:
    double final_residual_;
    int iterations_;
};

/// Malformed persisted artifact.
class FormatError : public std::runtime_error {
   public:
    enum class Kind { BadMagic, BadVersion, Truncated, DimensionMismatch, Io, Parse };

    FormatError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

   private:
    Kind kind_;
};

}  // namespace podr

#endif  // PODR_ERROR_HPP

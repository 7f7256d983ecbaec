/*
 * Copyright 2026 The qcafqmc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qcafqmc {

using real_t = double;
using complex_t = std::complex<double>;

using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

/// Bitstring over at most 64 modes; bit j is the occupation of mode j.
using Bitstring = std::uint64_t;

inline constexpr complex_t kI{0.0, 1.0};

/// Base of every error raised by the library. `kind()` is a stable short tag
/// the CLI maps onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define QCAFQMC_DEFINE_ERROR(Name, tag)                               \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(tag, what) {}      \
  };

QCAFQMC_DEFINE_ERROR(MalformedInputError, "malformed-input")
QCAFQMC_DEFINE_ERROR(MissingInputError, "missing-input")
QCAFQMC_DEFINE_ERROR(InconsistentIntegralsError, "inconsistent-integrals")
QCAFQMC_DEFINE_ERROR(NotPsdError, "not-psd")
QCAFQMC_DEFINE_ERROR(PartitionError, "partition")
QCAFQMC_DEFINE_ERROR(SectorViolationError, "sector-violation")
QCAFQMC_DEFINE_ERROR(InvalidRotationError, "invalid-rotation")
QCAFQMC_DEFINE_ERROR(UnsupportedParityError, "unsupported-parity")
QCAFQMC_DEFINE_ERROR(CapacityError, "capacity")
QCAFQMC_DEFINE_ERROR(ArchiveError, "archive")
QCAFQMC_DEFINE_ERROR(DimensionError, "dimension")
QCAFQMC_DEFINE_ERROR(NoSamplesError, "no-samples")
QCAFQMC_DEFINE_ERROR(VanishingOverlapError, "vanishing-overlap")
QCAFQMC_DEFINE_ERROR(UnsupportedConfigurationError, "unsupported-configuration")
QCAFQMC_DEFINE_ERROR(DecoupledCoreError, "decoupled-core")
QCAFQMC_DEFINE_ERROR(PopulationCollapseError, "population-collapse")
QCAFQMC_DEFINE_ERROR(IncompatibleCheckpointError, "incompatible-checkpoint")
QCAFQMC_DEFINE_ERROR(InsufficientDataError, "insufficient-data")
QCAFQMC_DEFINE_ERROR(InvalidArgumentError, "invalid-argument")

#undef QCAFQMC_DEFINE_ERROR

/// Raised when a Pfaffian pivot underflows; carries the offending magnitude.
class SingularPfaffianError : public Error {
 public:
  SingularPfaffianError(const std::string& what, double pivot)
      : Error("singular-pfaffian", what), pivot_(pivot) {}
  double pivot() const noexcept { return pivot_; }

 private:
  double pivot_;
};

inline int popcount(Bitstring b) { return __builtin_popcountll(b); }

/// Binomial coefficient as a double (exact for the sizes used here).
double binomial(int n, int k);

}  // namespace qcafqmc

// Copyright 2026 The vqtrain Authors
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

#ifndef VQTRAIN_ERRORS_HPP_
#define VQTRAIN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace vqtrain {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncodingError : Error { using Error::Error; };
struct GateError : Error { using Error::Error; };
struct NoiseError : Error { using Error::Error; };
struct SpecError : Error { using Error::Error; };
struct UnsupportedObservable : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct BatchError : Error { using Error::Error; };
struct OracleModeError : Error { using Error::Error; };
struct PartitionError : Error { using Error::Error; };
struct ProtocolError : Error { using Error::Error; };
struct BarrierTimeout : Error { using Error::Error; };
struct NumericsError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct MetricError : Error { using Error::Error; };
struct InfeasibleTarget : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct LedgerError : Error { using Error::Error; };
struct SpeedupUndefined : Error { using Error::Error; };
struct BoundUndefined : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace vqtrain

#endif  // VQTRAIN_ERRORS_HPP_

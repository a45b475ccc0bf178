// SPDX-License-Identifier: Apache-2.0
//
// netsense: cooperative multi-BS localization over limited fronthaul
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace netsense {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Vec2 = Eigen::Vector2d;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class SamplingFailed : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SingularFim : public Error {
 public:
  using Error::Error;
};

class RateUnbounded : public Error {
 public:
  using Error::Error;
};

class BuilderError : public Error {
 public:
  using Error::Error;
};

class DegenerateAngles : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when MUSIC finds fewer spectral peaks than targets. The angles that
/// were found are kept so the caller can inspect or fall back.
class AoaFailure : public Error {
 public:
  AoaFailure(const std::string& what, std::vector<std::vector<double>> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<std::vector<double>>& partial() const { return partial_; }

 private:
  std::vector<std::vector<double>> partial_;
};

}  // namespace netsense

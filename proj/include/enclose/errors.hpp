// Copyright 2026 The enclose Authors
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

#ifndef ENCLOSE_ERRORS_HPP
#define ENCLOSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace enclose {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AngleOutOfRange : public Error {
 public:
  using Error::Error;
};

class NonpositiveRadius : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DecompositionMismatch : public Error {
 public:
  using Error::Error;
};

class InfeasibleFormation : public Error {
 public:
  using Error::Error;
};

/// An edge starts outside its CM&CF corridor.
class InitialConditionViolation : public Error {
 public:
  InitialConditionViolation(int edge, const std::string& what)
      : Error(what), edge_(edge) {}
  int edge() const noexcept { return edge_; }

 private:
  int edge_;
};

class DegenerateBound : public Error {
 public:
  DegenerateBound(int edge, const std::string& what) : Error(what), edge_(edge) {}
  int edge() const noexcept { return edge_; }

 private:
  int edge_;
};

class NumericalDomain : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A transformed error was evaluated at or beyond its barrier.
/// `index` is an edge id for distance barriers and an agent index (0-based)
/// for heading barriers.
class OutOfBarrier : public Error {
 public:
  enum class Kind { kEdge, kHeading };

  OutOfBarrier(Kind kind, int index, const std::string& what)
      : Error(what), kind_(kind), index_(index) {}
  explicit OutOfBarrier(const std::string& what)
      : Error(what), kind_(Kind::kEdge), index_(-1) {}

  Kind kind() const noexcept { return kind_; }
  int index() const noexcept { return index_; }

 private:
  Kind kind_;
  int index_;
};

/// |e_theta| reached pi/2 in the linear velocity law.
class SingularityGuard : public Error {
 public:
  SingularityGuard(int agent, const std::string& what) : Error(what), agent_(agent) {}
  int agent() const noexcept { return agent_; }

 private:
  int agent_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace enclose

#endif  // ENCLOSE_ERRORS_HPP

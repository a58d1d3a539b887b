#pragma once

#include <stdexcept>
#include <string>

namespace dhym {

/// Broad failure classes; the CLI maps these onto process exit codes.
enum class ErrorKind {
  validation,  ///< malformed input, config or precondition
  numerical,   ///< cone exit, singular phase, stiffness, non-convergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

/// sin Q of the phase vanishes, so Im prod(lambda_k + i) cannot be divided by.
class SingularPhase : public Error {
 public:
  explicit SingularPhase(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class ConeExit : public Error {
 public:
  ConeExit(const std::string& what, long point, double margin)
      : Error(ErrorKind::numerical, what), point_(point), margin_(margin) {}
  long point() const noexcept { return point_; }
  double margin() const noexcept { return margin_; }

 private:
  long point_;
  double margin_;
};

/// Straight path t*phi leaves the admissible set at some quadrature node.
class PathExit : public Error {
 public:
  PathExit(const std::string& what, double t)
      : Error(ErrorKind::numerical, what), t_(t) {}
  double t() const noexcept { return t_; }

 private:
  double t_;
};

class Stiffness : public Error {
 public:
  explicit Stiffness(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what)
      : Error(ErrorKind::numerical, what) {}
};

class DegenerateClass : public Error {
 public:
  explicit DegenerateClass(const std::string& what)
      : Error(ErrorKind::validation, what) {}
};

class NotHypercritical : public Error {
 public:
  NotHypercritical(const std::string& what, double theta0)
      : Error(ErrorKind::validation, what), theta0_(theta0) {}
  double theta0() const noexcept { return theta0_; }

 private:
  double theta0_;
};

class GluingGap : public Error {
 public:
  GluingGap(const std::string& what, long point)
      : Error(ErrorKind::numerical, what), point_(point) {}
  long point() const noexcept { return point_; }

 private:
  long point_;
};

}  // namespace dhym

#pragma once

#include "smallpar/common.hpp"

#include <limits>
#include <span>
#include <vector>

namespace smallpar {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;

  /// Throws std::invalid_argument unless every field is positive.
  void validate() const;
  IntegratorConfig tightened(double factor) const;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t, Vec x)
      : Error(what), t_(t), x_(std::move(x)) {}
  double time() const { return t_; }
  const Vec& state() const { return x_; }

 private:
  double t_;
  Vec x_;
};

class StepLimitExceeded : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class StepSizeUnderflow : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

class NonFiniteField : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// Dense-output solution of an ODE on [min(t0,t1), max(t0,t1)].
///
/// Nodes are the accepted step endpoints, ordered in the integration
/// direction. Between nodes the state is given by the Dormand-Prince
/// continuous extension (4th order). Evaluation at a node time returns the
/// stored node state bit-for-bit. A Trajectory is immutable once built.
class Trajectory {
 public:
  Trajectory() = default;

  int dim() const { return dim_; }
  double t0() const { return times_.front(); }
  double t1() const { return times_.back(); }
  double t_min() const { return std::min(t0(), t1()); }
  double t_max() const { return std::max(t0(), t1()); }
  bool contains(double t) const { return t >= t_min() && t <= t_max(); }

  /// Throws std::out_of_range outside the interval.
  Vec operator()(double t) const;
  void eval(double t, Eigen::Ref<Vec> out) const;

  std::size_t node_count() const { return times_.size(); }
  std::span<const double> node_times() const { return times_; }
  Eigen::Map<const Vec> node_state(std::size_t i) const;
  Vec front() const { return node_state(0); }
  Vec back() const { return node_state(node_count() - 1); }

  const IntegratorConfig& config() const { return cfg_; }
  long rhs_evaluations() const { return rhs_evals_; }
  long rejected_steps() const { return rejected_; }

 private:
  friend Trajectory integrate(const Rhs&, double, double, const Vec&,
                              const IntegratorConfig&);

  int dim_ = 0;
  IntegratorConfig cfg_;
  long rhs_evals_ = 0;
  long rejected_ = 0;
  std::vector<double> times_;
  std::vector<double> states_;  // node-major, dim_ per node
  std::vector<double> dense_;   // segment-major, 4 * dim_ per segment
};

/// Integrates x' = f(t, x) from (t0, xi) to t1 with the adaptive
/// Dormand-Prince 5(4) pair. t1 < t0 integrates backwards with negative
/// steps; t1 == t0 yields a single-node trajectory.
Trajectory integrate(const Rhs& f, double t0, double t1, const Vec& xi,
                     const IntegratorConfig& cfg = {});

}  // namespace smallpar

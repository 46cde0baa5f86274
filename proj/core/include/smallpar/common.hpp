#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace smallpar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Right-hand side of an ODE, writing x' into `dx` (already sized).
using Rhs = std::function<void(double t, const Vec& x, Vec& dx)>;

/// Vector field (t, x) -> R^k. `out` is resized by the callee if needed.
using VecField = std::function<void(double t, const Vec& x, Vec& out)>;

/// Matrix-valued field (t, x) -> R^{k x k}.
using MatField = std::function<void(double t, const Vec& x, Mat& out)>;

/// Named numeric columns, the common shape of every tabular result.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// n equally spaced points on [a, b] including both endpoints.
std::vector<double> uniform_grid(double a, double b, int n);

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Caps the number of worker threads used by parallel_for (0 = hardware).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(i) for i in [0, n). Results must be written by index so that
/// the outcome does not depend on scheduling. The first exception thrown
/// by any task is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace smallpar

#include "smallpar/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <stdexcept>

namespace smallpar {

QuadratureGrid composite_gauss_legendre(double a, double b, int panels) {
  if (panels <= 0) throw std::invalid_argument("composite_gauss_legendre: panels must be positive");
  using Rule = boost::math::quadrature::gauss<double, kGaussPanelOrder>;
  const auto& x = Rule::abscissa();  // non-negative half, x[0] = smallest
  const auto& w = Rule::weights();

  // Full symmetric node list on [-1, 1], increasing.
  std::vector<double> ref_x, ref_w;
  for (std::size_t i = x.size(); i-- > 0;) {
    if (x[i] == 0.0) continue;
    ref_x.push_back(-x[i]);
    ref_w.push_back(w[i]);
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    ref_x.push_back(x[i]);
    ref_w.push_back(w[i]);
  }

  QuadratureGrid grid;
  grid.nodes.reserve(panels * ref_x.size());
  grid.weights.reserve(panels * ref_x.size());
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    for (std::size_t i = 0; i < ref_x.size(); ++i) {
      grid.nodes.push_back(mid + 0.5 * width * ref_x[i]);
      grid.weights.push_back(0.5 * width * ref_w[i]);
    }
  }
  return grid;
}

}  // namespace smallpar

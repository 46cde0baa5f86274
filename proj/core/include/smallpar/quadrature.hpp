#pragma once

#include <vector>

namespace smallpar {

/// Nodes and weights of a composite Gauss-Legendre rule (8 nodes per
/// panel) on [a, b]. Nodes are increasing when a < b.
struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <typename F>
  double integrate(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

inline constexpr int kGaussPanelOrder = 8;
inline constexpr int kDefaultPanels = 64;

QuadratureGrid composite_gauss_legendre(double a, double b,
                                        int panels = kDefaultPanels);

}  // namespace smallpar

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace diamondlab {

/// Discrete probability measure: nodes with weights summing to one.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
  template <class F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Gauss rule of the standard normal law with `order` nodes (Golub-Welsch on
/// the probabilists' Hermite recurrence). Exact for polynomials of degree
/// 2*order - 1.
Rule gauss_hermite(int order);

/// Gauss rule with at most `order` nodes for the discrete measure
/// (nodes, weights). The first 2*order - 1 moments are preserved. Measures with
/// no more than `order` distinct points are returned merged but otherwise
/// unchanged.
Rule reduce_measure(std::span<const double> nodes, std::span<const double> weights, int order);

/// Merges nodes that agree to a relative 1e-13 and drops zero weights;
/// result sorted by node.
Rule merge_atoms(std::span<const double> nodes, std::span<const double> weights);

}  // namespace diamondlab

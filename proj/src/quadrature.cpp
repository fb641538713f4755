#include "diamondlab/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "diamondlab/errors.hpp"

namespace diamondlab {
namespace {

Rule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double center, double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NotFound("tridiagonal eigenproblem did not converge");
  const auto n = diag.size();
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.nodes[i] = center + scale * es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.weights[i] = v * v;
    total += r.weights[i];
  }
  for (auto& w : r.weights) w /= total;
  return r;
}

}  // namespace

Rule gauss_hermite(int order) {
  if (order < 1) throw BadParams("Gauss-Hermite order must be >= 1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(std::max(order - 1, 0));
  for (int k = 1; k < order; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
  Rule r = golub_welsch(diag, sub, 0.0, 1.0);
  // Symmetrize: the exact rule is even, the eigensolver is only close to it.
  const int n = order;
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[n - 1 - i] + r.weights[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Rule merge_atoms(std::span<const double> nodes, std::span<const double> weights) {
  std::vector<std::size_t> idx(nodes.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
  Rule r;
  for (std::size_t i : idx) {
    if (!(weights[i] > 0.0)) continue;
    const double x = nodes[i];
    if (!r.nodes.empty()) {
      const double y = r.nodes.back();
      if (std::abs(x - y) <= 1e-13 * std::max(std::abs(x), std::abs(y))) {
        r.weights.back() += weights[i];
        continue;
      }
    }
    r.nodes.push_back(x);
    r.weights.push_back(weights[i]);
  }
  return r;
}

Rule reduce_measure(std::span<const double> nodes, std::span<const double> weights, int order) {
  if (order < 1) throw BadParams("reduction order must be >= 1");
  Rule merged = merge_atoms(nodes, weights);
  const double total = std::accumulate(merged.weights.begin(), merged.weights.end(), 0.0);
  for (auto& w : merged.weights) w /= total;
  const auto N = static_cast<Eigen::Index>(merged.size());
  if (N <= order) return merged;

  Eigen::Map<const Eigen::VectorXd> x(merged.nodes.data(), N);
  Eigen::Map<const Eigen::VectorXd> w(merged.weights.data(), N);
  const double center = x.dot(w);
  const double scale = std::max((x.array() - center).abs().maxCoeff(), 1e-300);
  const Eigen::VectorXd y = (x.array() - center) / scale;

  // Lanczos on diag(y) started from sqrt(w), with full reorthogonalization.
  Eigen::MatrixXd Q(N, order);
  Eigen::VectorXd alpha(order), beta(order);
  Q.col(0) = w.cwiseSqrt();
  int m = order;
  for (int k = 0; k < order; ++k) {
    Eigen::VectorXd v = y.cwiseProduct(Q.col(k));
    alpha(k) = Q.col(k).dot(v);
    for (int pass = 0; pass < 2; ++pass) v -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * v);
    if (k + 1 == order) break;
    beta(k) = v.norm();
    if (beta(k) < 1e-14) {
      m = k + 1;
      break;
    }
    Q.col(k + 1) = v / beta(k);
  }
  return golub_welsch(alpha.head(m), beta.head(std::max(m - 1, 0)), center, scale);
}

}  // namespace diamondlab

#include "shear/context.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

#include "shear/errors.hpp"

namespace shear {

SolverContext::SolverContext(std::shared_ptr<const Assembler> assembler)
    : asm_(std::move(assembler)), strain_(*asm_), work_(*asm_) {
  strain_.factorize(asm_->ops().strain);
}

std::shared_ptr<SolverContext> SolverContext::create(const Mesh& mesh, int quad_order, Exec exec) {
  return std::make_shared<SolverContext>(std::make_shared<const Assembler>(make_discretization(mesh, quad_order), exec));
}

const DualNorm& SolverContext::dual_norm() {
  if (!dual_) dual_ = std::make_unique<DualNorm>(*asm_);
  return *dual_;
}

double SolverContext::korn_constant() {
  if (korn_ < 0.0) korn_ = discrete_korn_constant(*asm_);
  return korn_;
}

namespace {

SparseMatrix restrict_free(const SparseMatrix& m, const std::vector<int>& free_index) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m.nonZeros()));
  int nfree = 0;
  for (int v : free_index) nfree = std::max(nfree, v + 1);
  for (int col = 0; col < m.outerSize(); ++col) {
    const int c = free_index[static_cast<std::size_t>(col)];
    if (c < 0) continue;
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      const int r = free_index[static_cast<std::size_t>(it.row())];
      if (r >= 0) trip.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix out(nfree, nfree);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

double discrete_korn_constant(const Assembler& assembler, int max_iters, double tol) {
  const auto& mask = assembler.dofs().dirichlet_mask();
  std::vector<int> free_index(mask.size(), -1);
  int n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) free_index[i] = n++;
  }
  if (n == 0) throw MeshError("mesh has no interior velocity dofs");
  const SparseMatrix a = restrict_free(assembler.ops().strain, free_index);
  const SparseMatrix g = restrict_free(assembler.ops().h1, free_index);
  Eigen::SimplicialLDLT<SparseMatrix> chol(a);
  if (chol.info() != Eigen::Success) throw LinearSolverError("Korn constant: strain block factorization failed");

  // Lanczos for A^{-1} G, self-adjoint in the G inner product; its largest
  // eigenvalue is 1 / lambda_min(A, G).
  const int m = std::min(max_iters, n);
  std::vector<Eigen::VectorXd> q, gq;  // basis and its image under G
  q.reserve(static_cast<std::size_t>(m + 1));
  gq.reserve(static_cast<std::size_t>(m + 1));
  std::mt19937_64 rng(20240101);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(rng);
  v /= std::sqrt(v.dot(g * v));
  q.push_back(v);
  gq.push_back(g * v);
  std::vector<double> alpha, beta;
  double theta_prev = 0.0, theta = 0.0;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w = chol.solve(gq.back());
    alpha.push_back(gq.back().dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < q.size(); ++i) w -= gq[i].dot(w) * q[i];
    }
    const double b = std::sqrt(std::max(0.0, w.dot(g * w)));
    const int k = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    theta = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (j > 5 && std::abs(theta - theta_prev) <= tol * theta) break;
    theta_prev = theta;
    if (b <= 1e-14 * theta) break;
    beta.push_back(b);
    q.push_back(w / b);
    gq.push_back(g * q.back());
  }
  return 1.0 / theta;
}

}  // namespace shear

#include "shear/saddle.hpp"

#include <algorithm>
#include <cmath>

#ifdef SHEAR_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "shear/errors.hpp"

namespace shear {

struct SaddleSolver::Backend {
#ifdef SHEAR_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseMatrix> lu;
#else
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
};

namespace {

int find_slot(const SparseMatrix& m, int row, int col) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  const int* pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
  if (pos == inner + outer[col + 1] || *pos != row) return -1;
  return static_cast<int>(pos - inner);
}

}  // namespace

SaddleSolver::SaddleSolver(const Assembler& assembler)
    : asm_(assembler), nv_(assembler.num_velocity()), np_(assembler.num_pressure()),
      backend_(std::make_unique<Backend>()) {
  const auto& mask = asm_.dofs().dirichlet_mask();
  const SparseMatrix& a = asm_.pattern();
  const SparseMatrix& b = asm_.ops().divergence;
  const int n = nv_ + np_;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * b.nonZeros() + n));
  for (int col = 0; col < nv_; ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (!mask[static_cast<std::size_t>(row)] && !mask[static_cast<std::size_t>(col)]) trip.emplace_back(row, col, 0.0);
    }
  }
  for (int col = 0; col < nv_; ++col) {
    if (mask[static_cast<std::size_t>(col)]) continue;
    for (SparseMatrix::InnerIterator it(b, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (row == pinned_) continue;
      trip.emplace_back(nv_ + row, col, 0.0);
      trip.emplace_back(col, nv_ + row, 0.0);
    }
  }
  for (int i = 0; i < nv_; ++i) {
    if (mask[static_cast<std::size_t>(i)]) trip.emplace_back(i, i, 0.0);
  }
  trip.emplace_back(nv_ + pinned_, nv_ + pinned_, 0.0);
  k_.resize(n, n);
  k_.setFromTriplets(trip.begin(), trip.end());
  k_.makeCompressed();

  a_slot_.assign(static_cast<std::size_t>(a.nonZeros()), -1);
  for (int col = 0; col < nv_; ++col) {
    for (int k = a.outerIndexPtr()[col]; k < a.outerIndexPtr()[col + 1]; ++k) {
      const int row = a.innerIndexPtr()[k];
      if (!mask[static_cast<std::size_t>(row)] && !mask[static_cast<std::size_t>(col)]) {
        a_slot_[static_cast<std::size_t>(k)] = find_slot(k_, row, col);
      }
    }
  }
  b_slot_.assign(static_cast<std::size_t>(b.nonZeros()), {-1, -1});
  for (int col = 0; col < nv_; ++col) {
    if (mask[static_cast<std::size_t>(col)]) continue;
    for (int k = b.outerIndexPtr()[col]; k < b.outerIndexPtr()[col + 1]; ++k) {
      const int row = b.innerIndexPtr()[k];
      if (row == pinned_) continue;
      b_slot_[static_cast<std::size_t>(k)] = {find_slot(k_, nv_ + row, col), find_slot(k_, col, nv_ + row)};
    }
  }
  for (int i = 0; i < nv_; ++i) {
    if (mask[static_cast<std::size_t>(i)]) unit_slots_.push_back(find_slot(k_, i, i));
  }
  unit_slots_.push_back(find_slot(k_, nv_ + pinned_, nv_ + pinned_));
#ifdef SHEAR_HAVE_UMFPACK
  // The block is structurally symmetric with a zero pressure diagonal; the
  // symmetric strategy keeps the AMD ordering and is several times faster.
  backend_->lu.umfpackControl()(UMFPACK_STRATEGY) = UMFPACK_STRATEGY_SYMMETRIC;
#endif
  backend_->lu.analyzePattern(k_);
}

SaddleSolver::~SaddleSolver() = default;

void SaddleSolver::factorize(const SparseMatrix& velocity_block) {
  const SparseMatrix& a = asm_.pattern();
  if (velocity_block.nonZeros() != a.nonZeros() || velocity_block.rows() != nv_) {
    throw ShapeError("SaddleSolver::factorize: velocity block does not carry the assembler pattern");
  }
  double* kv = k_.valuePtr();
  std::fill(kv, kv + k_.nonZeros(), 0.0);
  const double* av = velocity_block.valuePtr();
  for (std::size_t k = 0; k < a_slot_.size(); ++k) {
    if (a_slot_[k] >= 0) kv[a_slot_[k]] += av[k];
  }
  const double* bv = asm_.ops().divergence.valuePtr();
  for (std::size_t k = 0; k < b_slot_.size(); ++k) {
    if (b_slot_[k].first >= 0) {
      kv[b_slot_[k].first] += bv[k];
      kv[b_slot_[k].second] += bv[k];
    }
  }
  for (int s : unit_slots_) kv[s] = 1.0;
  backend_->lu.factorize(k_);
  if (backend_->lu.info() != Eigen::Success) {
    factorized_ = false;
    throw LinearSolverError("saddle-point factorization failed");
  }
  factorized_ = true;
}

SaddleSolver::Solution SaddleSolver::solve(const Eigen::VectorXd& f, const Eigen::VectorXd& q) const {
  if (!factorized_) throw LinearSolverError("SaddleSolver::solve called before factorize");
  if (f.size() != nv_ || q.size() != np_) throw ShapeError("SaddleSolver::solve: rhs size mismatch");
  Eigen::VectorXd rhs(nv_ + np_);
  rhs.head(nv_) = f;
  rhs.tail(np_) = q;
  asm_.zero_dirichlet_rows(rhs);
  rhs(nv_ + pinned_) = 0.0;
  Eigen::VectorXd x = backend_->lu.solve(rhs);
  if (backend_->lu.info() != Eigen::Success || !x.allFinite()) {
    throw LinearSolverError("saddle-point solve failed");
  }
  Solution s{x.head(nv_), x.tail(np_)};
  remove_mean(s.pressure);
  return s;
}

SaddleSolver::Solution SaddleSolver::solve(const Eigen::VectorXd& f) const {
  return solve(f, Eigen::VectorXd::Zero(np_));
}

void SaddleSolver::remove_mean(Eigen::VectorXd& p) const {
  const Eigen::VectorXd& w = asm_.ops().pressure_weights;
  p.array() -= w.dot(p) / w.sum();
}

DualNorm::DualNorm(const Assembler& assembler) : asm_(assembler), solver_(assembler) {
  solver_.factorize(asm_.ops().h1);
}

double DualNorm::operator()(const Eigen::VectorXd& r) const {
  const auto s = solver_.solve(r.head(asm_.num_velocity()));
  return std::sqrt(std::max(0.0, s.velocity.dot(asm_.ops().h1 * s.velocity)));
}

}  // namespace shear

#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "shear/discretization.hpp"
#include "shear/fields.hpp"
#include "shear/kernels.hpp"
#include "shear/tensor.hpp"

namespace shear {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Parameter-free operators of the mixed discretization.
struct LinearOperators {
  SparseMatrix strain;      // (eps u, eps v)
  SparseMatrix mass;        // (u, v)
  SparseMatrix h1;          // (u, v) + (grad u, grad v)
  SparseMatrix divergence;  // B_kj = -(psi_k, div phi_j), pressure x velocity
  Eigen::VectorXd pressure_weights;  // integral of each P1 basis function
};

/// Pointwise tangents H -> a H + b (n : H) n for the three operator families.
namespace tangents {

/// Jacobian of the regularized nonlinearity, zero for |E| <= g - delta.
PointTangent regularized(const SymTensor2& e, double g, RegParam delta);
/// Generalized Jacobian of the nonsmooth nonlinearity (differentiable branch off the kink).
PointTangent generalized(const SymTensor2& e, double g);
/// Directional derivative frozen at direction h: linear off the band,
/// the active or inactive kink branch selected by sign(E : H) on it.
PointTangent directional(const SymTensor2& e, const SymTensor2& h, double g, double band_tol);

}  // namespace tangents

/// Owns the discretization-level data needed by every solver: the velocity
/// sparsity pattern with its element scatter map and the linear operators.
class Assembler {
 public:
  explicit Assembler(std::shared_ptr<const Discretization> disc, Exec exec = Exec::parallel);

  const Discretization& disc() const { return *disc_; }
  std::shared_ptr<const Discretization> disc_ptr() const { return disc_; }
  const DofMap& dofs() const { return disc_->dofs(); }
  std::shared_ptr<const DofMap> dofs_ptr() const { return disc_->dofs_ptr(); }
  Exec exec() const { return exec_; }
  void set_exec(Exec exec) { exec_ = exec; }

  const LinearOperators& ops() const { return ops_; }
  /// Velocity-block pattern (all element couplings, explicit zeros kept).
  const SparseMatrix& pattern() const { return pattern_; }
  const ScatterMap& scatter() const { return scatter_; }

  int num_velocity() const { return dofs().num_velocity(); }
  int num_pressure() const { return dofs().num_pressure(); }

  std::vector<SymTensor2> strain(const Eigen::VectorXd& v) const;
  /// sum_qp w m(eps) : eps(phi_i), or with m_delta when delta is present.
  Eigen::VectorXd nonlinear_term(const std::vector<SymTensor2>& eps, double g,
                                 std::optional<RegParam> delta) const;
  /// sum_qp w T_qp(eps phi_j) : eps phi_i on the velocity pattern.
  SparseMatrix tangent_matrix(const std::vector<PointTangent>& tangent) const;
  /// mu * strain + nu * tangent on the velocity pattern.
  SparseMatrix velocity_block(double mu, double nu, const std::vector<PointTangent>* tangent) const;

  /// Mixed residual [mu A y + nu N(y) + B^T p - M u ; B y], Dirichlet rows zeroed.
  Eigen::VectorXd residual(const Eigen::VectorXd& y, const Eigen::VectorXd& p,
                           const Eigen::VectorXd& u, const PlasticityParams& params,
                           std::optional<RegParam> delta) const;

  /// Zeroes the Dirichlet entries of a velocity-length vector.
  void zero_dirichlet(Eigen::VectorXd& v) const;
  /// Zeroes the Dirichlet entries of the velocity part of a mixed vector.
  void zero_dirichlet_rows(Eigen::VectorXd& r) const;

  double l2_norm(const Eigen::VectorXd& v) const;
  double h1_norm(const Eigen::VectorXd& v) const;
  double l2_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  /// L2 norm of eps v, i.e. sqrt(v^T strain v).
  double strain_norm(const Eigen::VectorXd& v) const;
  double domain_area() const { return area_; }

 private:
  void build_pattern();
  void build_linear_operators();

  std::shared_ptr<const Discretization> disc_;
  Exec exec_;
  SparseMatrix pattern_;
  ScatterMap scatter_;
  LinearOperators ops_;
  double area_ = 0.0;
};

using VectorFunction = std::function<Eigen::Vector2d(double x, double y)>;
using ScalarFunction = std::function<double(double x, double y)>;

/// Quadrature load vector (f, phi_i) over velocity dofs.
Eigen::VectorXd load_vector(const Discretization& disc, const VectorFunction& f);
/// L2 distance between a P2 velocity coefficient vector and a function.
double velocity_l2_error(const Discretization& disc, const Eigen::VectorXd& v, const VectorFunction& f);
/// L2 distance between a P1 pressure coefficient vector and a function.
double pressure_l2_error(const Discretization& disc, const Eigen::VectorXd& p, const ScalarFunction& f);

/// Symmetric gradient of a velocity-space field at the quadrature points.
QuadTensorField eval_sym_gradient(const FeField& field, std::shared_ptr<const Discretization> disc);

/// Stokes saddle-point blocks: velocity block mu (eps, eps) and divergence block.
struct StokesOperator {
  SparseMatrix velocity;
  SparseMatrix divergence;
};
StokesOperator assemble_stokes(const Assembler& assembler, double mu);

/// Residual of the mixed state system for (y, p) and control u.
Eigen::VectorXd assemble_nonlinear_residual(const Assembler& assembler, const FeField& y,
                                            const FeField& p, const FeField& u,
                                            const PlasticityParams& params,
                                            std::optional<RegParam> delta);

/// Velocity block mu (eps w, eps v) + nu (m_delta'(eps y) eps w, eps v).
SparseMatrix assemble_jacobian(const Assembler& assembler, const FeField& y,
                               const PlasticityParams& params, RegParam delta);

}  // namespace shear

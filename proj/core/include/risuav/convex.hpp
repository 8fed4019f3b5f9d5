#pragma once

#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace risuav::convex {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse affine expression a'x + b.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  LinExpr& add(int var, double coeff) {
    terms.emplace_back(var, coeff);
    return *this;
  }
  double value(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& [i, c] : terms) v += c * x(i);
    return v;
  }
  void add_gradient(double w, Eigen::VectorXd& g) const {
    for (const auto& [i, c] : terms) g(i) += w * c;
  }
};

// Smooth convex scalar term. Implementations must be convex on their domain
// and report +inf outside it; gradients and Hessians accumulate into dense
// buffers scaled by a nonnegative weight.
class Atom {
 public:
  virtual ~Atom() = default;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const = 0;
  virtual void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const = 0;
  virtual bool in_domain(const Eigen::VectorXd& x) const = 0;
  virtual std::string describe() const = 0;
};

using AtomPtr = std::shared_ptr<const Atom>;

// exp(a'x + b)
AtomPtr make_exp(LinExpr arg);
// -ln(a'x + b), domain a'x + b > 0
AtomPtr make_neg_log(LinExpr arg);
// (a'x + b)^p with p >= 1, domain a'x + b >= 0
AtomPtr make_power(LinExpr arg, double p);
// 1 / (a'x + b), domain a'x + b > 0
AtomPtr make_inverse(LinExpr arg);
// sum_r (row_r)^2
AtomPtr make_squared_norm(std::vector<LinExpr> rows);
// (sum_r (row_r)^2)^(p/2) with p >= 1
AtomPtr make_norm_power(std::vector<LinExpr> rows, double p);
// sum_r (row_r)^2 / (c'x + e), domain c'x + e > 0
AtomPtr make_quad_over_lin(std::vector<LinExpr> rows, LinExpr denom);

// ln(c0 + sum_r c_r * prod_v x_v^(-e_rv)) with c >= 0, e >= 0; domain x_v > 0
// for every involved variable. Convex because each summand is log-convex.
struct PosynomialTerm {
  double coeff = 0.0;
  std::vector<std::pair<int, double>> neg_exponents;  // (variable, exponent >= 0)
};
AtomPtr make_log_posynomial(double constant, std::vector<PosynomialTerm> terms);

// affine + sum of weighted convex atoms; convex when weights are >= 0.
struct ConvexExpr {
  LinExpr affine;
  std::vector<std::pair<double, AtomPtr>> atoms;

  double value(const Eigen::VectorXd& x) const;
  bool in_domain(const Eigen::VectorXd& x) const;
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const;
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const;
};

// Hermitian PSD variable with unit diagonal:
//   maximize  sum_k c_k ln(a_k + Re tr(A_k X)) + Re tr(G X) + constant
// with c_k >= 0 (concave maximization).
struct PsdBlock {
  int dim = 0;
  std::vector<double> log_weights;
  std::vector<double> log_offsets;
  std::vector<Eigen::MatrixXcd> log_mats;
  Eigen::MatrixXcd linear;
  double constant = 0.0;
};

// Scalar variables with box bounds, smooth convex objective and inequality
// expressions, affine equalities — or a PSD block. Scalar objective is
// MINIMIZED; the PSD block is a maximization as written above.
struct ConvexProgram {
  int n = 0;
  Eigen::VectorXd lower, upper;  // size n; +-inf allowed
  ConvexExpr objective;
  std::vector<ConvexExpr> inequalities;  // expr <= 0
  std::vector<LinExpr> equalities;       // expr == 0

  std::unique_ptr<PsdBlock> psd;

  void resize(int vars);
  std::vector<std::string> validate() const;
};

enum class SolveStatus { optimal, iteration_limit, infeasible, numerical_failure };
const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;
  Eigen::MatrixXcd theta;  // PSD block value when present
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  Eigen::VectorXd ineq_multipliers;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd lower_multipliers, upper_multipliers;
};

struct SolveOptions {
  double tol = 1e-7;
  int max_iters = 200;
  const Eigen::VectorXd* warm_x = nullptr;
  const Eigen::MatrixXcd* warm_theta = nullptr;
};

// Throws std::invalid_argument when validate() is nonempty.
SolveReport solve(const ConvexProgram& p, const SolveOptions& opts = {});

// Stationarity/feasibility/complementarity error at an arbitrary point, with
// multipliers fitted by nonnegative least squares on the near-active set.
double kkt_residual(const ConvexProgram& p, const Eigen::VectorXd& x);

// Internal paths, exposed for the dispatching solve().
SolveReport solve_nlp(const ConvexProgram& p, const SolveOptions& opts);
SolveReport solve_psd(const PsdBlock& b, const SolveOptions& opts);

}  // namespace risuav::convex

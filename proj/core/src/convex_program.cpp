#include "risuav/convex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace risuav::convex {

namespace {

void rank_one_update(Eigen::MatrixXd& h, const LinExpr& a, double w) {
  for (const auto& [i, ci] : a.terms)
    for (const auto& [j, cj] : a.terms) h(i, j) += w * ci * cj;
}

class ExpAtom final : public Atom {
 public:
  explicit ExpAtom(LinExpr arg) : arg_(std::move(arg)) {}
  double value(const Eigen::VectorXd& x) const override { return std::exp(arg_.value(x)); }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    arg_.add_gradient(w * std::exp(arg_.value(x)), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    rank_one_update(h, arg_, w * std::exp(arg_.value(x)));
  }
  bool in_domain(const Eigen::VectorXd&) const override { return true; }
  std::string describe() const override { return "exp(affine)"; }

 private:
  LinExpr arg_;
};

class NegLogAtom final : public Atom {
 public:
  explicit NegLogAtom(LinExpr arg) : arg_(std::move(arg)) {}
  double value(const Eigen::VectorXd& x) const override {
    const double f = arg_.value(x);
    return f > 0 ? -std::log(f) : kInf;
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    arg_.add_gradient(-w / arg_.value(x), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double f = arg_.value(x);
    rank_one_update(h, arg_, w / (f * f));
  }
  bool in_domain(const Eigen::VectorXd& x) const override { return arg_.value(x) > 0; }
  std::string describe() const override { return "-log(affine)"; }

 private:
  LinExpr arg_;
};

class PowerAtom final : public Atom {
 public:
  PowerAtom(LinExpr arg, double p) : arg_(std::move(arg)), p_(p) {}
  double value(const Eigen::VectorXd& x) const override {
    const double f = arg_.value(x);
    return f >= 0 ? std::pow(f, p_) : kInf;
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    const double f = std::max(arg_.value(x), 0.0);
    arg_.add_gradient(w * p_ * std::pow(f, p_ - 1.0), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double f = std::max(arg_.value(x), 0.0);
    if (p_ > 2.0 || f > 0.0)
      rank_one_update(h, arg_, w * p_ * (p_ - 1.0) * std::pow(f, p_ - 2.0));
  }
  bool in_domain(const Eigen::VectorXd& x) const override { return arg_.value(x) >= 0; }
  std::string describe() const override { return "power(affine)"; }

 private:
  LinExpr arg_;
  double p_;
};

class InverseAtom final : public Atom {
 public:
  explicit InverseAtom(LinExpr arg) : arg_(std::move(arg)) {}
  double value(const Eigen::VectorXd& x) const override {
    const double f = arg_.value(x);
    return f > 0 ? 1.0 / f : kInf;
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    const double f = arg_.value(x);
    arg_.add_gradient(-w / (f * f), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double f = arg_.value(x);
    rank_one_update(h, arg_, 2.0 * w / (f * f * f));
  }
  bool in_domain(const Eigen::VectorXd& x) const override { return arg_.value(x) > 0; }
  std::string describe() const override { return "1/affine"; }

 private:
  LinExpr arg_;
};

class SquaredNormAtom final : public Atom {
 public:
  explicit SquaredNormAtom(std::vector<LinExpr> rows) : rows_(std::move(rows)) {}
  double value(const Eigen::VectorXd& x) const override {
    double v = 0.0;
    for (const auto& r : rows_) {
      const double z = r.value(x);
      v += z * z;
    }
    return v;
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    for (const auto& r : rows_) r.add_gradient(2.0 * w * r.value(x), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    (void)x;
    for (const auto& r : rows_) rank_one_update(h, r, 2.0 * w);
  }
  bool in_domain(const Eigen::VectorXd&) const override { return true; }
  std::string describe() const override { return "||affine||^2"; }

 private:
  std::vector<LinExpr> rows_;
};

class NormPowerAtom final : public Atom {
 public:
  NormPowerAtom(std::vector<LinExpr> rows, double p) : rows_(std::move(rows)), p_(p) {}
  double value(const Eigen::VectorXd& x) const override {
    return std::pow(norm_sq(x), p_ / 2.0);
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    const double n2 = norm_sq(x);
    if (n2 <= 1e-300) return;
    const double scale = w * p_ * std::pow(n2, p_ / 2.0 - 1.0);
    for (const auto& r : rows_) r.add_gradient(scale * r.value(x), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double n2 = norm_sq(x);
    if (n2 <= 1e-300) return;
    const double a = w * p_ * std::pow(n2, p_ / 2.0 - 1.0);
    const double b = w * p_ * (p_ - 2.0) * std::pow(n2, p_ / 2.0 - 2.0);
    for (const auto& r : rows_) rank_one_update(h, r, a);
    // Outer product of the stacked row values with their coefficient rows.
    for (const auto& ri : rows_)
      for (const auto& rj : rows_) {
        const double zij = b * ri.value(x) * rj.value(x);
        for (const auto& [p1, c1] : ri.terms)
          for (const auto& [p2, c2] : rj.terms) h(p1, p2) += zij * c1 * c2;
      }
  }
  bool in_domain(const Eigen::VectorXd&) const override { return true; }
  std::string describe() const override { return "||affine||^p"; }

 private:
  double norm_sq(const Eigen::VectorXd& x) const {
    double v = 0.0;
    for (const auto& r : rows_) {
      const double z = r.value(x);
      v += z * z;
    }
    return v;
  }
  std::vector<LinExpr> rows_;
  double p_;
};

class QuadOverLinAtom final : public Atom {
 public:
  QuadOverLinAtom(std::vector<LinExpr> rows, LinExpr denom)
      : rows_(std::move(rows)), denom_(std::move(denom)) {}
  double value(const Eigen::VectorXd& x) const override {
    const double d = denom_.value(x);
    if (d <= 0) return kInf;
    double v = 0.0;
    for (const auto& r : rows_) {
      const double z = r.value(x);
      v += z * z;
    }
    return v / d;
  }
  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    const double d = denom_.value(x);
    double n2 = 0.0;
    for (const auto& r : rows_) {
      const double z = r.value(x);
      n2 += z * z;
      r.add_gradient(2.0 * w * z / d, g);
    }
    denom_.add_gradient(-w * n2 / (d * d), g);
  }
  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double d = denom_.value(x);
    double n2 = 0.0;
    for (const auto& r : rows_) {
      const double z = r.value(x);
      n2 += z * z;
      rank_one_update(h, r, 2.0 * w / d);
      // cross terms -(2 z / d^2) (a c' + c a')
      for (const auto& [p1, c1] : r.terms)
        for (const auto& [p2, c2] : denom_.terms) {
          h(p1, p2) += -2.0 * w * z / (d * d) * c1 * c2;
          h(p2, p1) += -2.0 * w * z / (d * d) * c1 * c2;
        }
    }
    rank_one_update(h, denom_, 2.0 * w * n2 / (d * d * d));
  }
  bool in_domain(const Eigen::VectorXd& x) const override { return denom_.value(x) > 0; }
  std::string describe() const override { return "||affine||^2/affine"; }

 private:
  std::vector<LinExpr> rows_;
  LinExpr denom_;
};

class LogPosynomialAtom final : public Atom {
 public:
  LogPosynomialAtom(double constant, std::vector<PosynomialTerm> terms)
      : c0_(constant), terms_(std::move(terms)) {
    for (const auto& t : terms_)
      for (const auto& [v, e] : t.neg_exponents) {
        (void)e;
        if (std::find(vars_.begin(), vars_.end(), v) == vars_.end()) vars_.push_back(v);
      }
  }

  double value(const Eigen::VectorXd& x) const override {
    if (!in_domain(x)) return kInf;
    return std::log(total(x));
  }

  void add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const override {
    const double a = total(x);
    for (const auto& t : terms_) {
      const double tv = term_value(t, x);
      for (const auto& [v, e] : t.neg_exponents) g(v) += w * tv * (-e / x(v)) / a;
    }
  }

  void add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const override {
    const double a = total(x);
    // dA/dx_v accumulated per involved variable.
    Eigen::VectorXd da = Eigen::VectorXd::Zero(x.size());
    for (const auto& t : terms_) {
      const double tv = term_value(t, x);
      for (const auto& [v, e] : t.neg_exponents) da(v) += tv * (-e / x(v));
    }
    // d2A: per term, (e_v e_u / x_v x_u) + diag(e_v / x_v^2)
    for (const auto& t : terms_) {
      const double tv = term_value(t, x);
      for (const auto& [v, ev] : t.neg_exponents) {
        for (const auto& [u, eu] : t.neg_exponents)
          h(v, u) += w * tv * ev * eu / (x(v) * x(u)) / a;
        h(v, v) += w * tv * ev / (x(v) * x(v)) / a;
      }
    }
    for (int v : vars_)
      for (int u : vars_) h(v, u) -= w * da(v) * da(u) / (a * a);
  }

  bool in_domain(const Eigen::VectorXd& x) const override {
    for (int v : vars_)
      if (!(x(v) > 0)) return false;
    return true;
  }
  std::string describe() const override { return "log(posynomial(1/x))"; }

 private:
  static double term_value(const PosynomialTerm& t, const Eigen::VectorXd& x) {
    double v = t.coeff;
    for (const auto& [var, e] : t.neg_exponents) v *= std::pow(x(var), -e);
    return v;
  }
  double total(const Eigen::VectorXd& x) const {
    double a = c0_;
    for (const auto& t : terms_) a += term_value(t, x);
    return a;
  }

  double c0_;
  std::vector<PosynomialTerm> terms_;
  std::vector<int> vars_;
};

}  // namespace

AtomPtr make_exp(LinExpr arg) { return std::make_shared<ExpAtom>(std::move(arg)); }
AtomPtr make_neg_log(LinExpr arg) { return std::make_shared<NegLogAtom>(std::move(arg)); }
AtomPtr make_power(LinExpr arg, double p) {
  if (p < 1.0) throw std::invalid_argument("make_power: exponent must be >= 1");
  return std::make_shared<PowerAtom>(std::move(arg), p);
}
AtomPtr make_inverse(LinExpr arg) { return std::make_shared<InverseAtom>(std::move(arg)); }
AtomPtr make_squared_norm(std::vector<LinExpr> rows) {
  return std::make_shared<SquaredNormAtom>(std::move(rows));
}
AtomPtr make_norm_power(std::vector<LinExpr> rows, double p) {
  if (p < 1.0) throw std::invalid_argument("make_norm_power: exponent must be >= 1");
  return std::make_shared<NormPowerAtom>(std::move(rows), p);
}
AtomPtr make_quad_over_lin(std::vector<LinExpr> rows, LinExpr denom) {
  return std::make_shared<QuadOverLinAtom>(std::move(rows), std::move(denom));
}
AtomPtr make_log_posynomial(double constant, std::vector<PosynomialTerm> terms) {
  if (constant < 0) throw std::invalid_argument("make_log_posynomial: negative constant");
  for (const auto& t : terms) {
    if (t.coeff < 0) throw std::invalid_argument("make_log_posynomial: negative coefficient");
    for (const auto& [v, e] : t.neg_exponents) {
      (void)v;
      if (e < 0) throw std::invalid_argument("make_log_posynomial: negative exponent");
    }
  }
  return std::make_shared<LogPosynomialAtom>(constant, std::move(terms));
}

double ConvexExpr::value(const Eigen::VectorXd& x) const {
  double v = affine.value(x);
  for (const auto& [w, a] : atoms) v += w * a->value(x);
  return v;
}

bool ConvexExpr::in_domain(const Eigen::VectorXd& x) const {
  for (const auto& [w, a] : atoms) {
    (void)w;
    if (!a->in_domain(x)) return false;
  }
  return true;
}

void ConvexExpr::add_gradient(const Eigen::VectorXd& x, double w, Eigen::VectorXd& g) const {
  affine.add_gradient(w, g);
  for (const auto& [aw, a] : atoms) a->add_gradient(x, w * aw, g);
}

void ConvexExpr::add_hessian(const Eigen::VectorXd& x, double w, Eigen::MatrixXd& h) const {
  for (const auto& [aw, a] : atoms) a->add_hessian(x, w * aw, h);
}

void ConvexProgram::resize(int vars) {
  n = vars;
  lower = Eigen::VectorXd::Constant(vars, -kInf);
  upper = Eigen::VectorXd::Constant(vars, kInf);
}

namespace {

bool expr_indices_ok(const LinExpr& e, int n) {
  for (const auto& [i, c] : e.terms) {
    (void)c;
    if (i < 0 || i >= n) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> ConvexProgram::validate() const {
  std::vector<std::string> issues;
  const bool has_scalar = n > 0;
  const bool has_psd = psd != nullptr;
  if (!has_scalar && !has_psd) issues.push_back("program is empty");
  if (has_scalar && has_psd)
    issues.push_back("mixed scalar and PSD blocks are not supported");

  if (has_scalar) {
    if (lower.size() != n || upper.size() != n)
      issues.push_back("bounds must have length n");
    else
      for (int i = 0; i < n; ++i)
        if (lower(i) > upper(i)) issues.push_back("lower bound exceeds upper bound");
    auto check_expr = [&](const ConvexExpr& e, const std::string& what) {
      if (!expr_indices_ok(e.affine, n)) issues.push_back(what + ": index out of range");
      for (const auto& [w, a] : e.atoms) {
        (void)a;
        if (w < 0) issues.push_back(what + ": negative atom weight breaks convexity");
      }
    };
    check_expr(objective, "objective");
    for (const auto& c : inequalities) check_expr(c, "inequality");
    for (const auto& c : equalities)
      if (!expr_indices_ok(c, n)) issues.push_back("equality: index out of range");
  }

  if (has_psd) {
    const auto& b = *psd;
    if (b.dim < 1) issues.push_back("psd: dimension must be positive");
    if (b.log_weights.size() != b.log_offsets.size() ||
        b.log_weights.size() != b.log_mats.size())
      issues.push_back("psd: log term arrays must have equal length");
    for (double w : b.log_weights)
      if (w < 0) issues.push_back("psd: negative log weight breaks concavity");
    for (const auto& m : b.log_mats)
      if (m.rows() != b.dim || m.cols() != b.dim) issues.push_back("psd: matrix size mismatch");
    if (b.linear.rows() != b.dim || b.linear.cols() != b.dim)
      issues.push_back("psd: linear matrix size mismatch");
  }
  return issues;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

SolveReport solve(const ConvexProgram& p, const SolveOptions& opts) {
  const auto issues = p.validate();
  if (!issues.empty()) {
    std::ostringstream msg;
    msg << "convex solve: invalid program:";
    for (const auto& s : issues) msg << " [" << s << "]";
    throw std::invalid_argument(msg.str());
  }
  if (p.psd) return solve_psd(*p.psd, opts);
  return solve_nlp(p, opts);
}

double kkt_residual(const ConvexProgram& p, const Eigen::VectorXd& x) {
  if (p.psd) throw std::invalid_argument("kkt_residual: scalar programs only");
  const double act_tol = 1e-6;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.n);
  if (!p.objective.in_domain(x)) return kInf;
  p.objective.add_gradient(x, 1.0, grad);

  // Build the matrix of active constraint gradients (inequalities at the
  // boundary, bounds at the boundary, all equalities).
  std::vector<Eigen::VectorXd> cols;
  std::vector<bool> sign_free;
  double primal_violation = 0.0;

  for (const auto& c : p.inequalities) {
    const double v = c.value(x);
    primal_violation = std::max(primal_violation, v);
    if (v >= -act_tol) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(p.n);
      c.add_gradient(x, 1.0, g);
      cols.push_back(g);
      sign_free.push_back(false);
    }
  }
  for (int i = 0; i < p.n; ++i) {
    if (std::isfinite(p.lower(i))) {
      primal_violation = std::max(primal_violation, p.lower(i) - x(i));
      if (x(i) - p.lower(i) <= act_tol) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p.n);
        g(i) = -1.0;
        cols.push_back(g);
        sign_free.push_back(false);
      }
    }
    if (std::isfinite(p.upper(i))) {
      primal_violation = std::max(primal_violation, x(i) - p.upper(i));
      if (p.upper(i) - x(i) <= act_tol) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p.n);
        g(i) = 1.0;
        cols.push_back(g);
        sign_free.push_back(false);
      }
    }
  }
  for (const auto& e : p.equalities) {
    primal_violation = std::max(primal_violation, std::abs(e.value(x)));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p.n);
    e.add_gradient(1.0, g);
    cols.push_back(g);
    sign_free.push_back(true);
  }

  double stationarity;
  if (cols.empty()) {
    stationarity = grad.lpNorm<Eigen::Infinity>();
  } else {
    Eigen::MatrixXd A(p.n, static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) A.col(static_cast<int>(j)) = cols[j];
    // Nonnegative least squares by active-set pruning: solve, clamp negative
    // multipliers of sign-constrained columns to zero, repeat.
    std::vector<int> keep(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) keep[j] = static_cast<int>(j);
    Eigen::VectorXd mult;
    for (int round = 0; round < 50 && !keep.empty(); ++round) {
      Eigen::MatrixXd Ak(p.n, static_cast<int>(keep.size()));
      for (std::size_t j = 0; j < keep.size(); ++j) Ak.col(static_cast<int>(j)) = cols[keep[j]];
      mult = Ak.colPivHouseholderQr().solve(-grad);
      bool pruned = false;
      std::vector<int> next;
      for (std::size_t j = 0; j < keep.size(); ++j) {
        if (!sign_free[keep[j]] && mult(static_cast<int>(j)) < -1e-12) {
          pruned = true;
        } else {
          next.push_back(keep[j]);
        }
      }
      if (!pruned) {
        stationarity = (grad + Ak * mult).lpNorm<Eigen::Infinity>();
        return std::max(stationarity, primal_violation);
      }
      keep = std::move(next);
    }
    stationarity = grad.lpNorm<Eigen::Infinity>();
  }
  return std::max(stationarity, primal_violation);
}

}  // namespace risuav::convex

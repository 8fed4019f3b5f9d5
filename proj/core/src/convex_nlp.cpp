// Infeasible-start primal-dual interior-point method for smooth convex
// programs with box bounds, inequality expressions, and affine equalities.
// Slacks are attached to inequalities; bounds contribute diagonal barrier
// terms directly, so the reduced Newton system stays n x n (plus equality
// rows when present).

#include "risuav/convex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

namespace risuav::convex {

namespace {

struct BoundSet {
  std::vector<int> lo;  // variable indices with finite lower bounds
  std::vector<int> up;
};

bool all_in_domain(const ConvexProgram& p, const Eigen::VectorXd& x) {
  if (!p.objective.in_domain(x)) return false;
  for (const auto& c : p.inequalities)
    if (!c.in_domain(x)) return false;
  return true;
}

// Residual of the perturbed KKT system; the merit function is its 2-norm.
struct Residual {
  Eigen::VectorXd dual;  // stationarity
  Eigen::VectorXd pri;   // g(x) + s
  Eigen::VectorXd eq;    // h(x)
  Eigen::VectorXd comp;  // s.lam - mu, (x-l)zlo - mu, (u-x)zup - mu stacked

  double norm() const {
    return std::sqrt(dual.squaredNorm() + pri.squaredNorm() + eq.squaredNorm() +
                     comp.squaredNorm());
  }
};

struct State {
  Eigen::VectorXd x, s, lam, nu, zlo, zup;
};

Residual eval_residual(const ConvexProgram& p, const BoundSet& bs,
                       const std::vector<Eigen::VectorXd>& ineq_grads,
                       const Eigen::VectorXd& obj_grad, const State& st, double mu) {
  const int mi = static_cast<int>(p.inequalities.size());
  const int me = static_cast<int>(p.equalities.size());
  const int nlo = static_cast<int>(bs.lo.size());
  const int nup = static_cast<int>(bs.up.size());

  Residual r;
  r.dual = obj_grad;
  for (int i = 0; i < mi; ++i) r.dual += st.lam(i) * ineq_grads[i];
  for (int j = 0; j < me; ++j) p.equalities[j].add_gradient(st.nu(j), r.dual);
  for (int k = 0; k < nlo; ++k) r.dual(bs.lo[k]) -= st.zlo(k);
  for (int k = 0; k < nup; ++k) r.dual(bs.up[k]) += st.zup(k);

  r.pri.resize(mi);
  for (int i = 0; i < mi; ++i) r.pri(i) = p.inequalities[i].value(st.x) + st.s(i);
  r.eq.resize(me);
  for (int j = 0; j < me; ++j) r.eq(j) = p.equalities[j].value(st.x);

  r.comp.resize(mi + nlo + nup);
  for (int i = 0; i < mi; ++i) r.comp(i) = st.s(i) * st.lam(i) - mu;
  for (int k = 0; k < nlo; ++k)
    r.comp(mi + k) = (st.x(bs.lo[k]) - p.lower(bs.lo[k])) * st.zlo(k) - mu;
  for (int k = 0; k < nup; ++k)
    r.comp(mi + nlo + k) = (p.upper(bs.up[k]) - st.x(bs.up[k])) * st.zup(k) - mu;
  return r;
}

}  // namespace

SolveReport solve_nlp(const ConvexProgram& p, const SolveOptions& opts) {
  const auto t_start = std::chrono::steady_clock::now();
  SolveReport rep;

  const int n = p.n;
  const int mi = static_cast<int>(p.inequalities.size());
  const int me = static_cast<int>(p.equalities.size());

  BoundSet bs;
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.lower(i))) bs.lo.push_back(i);
    if (std::isfinite(p.upper(i))) bs.up.push_back(i);
  }
  const int nlo = static_cast<int>(bs.lo.size());
  const int nup = static_cast<int>(bs.up.size());
  const int m_tot = mi + nlo + nup;

  // Strictly interior start. A warm point is nudged off the bounds.
  State st;
  st.x = (opts.warm_x && opts.warm_x->size() == n) ? *opts.warm_x
                                                   : Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double lo = p.lower(i), up = p.upper(i);
    if (std::isfinite(lo) && std::isfinite(up)) {
      const double margin = std::min(1e-4 * std::max(1.0, up - lo), 0.45 * (up - lo));
      st.x(i) = std::clamp(st.x(i), lo + margin, up - margin);
    } else if (std::isfinite(lo)) {
      st.x(i) = std::max(st.x(i), lo + 1e-4 * std::max(1.0, std::abs(lo)));
    } else if (std::isfinite(up)) {
      st.x(i) = std::min(st.x(i), up - 1e-4 * std::max(1.0, std::abs(up)));
    }
  }
  if (!all_in_domain(p, st.x)) {
    // Fall back to the bound box midpoint before giving up.
    for (int i = 0; i < n; ++i) {
      const double lo = p.lower(i), up = p.upper(i);
      if (std::isfinite(lo) && std::isfinite(up)) st.x(i) = 0.5 * (lo + up);
      else if (std::isfinite(lo)) st.x(i) = lo + 1.0;
      else if (std::isfinite(up)) st.x(i) = up - 1.0;
      else st.x(i) = 1.0;
    }
    if (!all_in_domain(p, st.x)) {
      rep.status = SolveStatus::numerical_failure;
      rep.x = st.x;
      rep.kkt_residual = kInf;
      return rep;
    }
  }

  st.s.resize(mi);
  st.lam.resize(mi);
  for (int i = 0; i < mi; ++i) {
    st.s(i) = std::clamp(-p.inequalities[i].value(st.x), 1e-2, 1e2);
    st.lam(i) = 1.0 / st.s(i);
  }
  st.nu = Eigen::VectorXd::Zero(me);
  st.zlo.resize(nlo);
  for (int k = 0; k < nlo; ++k)
    st.zlo(k) = 1.0 / std::clamp(st.x(bs.lo[k]) - p.lower(bs.lo[k]), 1e-2, 1e2);
  st.zup.resize(nup);
  for (int k = 0; k < nup; ++k)
    st.zup(k) = 1.0 / std::clamp(p.upper(bs.up[k]) - st.x(bs.up[k]), 1e-2, 1e2);

  const double sigma = 0.1;
  const double ftb = 0.995;  // fraction-to-boundary
  int stalled = 0;

  std::vector<Eigen::VectorXd> ineq_grads(mi, Eigen::VectorXd::Zero(n));
  Eigen::VectorXd obj_grad(n);

  auto surrogate_gap = [&](const State& w) {
    double eta = w.s.dot(w.lam);
    for (int k = 0; k < nlo; ++k) eta += (w.x(bs.lo[k]) - p.lower(bs.lo[k])) * w.zlo(k);
    for (int k = 0; k < nup; ++k) eta += (p.upper(bs.up[k]) - w.x(bs.up[k])) * w.zup(k);
    return eta;
  };

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    obj_grad.setZero();
    p.objective.add_gradient(st.x, 1.0, obj_grad);
    for (int i = 0; i < mi; ++i) {
      ineq_grads[i].setZero();
      p.inequalities[i].add_gradient(st.x, 1.0, ineq_grads[i]);
    }

    const double eta = m_tot > 0 ? surrogate_gap(st) : 0.0;
    const double mu = m_tot > 0 ? sigma * eta / m_tot : 0.0;

    Residual res0 = eval_residual(p, bs, ineq_grads, obj_grad, st, 0.0);
    const double feas =
        std::max(mi ? res0.pri.lpNorm<Eigen::Infinity>() : 0.0,
                 me ? res0.eq.lpNorm<Eigen::Infinity>() : 0.0);
    const double stat = res0.dual.lpNorm<Eigen::Infinity>();
    const double grad_scale = 1.0 + obj_grad.lpNorm<Eigen::Infinity>();
    if (feas <= opts.tol && stat <= opts.tol * grad_scale &&
        (m_tot == 0 || eta / m_tot <= opts.tol)) {
      rep.status = SolveStatus::optimal;
      break;
    }

    // Reduced Newton matrix: Hessian of the Lagrangian plus barrier terms.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    p.objective.add_hessian(st.x, 1.0, M);
    for (int i = 0; i < mi; ++i) p.inequalities[i].add_hessian(st.x, st.lam(i), M);
    for (int i = 0; i < mi; ++i) {
      const Eigen::VectorXd& g = ineq_grads[i];
      M.noalias() += (st.lam(i) / st.s(i)) * g * g.transpose();
    }
    for (int k = 0; k < nlo; ++k)
      M(bs.lo[k], bs.lo[k]) += st.zlo(k) / (st.x(bs.lo[k]) - p.lower(bs.lo[k]));
    for (int k = 0; k < nup; ++k)
      M(bs.up[k], bs.up[k]) += st.zup(k) / (p.upper(bs.up[k]) - st.x(bs.up[k]));

    // Right-hand side for the condensed system.
    Residual res_mu = eval_residual(p, bs, ineq_grads, obj_grad, st, mu);
    Eigen::VectorXd rhs = -res_mu.dual;
    for (int i = 0; i < mi; ++i) {
      const double w = st.lam(i) / st.s(i);
      const double coef = (mu / st.s(i) - st.lam(i)) + w * res_mu.pri(i);
      rhs.noalias() -= coef * ineq_grads[i];
    }
    for (int k = 0; k < nlo; ++k)
      rhs(bs.lo[k]) += mu / (st.x(bs.lo[k]) - p.lower(bs.lo[k])) - st.zlo(k);
    for (int k = 0; k < nup; ++k)
      rhs(bs.up[k]) -= mu / (p.upper(bs.up[k]) - st.x(bs.up[k])) - st.zup(k);

    Eigen::VectorXd dx(n), dnu(me);
    double reg = 0.0;
    bool solved = false;
    for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
      Eigen::MatrixXd Mreg = M;
      if (reg > 0) Mreg.diagonal().array() += reg;
      if (me == 0) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Mreg);
        if (ldlt.info() == Eigen::Success) {
          dx = ldlt.solve(rhs);
          solved = dx.allFinite() && (Mreg * dx - rhs).norm() <= 1e-6 * (1.0 + rhs.norm());
        }
      } else {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + me, n + me);
        K.topLeftCorner(n, n) = Mreg;
        for (int j = 0; j < me; ++j) {
          for (const auto& [idx, c] : p.equalities[j].terms) {
            K(idx, n + j) += c;
            K(n + j, idx) += c;
          }
        }
        Eigen::VectorXd rhs_full(n + me);
        rhs_full.head(n) = rhs;
        rhs_full.tail(me) = -res_mu.eq;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        Eigen::VectorXd sol = lu.solve(rhs_full);
        if (sol.allFinite() &&
            (K * sol - rhs_full).norm() <= 1e-6 * (1.0 + rhs_full.norm())) {
          dx = sol.head(n);
          dnu = sol.tail(me);
          solved = true;
        }
      }
      if (!solved) reg = reg == 0.0 ? 1e-10 * (1.0 + M.diagonal().cwiseAbs().maxCoeff()) : reg * 100.0;
    }
    if (!solved) {
      rep.status = SolveStatus::numerical_failure;
      break;
    }

    // Recover slack and multiplier directions.
    Eigen::VectorXd ds(mi), dlam(mi), dzlo(nlo), dzup(nup);
    for (int i = 0; i < mi; ++i) {
      const double gdx = ineq_grads[i].dot(dx);
      ds(i) = -res_mu.pri(i) - gdx;
      dlam(i) = mu / st.s(i) - st.lam(i) - (st.lam(i) / st.s(i)) * ds(i);
    }
    for (int k = 0; k < nlo; ++k) {
      const double gap = st.x(bs.lo[k]) - p.lower(bs.lo[k]);
      dzlo(k) = (mu - gap * st.zlo(k) - st.zlo(k) * dx(bs.lo[k])) / gap;
    }
    for (int k = 0; k < nup; ++k) {
      const double gap = p.upper(bs.up[k]) - st.x(bs.up[k]);
      dzup(k) = (mu - gap * st.zup(k) + st.zup(k) * dx(bs.up[k])) / gap;
    }

    // Single fraction-to-boundary step for all positive quantities.
    double alpha = 1.0;
    auto cap_positive = [&](double v, double dv) {
      if (dv < 0) alpha = std::min(alpha, -ftb * v / dv);
    };
    for (int i = 0; i < mi; ++i) {
      cap_positive(st.s(i), ds(i));
      cap_positive(st.lam(i), dlam(i));
    }
    for (int k = 0; k < nlo; ++k) {
      cap_positive(st.x(bs.lo[k]) - p.lower(bs.lo[k]), dx(bs.lo[k]));
      cap_positive(st.zlo(k), dzlo(k));
    }
    for (int k = 0; k < nup; ++k) {
      cap_positive(p.upper(bs.up[k]) - st.x(bs.up[k]), -dx(bs.up[k]));
      cap_positive(st.zup(k), dzup(k));
    }

    const double merit0 = res_mu.norm();
    State trial;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      trial.x = st.x + alpha * dx;
      if (!all_in_domain(p, trial.x)) {
        alpha *= 0.5;
        continue;
      }
      trial.s = st.s + alpha * ds;
      trial.lam = st.lam + alpha * dlam;
      trial.nu = st.nu + alpha * dnu.head(me);
      trial.zlo = st.zlo + alpha * dzlo;
      trial.zup = st.zup + alpha * dzup;

      Eigen::VectorXd og = Eigen::VectorXd::Zero(n);
      p.objective.add_gradient(trial.x, 1.0, og);
      std::vector<Eigen::VectorXd> gg(mi, Eigen::VectorXd::Zero(n));
      for (int i = 0; i < mi; ++i) p.inequalities[i].add_gradient(trial.x, 1.0, gg[i]);
      const double merit = eval_residual(p, bs, gg, og, trial, mu).norm();
      if (merit <= (1.0 - 0.01 * alpha) * merit0 || merit < opts.tol) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (++stalled >= 3) {
        rep.status = SolveStatus::iteration_limit;
        break;
      }
      trial.x = st.x + alpha * dx;
      if (!all_in_domain(p, trial.x)) continue;
      trial.s = st.s + alpha * ds;
      trial.lam = st.lam + alpha * dlam;
      trial.nu = st.nu + alpha * dnu.head(me);
      trial.zlo = st.zlo + alpha * dzlo;
      trial.zup = st.zup + alpha * dzup;
    } else {
      stalled = 0;
    }
    st = trial;
  }
  if (iter == opts.max_iters) rep.status = SolveStatus::iteration_limit;

  obj_grad.setZero();
  p.objective.add_gradient(st.x, 1.0, obj_grad);
  for (int i = 0; i < mi; ++i) {
    ineq_grads[i].setZero();
    p.inequalities[i].add_gradient(st.x, 1.0, ineq_grads[i]);
  }
  Residual fin = eval_residual(p, bs, ineq_grads, obj_grad, st, 0.0);

  rep.x = st.x;
  rep.objective = p.objective.value(st.x);
  rep.iterations = iter;
  rep.ineq_multipliers = st.lam;
  rep.eq_multipliers = st.nu;
  rep.lower_multipliers = Eigen::VectorXd::Zero(n);
  rep.upper_multipliers = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < nlo; ++k) rep.lower_multipliers(bs.lo[k]) = st.zlo(k);
  for (int k = 0; k < nup; ++k) rep.upper_multipliers(bs.up[k]) = st.zup(k);
  rep.kkt_residual = std::max({fin.dual.lpNorm<Eigen::Infinity>(),
                               mi ? fin.pri.lpNorm<Eigen::Infinity>() : 0.0,
                               me ? fin.eq.lpNorm<Eigen::Infinity>() : 0.0});
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace risuav::convex

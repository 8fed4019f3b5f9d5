// Barrier method for the Hermitian unit-diagonal block:
//   maximize  sum_k c_k ln(a_k + Re tr(A_k X)) + Re tr(G X),  X >= 0, X_jj = 1.
// Off-diagonal entries are the free coordinates (real and imaginary parts per
// pair), which keeps the Newton system dense but small: m = d(d-1) unknowns.

#include "risuav/convex.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <vector>

namespace risuav::convex {

namespace {

using Cplx = std::complex<double>;

struct PairIndex {
  int j, k;  // j < k
};

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& a) {
  return 0.5 * (a + a.adjoint());
}

double re_trace_prod(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& x) {
  return (a.cwiseProduct(x.transpose())).sum().real();
}

// Packs d/dtheta of Re tr(A X) for a Hermitian A into an m-vector:
// re coordinate of pair (j,k) -> 2 Re A(j,k); im coordinate -> 2 Im A(j,k).
Eigen::VectorXd trace_gradient(const Eigen::MatrixXcd& a, const std::vector<PairIndex>& pairs) {
  Eigen::VectorXd g(2 * pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const Cplx v = a(pairs[p].j, pairs[p].k);
    g(2 * p) = 2.0 * v.real();
    g(2 * p + 1) = 2.0 * v.imag();
  }
  return g;
}

Eigen::MatrixXcd unpack(const Eigen::VectorXd& theta, const std::vector<PairIndex>& pairs,
                        int dim) {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(dim, dim);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const Cplx v(theta(2 * p), theta(2 * p + 1));
    x(pairs[p].j, pairs[p].k) = v;
    x(pairs[p].k, pairs[p].j) = std::conj(v);
  }
  return x;
}

}  // namespace

SolveReport solve_psd(const PsdBlock& b, const SolveOptions& opts) {
  const auto t_begin = std::chrono::steady_clock::now();
  SolveReport rep;

  const int d = b.dim;
  std::vector<PairIndex> pairs;
  pairs.reserve(d * (d - 1) / 2);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) pairs.push_back({j, k});
  const int m = 2 * static_cast<int>(pairs.size());

  const Eigen::MatrixXcd lin = hermitian_part(b.linear);
  const Eigen::VectorXd lin_grad = trace_gradient(lin, pairs);

  struct LogTerm {
    double weight, offset;
    Eigen::MatrixXcd mat;
    Eigen::VectorXd grad;
  };
  std::vector<LogTerm> logs;
  for (std::size_t k = 0; k < b.log_weights.size(); ++k) {
    if (b.log_weights[k] <= 0.0) continue;
    LogTerm lt;
    lt.weight = b.log_weights[k];
    lt.offset = b.log_offsets[k];
    lt.mat = hermitian_part(b.log_mats[k]);
    lt.grad = trace_gradient(lt.mat, pairs);
    logs.push_back(std::move(lt));
  }

  auto objective = [&](const Eigen::MatrixXcd& x, bool* ok) -> double {
    double f = b.constant + re_trace_prod(lin, x);
    for (const auto& lt : logs) {
      const double arg = lt.offset + re_trace_prod(lt.mat, x);
      if (arg <= 0) {
        if (ok) *ok = false;
        return -kInf;
      }
      f += lt.weight * std::log(arg);
    }
    if (ok) *ok = true;
    return f;
  };

  // Strictly feasible start: shrink any warm matrix toward the identity until
  // it factors.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);
  if (opts.warm_theta && opts.warm_theta->rows() == d && opts.warm_theta->cols() == d) {
    const Eigen::MatrixXcd w = hermitian_part(*opts.warm_theta);
    for (double blend : {0.98, 0.9, 0.5, 0.0}) {
      Eigen::MatrixXcd x = blend * w + (1.0 - blend) * Eigen::MatrixXcd::Identity(d, d);
      x.diagonal().setOnes();
      Eigen::LLT<Eigen::MatrixXcd> llt(x);
      bool ok = llt.info() == Eigen::Success;
      if (ok) objective(x, &ok);
      if (ok) {
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          theta(2 * p) = x(pairs[p].j, pairs[p].k).real();
          theta(2 * p + 1) = x(pairs[p].j, pairs[p].k).imag();
        }
        break;
      }
    }
  }

  auto chol_logdet = [&](const Eigen::LLT<Eigen::MatrixXcd>& llt) {
    const Eigen::MatrixXcd l = llt.matrixL();
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += 2.0 * std::log(l(i, i).real());
    return v;
  };

  Eigen::MatrixXcd x = unpack(theta, pairs, d);
  double logdet_now;
  {
    bool ok = true;
    objective(x, &ok);
    Eigen::LLT<Eigen::MatrixXcd> llt(x);
    if (!ok || llt.info() != Eigen::Success) {
      rep.status = SolveStatus::numerical_failure;
      rep.theta = x;
      return rep;
    }
    logdet_now = chol_logdet(llt);
  }

  double f_now = objective(x, nullptr);
  double t = std::max(1.0, static_cast<double>(d) / (1.0 + std::abs(f_now)));
  const double mu_factor = 20.0;
  const int newton_cap = std::max(500, opts.max_iters);
  int newton_total = 0;
  bool hit_cap = false;

  Eigen::MatrixXcd S(d, d), T(d, d);
  Eigen::VectorXd grad(m), delta(m);
  Eigen::MatrixXd hess(m, m);

  while (true) {
    for (int step = 0; step < 60; ++step) {
      if (++newton_total > newton_cap) {
        hit_cap = true;
        break;
      }
      S = x.inverse();

      // Gradient of t*F + ln det X in the packed coordinates.
      grad = t * lin_grad;
      for (const auto& lt : logs) {
        const double arg = lt.offset + re_trace_prod(lt.mat, x);
        grad += (t * lt.weight / arg) * lt.grad;
      }
      grad += trace_gradient(S, pairs);

      // Hessian: rank-one log-term curvature plus the log-det metric, whose
      // column for coordinate v is read from T = S B_v S.
      hess.setZero();
      for (const auto& lt : logs) {
        const double arg = lt.offset + re_trace_prod(lt.mat, x);
        hess.noalias() -= (t * lt.weight / (arg * arg)) * lt.grad * lt.grad.transpose();
      }
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto sj = S.col(pairs[p].j);
        const auto sk = S.col(pairs[p].k);
        // re coordinate: B = e_j e_k^H + e_k e_j^H -> T = s_j s_k^H + s_k s_j^H
        T.noalias() = sj * sk.adjoint();
        T += sk * sj.adjoint();
        for (std::size_t q = 0; q < pairs.size(); ++q) {
          const Cplx tv = T(pairs[q].j, pairs[q].k);
          hess(2 * p, 2 * q) -= 2.0 * tv.real();
          hess(2 * p, 2 * q + 1) -= 2.0 * tv.imag();
        }
        // im coordinate: B = i e_j e_k^H - i e_k e_j^H
        T.noalias() = Cplx(0, 1) * (sj * sk.adjoint());
        T -= Cplx(0, 1) * (sk * sj.adjoint());
        for (std::size_t q = 0; q < pairs.size(); ++q) {
          const Cplx tv = T(pairs[q].j, pairs[q].k);
          hess(2 * p + 1, 2 * q) -= 2.0 * tv.real();
          hess(2 * p + 1, 2 * q + 1) -= 2.0 * tv.imag();
        }
      }

      Eigen::LDLT<Eigen::MatrixXd> ldlt(-hess);
      delta = ldlt.solve(grad);
      if (!delta.allFinite()) {
        hit_cap = true;
        break;
      }
      const double dec2 = grad.dot(delta);
      if (dec2 / 2.0 <= std::max(1e-12 * t, 0.01 * opts.tol * t)) break;

      double alpha = 1.0;
      bool moved = false;
      const double phi0 = t * f_now + logdet_now;
      for (int bt = 0; bt < 50; ++bt) {
        Eigen::MatrixXcd xt = unpack(theta + alpha * delta, pairs, d);
        Eigen::LLT<Eigen::MatrixXcd> llt(xt);
        if (llt.info() == Eigen::Success) {
          bool ok = true;
          const double ft = objective(xt, &ok);
          if (ok) {
            const double logdet = chol_logdet(llt);
            if (t * ft + logdet >= phi0 + 0.25 * alpha * dec2) {
              theta += alpha * delta;
              x = std::move(xt);
              f_now = ft;
              logdet_now = logdet;
              moved = true;
              break;
            }
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
    if (hit_cap || static_cast<double>(d) / t <= opts.tol) break;
    t *= mu_factor;
  }

  rep.status = hit_cap ? SolveStatus::iteration_limit : SolveStatus::optimal;
  rep.theta = x;
  rep.x = theta;
  rep.objective = f_now;
  rep.iterations = newton_total;
  rep.kkt_residual = static_cast<double>(d) / t;
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return rep;
}

}  // namespace risuav::convex

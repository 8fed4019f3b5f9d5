#include "risuav/phase.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <utility>

#include "risuav/convex.hpp"
#include "risuav/rng.hpp"

namespace risuav::phase {

namespace {

constexpr double kLn2 = 0.6931471805599453;
// Below this per-slot transmit power the slot objective is flat in the phases.
constexpr double kPowerFloor = 1e-15;

double re_trace(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& x) {
  return (a.cwiseProduct(x.transpose())).sum().real();
}

Eigen::VectorXcd unit_phasor(const Eigen::VectorXd& theta) {
  Eigen::VectorXcd e(theta.size());
  for (Eigen::Index m = 0; m < theta.size(); ++m) {
    e(m) = std::polar(1.0, theta(m));
  }
  return e;
}

// De-rotate a lifted vector so the reference coordinate has zero phase, then
// project each element to unit modulus.
Eigen::VectorXd project_phases(const Eigen::VectorXcd& lifted) {
  const Eigen::Index m = lifted.size() - 1;
  const std::complex<double> ref = std::conj(lifted(m));
  Eigen::VectorXd theta(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    theta(k) = std::arg(lifted(k) * ref);
  }
  return theta;
}

}  // namespace

Eigen::MatrixXcd lift_matrix(const Eigen::VectorXcd& cascade, std::complex<double> direct) {
  const Eigen::Index m = cascade.size();
  Eigen::VectorXcd w(m + 1);
  w.head(m) = cascade;
  w(m) = direct;
  return w.conjugate() * w.transpose();
}

double slot_sum_rate(const Scenario& s, const Eigen::VectorXcd& combined,
                     const Eigen::VectorXd& powers) {
  double received = 0.0;
  for (Eigen::Index i = 0; i < combined.size(); ++i) {
    received += powers(i) * std::norm(combined(i));
  }
  return s.radio.bandwidth_hz * std::log2(1.0 + received / s.radio.noise_power_w);
}

Result optimize(const Inputs& in, const PhaseConfig& incumbent) {
  const Scenario& s = *in.scenario;
  const ChannelState& ch = *in.channel;
  const Eigen::MatrixXd& powers = *in.powers;
  const int slots = s.time.slots;
  const int elements = s.radio.ris_elements;
  const int dim = elements + 1;
  const double noise = s.radio.noise_power_w;

  Result out;
  out.phases = incumbent;
  out.slots.resize(static_cast<std::size_t>(slots));

  for (int n = 0; n < slots; ++n) {
    SlotReport& rep = out.slots[static_cast<std::size_t>(n)];

    // Devices with transmit power this slot, in decoding order. The sum rate
    // only depends on the totals, but the refinement splits it along the
    // decoding chain, so the cumulative matrices follow that order.
    std::vector<int> active;
    for (int k = 0; k < s.device_count(); ++k) {
      const int dev = ch.orders[static_cast<std::size_t>(n)].order[static_cast<std::size_t>(k)];
      if (powers(dev, n) > kPowerFloor) active.push_back(dev);
    }
    const auto eval_slot = [&](const Eigen::VectorXd& theta) {
      const Eigen::VectorXcd combined =
          ch.direct.col(n) + ch.cascade[static_cast<std::size_t>(n)] * unit_phasor(theta);
      return slot_sum_rate(s, combined, powers.col(n));
    };
    rep.achieved_value = eval_slot(incumbent.row(n));
    if (active.empty()) continue;
    rep.solved = true;

    // Cumulative lifted signal matrices along the decoding chain, scaled by
    // the noise power so every log argument is 1 + received/noise.
    std::vector<Eigen::MatrixXcd> cumulative;
    cumulative.reserve(active.size());
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (const int dev : active) {
      acc += (powers(dev, n) / noise) *
             lift_matrix(ch.cascade[static_cast<std::size_t>(n)].row(dev), ch.direct(dev, n));
      cumulative.push_back(acc);
    }
    const Eigen::MatrixXcd& total = cumulative.back();
    const auto relaxed_obj = [&](const Eigen::MatrixXcd& theta_mat) {
      return std::log2(1.0 + re_trace(total, theta_mat));
    };

    // Start from the incumbent's own lift: feasible and exactly rank one.
    Eigen::VectorXcd lifted0(dim);
    lifted0.head(elements) = unit_phasor(incumbent.row(n));
    lifted0(elements) = 1.0;
    Eigen::MatrixXcd theta_mat = lifted0 * lifted0.adjoint();

    double obj = relaxed_obj(theta_mat);
    rep.trace.push_back(s.radio.bandwidth_hz * obj);
    for (int round = 0; round < s.solver.dc_max_iters; ++round) {
      convex::PsdBlock block;
      block.dim = dim;
      for (const auto& mat : cumulative) {
        block.log_weights.push_back(1.0 / kLn2);
        block.log_offsets.push_back(1.0);
        block.log_mats.push_back(mat);
      }
      // Subtracted interference logs, linearized at the current iterate. The
      // weakest link's interference is noise only: no matrix term.
      block.linear = Eigen::MatrixXcd::Zero(dim, dim);
      for (std::size_t k = 1; k < cumulative.size(); ++k) {
        const double arg = 1.0 + re_trace(cumulative[k - 1], theta_mat);
        block.linear -= cumulative[k - 1] / (kLn2 * arg);
      }

      convex::SolveOptions opts;
      opts.tol = s.solver.sdp_tol;
      opts.warm_theta = &theta_mat;
      const convex::SolveReport sdp = convex::solve_psd(block, opts);
      ++rep.iterations;
      if (sdp.status != convex::SolveStatus::optimal &&
          sdp.status != convex::SolveStatus::iteration_limit) {
        break;
      }
      const double next = relaxed_obj(sdp.theta);
      if (next <= obj) break;  // ascent exhausted (or numerical floor)
      const double gain = next - obj;
      theta_mat = sdp.theta;
      obj = next;
      rep.trace.push_back(s.radio.bandwidth_hz * obj);
      // One solve settles the chain when nothing is subtracted.
      if (active.size() == 1 || gain <= s.solver.dc_tol) break;
    }
    out.total_iterations += rep.iterations;
    rep.relaxed_bound = s.radio.bandwidth_hz * obj;

    // Recover unit-modulus phases: principal eigenvector first, covariance
    // samples when the relaxation kept extra rank.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(theta_mat);
    const Eigen::VectorXd& evals = eig.eigenvalues();
    rep.rank_one = evals(dim - 2) <= 1e-6 * evals(dim - 1);

    Eigen::VectorXd best_theta = incumbent.row(n);
    double best_value = rep.achieved_value;
    const auto consider = [&](const Eigen::VectorXd& theta) {
      const double value = eval_slot(theta);
      if (value > best_value) {
        best_value = value;
        best_theta = theta;
      }
    };
    consider(project_phases(eig.eigenvectors().col(dim - 1)));

    if (!rep.rank_one) {
      Eigen::MatrixXcd shifted = theta_mat;
      shifted.diagonal().array() += 1e-12;
      const Eigen::MatrixXcd chol = Eigen::LLT<Eigen::MatrixXcd>(shifted).matrixL();
      for (int cand = 0; cand < s.solver.randomization_count; ++cand) {
        const rng::Stream draw(in.seed, rng::Purpose::gauss_randomize,
                               static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(cand));
        Eigen::VectorXcd g(dim);
        for (int m = 0; m < dim; ++m) {
          g(m) = draw.complex_normal(static_cast<std::uint64_t>(m));
        }
        consider(project_phases(chol * g));
      }
    }

    out.phases.row(n) = best_theta;
    rep.achieved_value = best_value;
  }
  return out;
}

}  // namespace risuav::phase

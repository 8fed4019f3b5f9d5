// Bit allocation, offload rates, and implied transmit powers for a fixed
// trajectory and phase configuration. Two routes solve the same concave
// program: a multiplier search built on closed-form inner maximizers, and an
// interior-point solve used as the reference and as the fallback.

#include "risuav/bitpower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "risuav/convex.hpp"

namespace risuav::bitpower {

namespace {

constexpr double kMega = 1e6;  // internal bit unit of the interior-point route
constexpr double kLn2 = 0.6931471805599453;

double total_usage(const Eigen::VectorXd& usage) {
  return usage.size() ? usage(usage.size() - 1) : 0.0;
}

}  // namespace

SlotOrder slot_order(const Eigen::VectorXd& gains_sq, double noise_w) {
  const auto ord = decoding_order(gains_sq);
  const int count = static_cast<int>(ord.order.size());
  SlotOrder so;
  so.device = ord.order;
  so.gain.resize(count);
  for (int i = 0; i < count; ++i) {
    so.gain(i) = gains_sq(so.device[i]);
    if (!(so.gain(i) > 0.0)) throw std::domain_error("slot_order: nonpositive channel gain");
  }
  so.coeff.resize(count);
  for (int i = 0; i + 1 < count; ++i)
    so.coeff(i) = noise_w * (1.0 / so.gain(i) - 1.0 / so.gain(i + 1));
  so.coeff(count - 1) = noise_w / so.gain(count - 1);
  so.boundary = noise_w / so.gain(0);
  return so;
}

Eigen::VectorXd cumulative_usage(const SlotOrder& so, const Eigen::MatrixXd& rates, int slot,
                                 double bandwidth_hz) {
  const int count = static_cast<int>(so.device.size());
  Eigen::VectorXd usage(count);
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    acc += rates(so.device[i], slot) / bandwidth_hz;
    usage(i) = acc;
  }
  return usage;
}

double offload_energy(const SlotOrder& so, const Eigen::VectorXd& usage, double slot_len) {
  double watts = -so.boundary;
  for (int i = 0; i < usage.size(); ++i) watts += so.coeff(i) * std::exp2(usage(i));
  return slot_len * watts;
}

Eigen::VectorXd recover_powers(const SlotOrder& so, const Eigen::VectorXd& usage) {
  const int count = static_cast<int>(so.device.size());
  const double noise = so.boundary * so.gain(0);
  Eigen::VectorXd powers = Eigen::VectorXd::Zero(count);
  double prev = noise;
  for (int i = 0; i < count; ++i) {
    const double cur = noise * std::exp2(usage(i));
    powers(so.device[i]) = (cur - prev) / so.gain(i);
    prev = cur;
  }
  return powers;
}

Eigen::VectorXd isotonic_usage_argmax(const Eigen::VectorXd& a, const Eigen::VectorXd& d,
                                      double cap) {
  const int count = static_cast<int>(a.size());
  auto block_value = [cap](double sum_a, double sum_d) {
    if (sum_a <= 0.0) return 0.0;
    if (sum_d <= 0.0) return cap;
    return std::clamp(std::log2(sum_a / (sum_d * kLn2)), 0.0, cap);
  };

  struct Block {
    double sum_a, sum_d, value;
    int len;
  };
  std::vector<Block> stack;
  stack.reserve(count);
  for (int i = 0; i < count; ++i) {
    Block b{a(i), d(i), block_value(a(i), d(i)), 1};
    while (!stack.empty() && stack.back().value > b.value) {
      b.sum_a += stack.back().sum_a;
      b.sum_d += stack.back().sum_d;
      b.len += stack.back().len;
      b.value = block_value(b.sum_a, b.sum_d);
      stack.pop_back();
    }
    stack.push_back(b);
  }

  Eigen::VectorXd y(count);
  int pos = 0;
  for (const auto& b : stack)
    for (int r = 0; r < b.len; ++r) y(pos++) = b.value;
  return y;
}

double local_bits_stationary(double omega, double alpha, double kappa, double slot_len) {
  const double denom = 3.0 * alpha * kappa;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt((1.0 + omega) * slot_len * slot_len / denom);
}

double uav_bits_stationary(double coef, double alpha, double kappa, double slot_len) {
  if (coef <= 0.0) return 0.0;
  const double denom = 3.0 * alpha * kappa;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(coef * slot_len * slot_len / denom);
}

double block_objective(const Inputs& in, const Result& r) {
  const Scenario& sc = *in.scenario;
  const auto& ch = *in.channel;
  const double t = sc.slot_length();
  const int slots = sc.time.slots;

  double bits = r.bits.local.sum() + t * r.rates.sum();
  double energy = 0.0;
  const double t2 = t * t;
  energy += sc.energy.kappa_device * r.bits.local.array().cube().sum() / t2;
  energy += sc.energy.kappa_uav * r.bits.uav.array().cube().sum() / t2;
  for (int n = 0; n < slots; ++n) {
    const SlotOrder so = slot_order(ch.gain_sq.col(n), sc.radio.noise_power_w);
    energy += offload_energy(so, cumulative_usage(so, r.rates, n, sc.radio.bandwidth_hz), t);
  }
  return bits - in.alpha * energy;
}

bool demand_attainable(const Scenario& s) {
  const double horizon = s.time.horizon_s;
  double uav_cycles_needed = 0.0;
  for (int i = 0; i < s.device_count(); ++i) {
    const double local_cap = s.energy.device_cpu_hz * horizon / s.tasks.cycles_per_bit[i];
    const double rest = std::max(0.0, s.tasks.bits[i] - local_cap);
    uav_cycles_needed += rest * s.tasks.cycles_per_bit[i];
  }
  return uav_cycles_needed <= s.energy.uav_cpu_hz * horizon * (1.0 + 1e-12);
}

void polish_feasible(const Inputs& in, Result& r) {
  const Scenario& sc = *in.scenario;
  const auto& ch = *in.channel;
  const int devices = sc.device_count();
  const int slots = sc.time.slots;
  const double t = sc.slot_length();
  const double bw = sc.radio.bandwidth_hz;
  const double ycap = sc.solver.rate_ceiling_bps_hz;

  std::vector<SlotOrder> orders;
  orders.reserve(slots);
  for (int n = 0; n < slots; ++n)
    orders.push_back(slot_order(ch.gain_sq.col(n), sc.radio.noise_power_w));

  r.bits.local = r.bits.local.cwiseMax(0.0);
  r.bits.uav = r.bits.uav.cwiseMax(0.0);
  r.rates = r.rates.cwiseMax(0.0);
  if (in.allow_local) {
    for (int i = 0; i < devices; ++i) {
      const double cap = sc.energy.device_cpu_hz * t / sc.tasks.cycles_per_bit[i];
      r.bits.local.row(i) = r.bits.local.row(i).cwiseMin(cap);
    }
  } else {
    r.bits.local.setZero();
  }

  for (int n = 0; n < slots; ++n) {
    // Total spectral-usage ceiling, then per-device service bound.
    const double used = r.rates.col(n).sum() / bw;
    if (used > ycap) r.rates.col(n) *= ycap / used;
    for (int i = 0; i < devices; ++i)
      r.bits.uav(i, n) = std::min(r.bits.uav(i, n), r.rates(i, n) * t);
    double load = 0.0;
    for (int i = 0; i < devices; ++i) load += r.bits.uav(i, n) * sc.tasks.cycles_per_bit[i];
    const double budget = sc.energy.uav_cpu_hz * t;
    if (load > budget) r.bits.uav.col(n) *= budget / load;
  }

  // Offloaded bits beyond the task demand earn nothing, so solvers leave the
  // surplus anywhere in the slack; trim it for a canonical allocation.
  for (int i = 0; i < devices; ++i) {
    const double need = std::max(0.0, sc.tasks.bits[i] - r.bits.local.row(i).sum());
    const double have = r.bits.uav.row(i).sum();
    if (have > need) r.bits.uav.row(i) *= (need > 0.0 ? need / have : 0.0);
  }

  for (int i = 0; i < devices; ++i) {
    double gap = sc.tasks.bits[i] - r.bits.local.row(i).sum() - r.bits.uav.row(i).sum();
    if (gap <= 0.0) continue;
    if (in.allow_local) {
      const double cap = sc.energy.device_cpu_hz * t / sc.tasks.cycles_per_bit[i];
      for (int n = 0; n < slots && gap > 0.0; ++n) {
        const double add = std::min(gap, cap - r.bits.local(i, n));
        if (add > 0.0) {
          r.bits.local(i, n) += add;
          gap -= add;
        }
      }
    }
    // Use already-transmitted service, then raise rates on the best slots.
    for (int n = 0; n < slots && gap > 0.0; ++n) {
      double load = 0.0;
      for (int j = 0; j < devices; ++j) load += r.bits.uav(j, n) * sc.tasks.cycles_per_bit[j];
      const double cap_slack =
          (sc.energy.uav_cpu_hz * t - load) / sc.tasks.cycles_per_bit[i];
      const double add =
          std::min({gap, r.rates(i, n) * t - r.bits.uav(i, n), std::max(0.0, cap_slack)});
      if (add > 0.0) {
        r.bits.uav(i, n) += add;
        gap -= add;
      }
    }
    if (gap > 0.0) {
      std::vector<int> by_gain(slots);
      for (int n = 0; n < slots; ++n) by_gain[n] = n;
      std::sort(by_gain.begin(), by_gain.end(),
                [&](int a, int b) { return ch.gain_sq(i, a) > ch.gain_sq(i, b); });
      for (int n : by_gain) {
        if (gap <= 0.0) break;
        double load = 0.0;
        for (int j = 0; j < devices; ++j) load += r.bits.uav(j, n) * sc.tasks.cycles_per_bit[j];
        const double cap_slack =
            (sc.energy.uav_cpu_hz * t - load) / sc.tasks.cycles_per_bit[i];
        const double head = (ycap - r.rates.col(n).sum() / bw) * bw * t;
        const double add = std::min({gap, std::max(0.0, cap_slack), std::max(0.0, head)});
        if (add > 0.0) {
          r.rates(i, n) += add / t;
          r.bits.uav(i, n) += add;
          gap -= add;
        }
      }
    }
  }

  r.powers = Eigen::MatrixXd::Zero(devices, slots);
  for (int n = 0; n < slots; ++n) {
    const Eigen::VectorXd usage = cumulative_usage(orders[n], r.rates, n, bw);
    r.powers.col(n) = recover_powers(orders[n], usage);
  }
  r.objective = block_objective(in, r);
}

Result solve_direct(const Inputs& in, const Result* warm) {
  const Scenario& sc = *in.scenario;
  const auto& ch = *in.channel;
  const int devices = sc.device_count();
  const int slots = sc.time.slots;
  const double t = sc.slot_length();
  const double bw = sc.radio.bandwidth_hz;
  const double alpha_m = in.alpha / kMega;  // megabits per joule
  const double ycap = sc.solver.rate_ceiling_bps_hz;
  const double usage_per_mbit = kMega / (bw * t);

  const int loc_count = in.allow_local ? devices * slots : 0;
  const auto loc_at = [&](int i, int n) { return n * devices + i; };
  const auto uav_at = [&](int i, int n) { return loc_count + n * devices + i; };
  const auto rate_at = [&](int i, int n) {
    return loc_count + devices * slots + n * devices + i;
  };

  std::vector<SlotOrder> orders;
  orders.reserve(slots);
  for (int n = 0; n < slots; ++n)
    orders.push_back(slot_order(ch.gain_sq.col(n), sc.radio.noise_power_w));

  convex::ConvexProgram prog;
  prog.resize(loc_count + 2 * devices * slots);
  for (int i = 0; i < devices; ++i) {
    const double cap_loc = sc.energy.device_cpu_hz * t / (sc.tasks.cycles_per_bit[i] * kMega);
    const double cap_uav = sc.energy.uav_cpu_hz * t / (sc.tasks.cycles_per_bit[i] * kMega);
    for (int n = 0; n < slots; ++n) {
      if (in.allow_local) {
        prog.lower(loc_at(i, n)) = 0.0;
        prog.upper(loc_at(i, n)) = cap_loc;
      }
      prog.lower(uav_at(i, n)) = 0.0;
      prog.upper(uav_at(i, n)) = cap_uav;
      prog.lower(rate_at(i, n)) = 0.0;
      prog.upper(rate_at(i, n)) = ycap / usage_per_mbit;
    }
  }

  // Minimize alpha * (block energy) - (completed bits), in megabits.
  const double t2 = t * t;
  double constant = 0.0;
  for (int n = 0; n < slots; ++n) constant -= alpha_m * t * orders[n].boundary;
  prog.objective.affine.constant = constant;
  for (int i = 0; i < devices; ++i)
    for (int n = 0; n < slots; ++n) {
      const double cube_scale = alpha_m * kMega * kMega * kMega / t2;
      if (in.allow_local) {
        prog.objective.affine.add(loc_at(i, n), -1.0);
        prog.objective.atoms.emplace_back(
            cube_scale * sc.energy.kappa_device,
            convex::make_power(convex::LinExpr().add(loc_at(i, n), 1.0), 3.0));
      }
      prog.objective.affine.add(rate_at(i, n), -1.0);
      prog.objective.atoms.emplace_back(
          cube_scale * sc.energy.kappa_uav,
          convex::make_power(convex::LinExpr().add(uav_at(i, n), 1.0), 3.0));
    }
  for (int n = 0; n < slots; ++n)
    for (int pos = 0; pos < devices; ++pos) {
      const double weight = alpha_m * t * orders[n].coeff(pos);
      if (weight <= 0.0) continue;
      convex::LinExpr arg;
      for (int j = 0; j <= pos; ++j)
        arg.add(rate_at(orders[n].device[j], n), kLn2 * usage_per_mbit);
      prog.objective.atoms.emplace_back(weight, convex::make_exp(std::move(arg)));
    }

  for (int i = 0; i < devices; ++i) {
    convex::ConvexExpr demand;
    demand.affine.constant = sc.tasks.bits[i] / kMega;
    for (int n = 0; n < slots; ++n) {
      if (in.allow_local) demand.affine.add(loc_at(i, n), -1.0);
      demand.affine.add(uav_at(i, n), -1.0);
    }
    prog.inequalities.push_back(std::move(demand));
  }
  for (int n = 0; n < slots; ++n) {
    convex::ConvexExpr cap;
    cap.affine.constant = -sc.energy.uav_cpu_hz * t / kMega;
    for (int i = 0; i < devices; ++i) cap.affine.add(uav_at(i, n), sc.tasks.cycles_per_bit[i]);
    prog.inequalities.push_back(std::move(cap));
  }
  for (int i = 0; i < devices; ++i)
    for (int n = 0; n < slots; ++n) {
      convex::ConvexExpr serve;
      serve.affine.add(uav_at(i, n), 1.0).add(rate_at(i, n), -1.0);
      prog.inequalities.push_back(std::move(serve));
    }
  for (int n = 0; n < slots; ++n) {
    convex::ConvexExpr ceil;
    ceil.affine.constant = -ycap;
    for (int i = 0; i < devices; ++i) ceil.affine.add(rate_at(i, n), usage_per_mbit);
    prog.inequalities.push_back(std::move(ceil));
  }

  convex::SolveOptions opts;
  opts.tol = sc.solver.nlp_tol;
  opts.max_iters = 300;
  Eigen::VectorXd warm_x;
  if (warm) {
    warm_x.resize(prog.n);
    for (int i = 0; i < devices; ++i)
      for (int n = 0; n < slots; ++n) {
        if (in.allow_local) warm_x(loc_at(i, n)) = warm->bits.local(i, n) / kMega;
        warm_x(uav_at(i, n)) = warm->bits.uav(i, n) / kMega;
        warm_x(rate_at(i, n)) = warm->rates(i, n) * t / kMega;
      }
    opts.warm_x = &warm_x;
  }

  const convex::SolveReport rep = convex::solve(prog, opts);

  Result out;
  out.bits = BitAllocation::zero(devices, slots);
  out.rates = Eigen::MatrixXd::Zero(devices, slots);
  out.demand_mult = Eigen::VectorXd::Zero(devices);
  out.uav_cpu_mult = Eigen::VectorXd::Zero(slots);
  out.serve_mult = Eigen::MatrixXd::Zero(devices, slots);
  out.device_cpu_mult = Eigen::MatrixXd::Zero(devices, slots);
  for (int i = 0; i < devices; ++i)
    for (int n = 0; n < slots; ++n) {
      if (in.allow_local) out.bits.local(i, n) = std::max(0.0, rep.x(loc_at(i, n))) * kMega;
      out.bits.uav(i, n) = std::max(0.0, rep.x(uav_at(i, n))) * kMega;
      out.rates(i, n) = std::max(0.0, rep.x(rate_at(i, n))) * kMega / t;
    }
  if (rep.ineq_multipliers.size() == devices + slots + devices * slots + slots) {
    for (int i = 0; i < devices; ++i) out.demand_mult(i) = rep.ineq_multipliers(i);
    for (int n = 0; n < slots; ++n) out.uav_cpu_mult(n) = t * rep.ineq_multipliers(devices + n);
    for (int i = 0; i < devices; ++i)
      for (int n = 0; n < slots; ++n)
        out.serve_mult(i, n) = rep.ineq_multipliers(devices + slots + n * devices + i);
  }
  if (in.allow_local && rep.upper_multipliers.size() == prog.n)
    for (int i = 0; i < devices; ++i)
      for (int n = 0; n < slots; ++n)
        out.device_cpu_mult(i, n) =
            rep.upper_multipliers(loc_at(i, n)) * t / sc.tasks.cycles_per_bit[i];
  out.kkt_residual = rep.kkt_residual;
  out.iterations = rep.iterations;
  polish_feasible(in, out);
  return out;
}

Result dual_search(const Inputs& in, const Result* warm) {
  const Scenario& sc = *in.scenario;
  const auto& ch = *in.channel;
  const int devices = sc.device_count();
  const int slots = sc.time.slots;
  const double t = sc.slot_length();
  const double bw = sc.radio.bandwidth_hz;
  const double alpha = in.alpha;
  const double ycap = sc.solver.rate_ceiling_bps_hz;

  if (alpha < 1e-12) {
    // Degenerate parametric weight: the closed forms lose their curvature.
    Result out = solve_direct(in, warm);
    out.used_fallback = true;
    return out;
  }

  std::vector<SlotOrder> orders;
  orders.reserve(slots);
  for (int n = 0; n < slots; ++n)
    orders.push_back(slot_order(ch.gain_sq.col(n), sc.radio.noise_power_w));

  Eigen::VectorXd caps(devices);
  for (int i = 0; i < devices; ++i)
    caps(i) = sc.energy.device_cpu_hz * t / sc.tasks.cycles_per_bit[i];

  Eigen::VectorXd omega = Eigen::VectorXd::Zero(devices);
  Eigen::VectorXd varsig = Eigen::VectorXd::Zero(slots);
  Eigen::MatrixXd xi = Eigen::MatrixXd::Zero(devices, slots);
  if (warm && warm->demand_mult.size() == devices && warm->uav_cpu_mult.size() == slots &&
      warm->serve_mult.rows() == devices) {
    omega = warm->demand_mult.cwiseMax(0.0);
    varsig = warm->uav_cpu_mult.cwiseMax(0.0);
    xi = warm->serve_mult.cwiseMax(0.0);
  }

  Result z;
  z.bits = BitAllocation::zero(devices, slots);
  z.rates = Eigen::MatrixXd::Zero(devices, slots);
  z.powers = Eigen::MatrixXd::Zero(devices, slots);

  Result best;
  double best_value = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  const int max_iters = 600;
  int k = 0;

  for (; k < max_iters; ++k) {
    // Inner maximizers for the current multipliers.
    for (int i = 0; i < devices; ++i) {
      const double lloc =
          in.allow_local
              ? std::min(caps(i),
                         local_bits_stationary(omega(i), alpha, sc.energy.kappa_device, t))
              : 0.0;
      for (int n = 0; n < slots; ++n) {
        z.bits.local(i, n) = lloc;
        const double coef = omega(i) - xi(i, n) - varsig(n) * sc.tasks.cycles_per_bit[i] / t;
        z.bits.uav(i, n) = uav_bits_stationary(coef, alpha, sc.energy.kappa_uav, t);
      }
    }
    for (int n = 0; n < slots; ++n) {
      const auto& so = orders[n];
      Eigen::VectorXd a(devices), d(devices);
      for (int pos = 0; pos < devices; ++pos) {
        const double xi_here = xi(so.device[pos], n);
        const double xi_next = pos + 1 < devices ? xi(so.device[pos + 1], n) : -1.0;
        a(pos) = bw * t * (xi_here - xi_next);  // last position: 1 + xi
        d(pos) = alpha * t * so.coeff(pos);
      }
      const Eigen::VectorXd usage = isotonic_usage_argmax(a, d, ycap);
      double prev = 0.0;
      for (int pos = 0; pos < devices; ++pos) {
        z.rates(so.device[pos], n) = bw * (usage(pos) - prev);
        prev = usage(pos);
      }
    }

    // Dual value and subgradient.
    const double inner = block_objective(in, z);
    double dual = inner;
    Eigen::VectorXd g_omega(devices);
    Eigen::VectorXd g_varsig(slots);
    Eigen::MatrixXd g_xi(devices, slots);
    for (int i = 0; i < devices; ++i) {
      g_omega(i) = z.bits.local.row(i).sum() + z.bits.uav.row(i).sum() - sc.tasks.bits[i];
      dual += omega(i) * g_omega(i);
    }
    for (int n = 0; n < slots; ++n) {
      double load = 0.0;
      for (int i = 0; i < devices; ++i) load += z.bits.uav(i, n) * sc.tasks.cycles_per_bit[i];
      g_varsig(n) = -(load / t - sc.energy.uav_cpu_hz);
      dual -= varsig(n) * -g_varsig(n);
    }
    for (int i = 0; i < devices; ++i)
      for (int n = 0; n < slots; ++n) {
        g_xi(i, n) = -(z.bits.uav(i, n) - z.rates(i, n) * t);
        dual -= xi(i, n) * -g_xi(i, n);
      }

    Result repaired = z;
    polish_feasible(in, repaired);
    if (repaired.objective > best_value) {
      best_value = repaired.objective;
      best = repaired;
    }

    gap = dual - best_value;
    if (gap <= 1e-8 * std::max(1.0, std::abs(best_value))) break;

    const double norm2 =
        g_omega.squaredNorm() + g_varsig.squaredNorm() + g_xi.squaredNorm();
    if (norm2 <= 1e-18) break;
    const double step = gap / norm2;
    omega = (omega - step * g_omega).cwiseMax(0.0);
    varsig = (varsig - step * g_varsig).cwiseMax(0.0);
    xi = (xi - step * g_xi).cwiseMax(0.0);
  }

  if (!(gap <= 1e-5 * std::max(1.0, std::abs(best_value)))) {
    Result out = solve_direct(in, warm);
    out.used_fallback = true;
    return out;
  }

  best.iterations = k;
  best.kkt_residual = gap;
  best.demand_mult = omega;
  best.uav_cpu_mult = varsig;
  best.serve_mult = xi;
  best.device_cpu_mult = Eigen::MatrixXd::Zero(devices, slots);
  if (in.allow_local) {
    for (int i = 0; i < devices; ++i) {
      const double slack = 1.0 + omega(i) -
                           3.0 * alpha * sc.energy.kappa_device * caps(i) * caps(i) / (t * t);
      for (int n = 0; n < slots; ++n)
        if (best.bits.local(i, n) >= caps(i) * (1.0 - 1e-9))
          best.device_cpu_mult(i, n) =
              std::max(0.0, slack) * t / sc.tasks.cycles_per_bit[i];
    }
  }
  return best;
}

}  // namespace risuav::bitpower

#include "risuav/trajectory.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "risuav/convex.hpp"
#include "risuav/energy.hpp"

namespace risuav::trajectory {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kMega = 1e6;
constexpr double kPowerFloor = 1e-15;
constexpr double kServeFloor = 1e-9;  // bits below this need no rate support

// Devices that transmit in a slot, in decoding order.
std::vector<int> active_devices(const Scenario& s, const ChannelState& ch,
                                const Eigen::MatrixXd& powers, int n) {
  std::vector<int> active;
  for (int k = 0; k < s.device_count(); ++k) {
    const int dev = ch.orders[static_cast<std::size_t>(n)].order[static_cast<std::size_t>(k)];
    if (powers(dev, n) > kPowerFloor) active.push_back(dev);
  }
  return active;
}

}  // namespace

double SlotSignalModel::log_value(int count, const Eigen::VectorXd& u, double w) const {
  double s = offset;
  for (int k = 0; k < count; ++k) {
    s += a(k) * std::pow(u(k), -exponent) +
         b(k) * std::pow(u(k), -exponent / 2.0) / w + c(k) / (w * w);
  }
  return std::log(s);
}

void SlotSignalModel::log_gradient(int count, const Eigen::VectorXd& u, double w,
                                   Eigen::VectorXd& du, double& dw) const {
  double s = offset;
  du = Eigen::VectorXd::Zero(u.size());
  dw = 0.0;
  for (int k = 0; k < count; ++k) {
    const double direct = a(k) * std::pow(u(k), -exponent);
    const double cross = b(k) * std::pow(u(k), -exponent / 2.0) / w;
    const double reflect = c(k) / (w * w);
    s += direct + cross + reflect;
    du(k) = -(exponent * direct + (exponent / 2.0) * cross) / u(k);
    dw += -(cross + 2.0 * reflect) / w;
  }
  du /= s;
  dw /= s;
}

LogTangent linearize(const SlotSignalModel& m, int count, const Eigen::VectorXd& u0,
                     double w0) {
  LogTangent t;
  t.value0 = m.log_value(count, u0, w0);
  m.log_gradient(count, u0, w0, t.du, t.dw);
  t.u0 = u0;
  t.w0 = w0;
  return t;
}

SlotSignalModel build_slot_model(const Scenario& s, const ChannelState& ch,
                                 const Eigen::VectorXd& slot_powers,
                                 const std::vector<int>& active, int slot) {
  SlotSignalModel m;
  const int count = static_cast<int>(active.size());
  m.offset = 1.0;
  m.exponent = s.radio.direct_exponent;
  m.a.resize(count);
  m.b.resize(count);
  m.c.resize(count);
  const double noise = s.radio.noise_power_w;
  for (int k = 0; k < count; ++k) {
    const int dev = active[static_cast<std::size_t>(k)];
    const double p = slot_powers(dev);
    const double k1 = ch.direct_mag_coeff(dev, slot);
    const double k2 = ch.cascade_mag_coeff(dev);
    m.a(k) = p * k1 * k1 / noise;
    m.b(k) = 2.0 * p * k1 * k2 / noise;
    m.c(k) = p * k2 * k2 / noise;
  }
  return m;
}

double model_objective(const Inputs& in, const Trajectory& path) {
  const Scenario& s = *in.scenario;
  const ChannelState& ch = *in.channel;
  const double t = s.slot_length();
  const double bw = s.radio.bandwidth_hz;
  const double noise = s.radio.noise_power_w;

  double bits = 0.0;
  double energy = 0.0;
  for (int n = 0; n < s.time.slots; ++n) {
    const double d_ru = ris_uav_distance(s, path[static_cast<std::size_t>(n)]);
    Eigen::VectorXd gains(s.device_count());
    for (int i = 0; i < s.device_count(); ++i) {
      const double d_du = device_uav_distance(s, i, path[static_cast<std::size_t>(n)]);
      const double amp = ch.direct_mag_coeff(i, n) /
                             std::pow(d_du, s.radio.direct_exponent / 2.0) +
                         ch.cascade_mag_coeff(i) / d_ru;
      gains(i) = amp * amp;
    }
    const Eigen::VectorXd rates =
        offload_rates(in.powers->col(n), gains, ch.orders[static_cast<std::size_t>(n)], bw,
                      noise);
    bits += in.bits->local.col(n).sum() + rates.sum() * t;
    energy += offload_energy(in.powers->col(n), t);
    for (int i = 0; i < s.device_count(); ++i) {
      energy += local_compute_energy(s.energy.kappa_device, in.bits->local(i, n), t);
    }
    energy += uav_compute_energy(s.energy.kappa_uav, in.bits->uav.col(n), t);
  }
  const Eigen::VectorXd speeds = hop_speeds(s, path);
  for (int n = 0; n < speeds.size(); ++n) {
    const double v = std::max(speeds(n), s.solver.min_speed_floor);
    energy += fly_energy(s.energy.fly_tau1, s.energy.fly_tau2, v, t,
                         s.solver.min_speed_floor);
  }
  return bits - in.alpha * energy;
}

Result optimize(const Inputs& in, const Trajectory& incumbent) {
  const Scenario& s = *in.scenario;
  const ChannelState& ch = *in.channel;
  const int slots = s.time.slots;
  const double t = s.slot_length();
  const double bw = s.radio.bandwidth_hz;
  const double altitude = s.geometry.uav_altitude;
  const double drop = std::abs(altitude - s.geometry.ris_height);
  const int free_pos = slots - 1;
  if (free_pos < 1) throw std::invalid_argument("trajectory: need at least two slots");

  Result out;
  out.path = incumbent;
  double best_val = model_objective(in, out.path);
  out.trace.push_back(best_val);

  // Per-slot transmitting devices and variable layout, fixed across rounds.
  std::vector<std::vector<int>> active(static_cast<std::size_t>(slots));
  std::vector<std::vector<int>> u_var(static_cast<std::size_t>(slots));
  std::vector<int> w_var(static_cast<std::size_t>(slots), -1);
  std::vector<int> vbar_var(static_cast<std::size_t>(slots), -1);
  int nv = 2 * free_pos;
  for (int n = 0; n < slots; ++n) {
    active[static_cast<std::size_t>(n)] = active_devices(s, ch, *in.powers, n);
    for (std::size_t k = 0; k < active[static_cast<std::size_t>(n)].size(); ++k) {
      u_var[static_cast<std::size_t>(n)].push_back(nv++);
    }
    if (!active[static_cast<std::size_t>(n)].empty()) w_var[static_cast<std::size_t>(n)] = nv++;
    vbar_var[static_cast<std::size_t>(n)] = nv++;
  }

  const auto pos_expr = [&](int n, int axis) {
    convex::LinExpr e;
    if (n < 0) {
      e.constant = s.geometry.uav_start(axis);
    } else if (n >= free_pos) {
      e.constant = s.geometry.uav_goal(axis);
    } else {
      e.add(2 * n + axis, 1.0);
    }
    return e;
  };
  const auto hop_expr = [&](int n, int axis) {
    convex::LinExpr e = pos_expr(n, axis);
    const convex::LinExpr prev = pos_expr(n - 1, axis);
    for (const auto& term : prev.terms) e.add(term.first, -term.second);
    e.constant -= prev.constant;
    return e;
  };

  Eigen::Vector2d mission_dir = s.geometry.uav_goal - s.geometry.uav_start;
  if (mission_dir.norm() < 1e-12) {
    mission_dir = Eigen::Vector2d(1.0, 0.0);
  } else {
    mission_dir.normalize();
  }

  const double alpha_m = in.alpha / kMega;
  const double rate_scale = bw * t / (kLn2 * kMega);  // nats -> Mbit

  for (int round = 0; round < s.solver.sca_max_iters; ++round) {
    convex::ConvexProgram prog;
    prog.resize(nv);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nv);

    for (int j = 0; j < free_pos; ++j) {
      x0(2 * j) = out.path[static_cast<std::size_t>(j)](0);
      x0(2 * j + 1) = out.path[static_cast<std::size_t>(j)](1);
    }

    for (int n = 0; n < slots; ++n) {
      const auto& act = active[static_cast<std::size_t>(n)];
      const Eigen::Vector2d q = out.path[static_cast<std::size_t>(n)];
      const double w0 = ris_uav_distance(s, q);
      Eigen::VectorXd u0(static_cast<Eigen::Index>(act.size()));
      for (std::size_t k = 0; k < act.size(); ++k) {
        u0(static_cast<Eigen::Index>(k)) = device_uav_distance(s, act[k], q);
        x0(u_var[static_cast<std::size_t>(n)][k]) = u0(static_cast<Eigen::Index>(k));
        prog.lower(u_var[static_cast<std::size_t>(n)][k]) = altitude;
      }
      if (w_var[static_cast<std::size_t>(n)] >= 0) {
        x0(w_var[static_cast<std::size_t>(n)]) = w0;
        prog.lower(w_var[static_cast<std::size_t>(n)]) = std::max(drop, 1e-6);
      }

      // Distance auxiliaries dominate the real link lengths through
      // quadratic-over-linear rows; the objective pulls them back down.
      for (std::size_t k = 0; k < act.size(); ++k) {
        const Eigen::Vector2d dev = s.geometry.devices[static_cast<std::size_t>(act[k])];
        convex::ConvexExpr g;
        convex::LinExpr rx = pos_expr(n, 0);
        rx.constant -= dev(0);
        convex::LinExpr ry = pos_expr(n, 1);
        ry.constant -= dev(1);
        convex::LinExpr rz;
        rz.constant = altitude;
        convex::LinExpr den;
        den.add(u_var[static_cast<std::size_t>(n)][k], 1.0);
        g.atoms.emplace_back(1.0, convex::make_quad_over_lin({rx, ry, rz}, den));
        g.affine.add(u_var[static_cast<std::size_t>(n)][k], -1.0);
        prog.inequalities.push_back(std::move(g));
      }
      if (w_var[static_cast<std::size_t>(n)] >= 0) {
        convex::ConvexExpr g;
        convex::LinExpr rx = pos_expr(n, 0);
        rx.constant -= s.geometry.ris_position(0);
        convex::LinExpr ry = pos_expr(n, 1);
        ry.constant -= s.geometry.ris_position(1);
        convex::LinExpr rz;
        rz.constant = drop;
        convex::LinExpr den;
        den.add(w_var[static_cast<std::size_t>(n)], 1.0);
        g.atoms.emplace_back(1.0, convex::make_quad_over_lin({rx, ry, rz}, den));
        g.affine.add(w_var[static_cast<std::size_t>(n)], -1.0);
        prog.inequalities.push_back(std::move(g));
      }

      if (!act.empty()) {
        const SlotSignalModel model = build_slot_model(s, ch, in.powers->col(n), act, n);
        const int count = static_cast<int>(act.size());

        // Completed-bits term: tangent of the full-chain log power.
        const LogTangent top = linearize(model, count, u0, w0);
        double shift = top.value0 - top.du.dot(u0) - top.dw * w0;
        prog.objective.affine.constant -= rate_scale * shift;
        for (int k = 0; k < count; ++k) {
          prog.objective.affine.add(u_var[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)],
                                    -rate_scale * top.du(k));
        }
        prog.objective.affine.add(w_var[static_cast<std::size_t>(n)], -rate_scale * top.dw);

        // Rate support for offloaded bits: each decoding step must clear the
        // bits assigned to it, with the step's own log lower-bounded by its
        // tangent and the interference log kept exact.
        for (int k = 0; k < count; ++k) {
          const int dev = act[static_cast<std::size_t>(k)];
          const double need = in.bits->uav(dev, n);
          if (need <= kServeFloor) continue;
          const double req = need * kLn2 / (bw * t);
          const LogTangent step = linearize(model, k + 1, u0, w0);
          convex::ConvexExpr g;
          g.affine.constant = req - (step.value0 - step.du.dot(u0) - step.dw * w0);
          for (int j = 0; j <= k; ++j) {
            g.affine.add(u_var[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)],
                         -step.du(j));
          }
          g.affine.add(w_var[static_cast<std::size_t>(n)], -step.dw);
          if (k > 0) {
            std::vector<convex::PosynomialTerm> terms;
            for (int j = 0; j < k; ++j) {
              const int uj = u_var[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
              const int wj = w_var[static_cast<std::size_t>(n)];
              if (model.a(j) > 0.0) {
                terms.push_back({model.a(j), {{uj, model.exponent}}});
              }
              if (model.b(j) > 0.0) {
                terms.push_back({model.b(j), {{uj, model.exponent / 2.0}, {wj, 1.0}}});
              }
              if (model.c(j) > 0.0) {
                terms.push_back({model.c(j), {{wj, 2.0}}});
              }
            }
            g.atoms.emplace_back(1.0,
                                 convex::make_log_posynomial(model.offset, std::move(terms)));
          }
          prog.inequalities.push_back(std::move(g));
        }
      }
    }

    // Hop constraints: speed cap, and a linearized length floor that lets the
    // propulsion term charge the true pace through vbar <= speed.
    for (int n = 0; n < slots; ++n) {
      const Eigen::Vector2d prev =
          n == 0 ? s.geometry.uav_start : out.path[static_cast<std::size_t>(n - 1)];
      const Eigen::Vector2d cur = out.path[static_cast<std::size_t>(n)];
      Eigen::Vector2d dir = cur - prev;
      if (dir.norm() < 1e-9) {
        dir = mission_dir;
      } else {
        dir.normalize();
      }

      const convex::LinExpr dx = hop_expr(n, 0);
      const convex::LinExpr dy = hop_expr(n, 1);

      convex::ConvexExpr cap;
      cap.atoms.emplace_back(1.0, convex::make_squared_norm({dx, dy}));
      cap.affine.constant -= std::pow(s.energy.max_speed * t, 2.0);
      prog.inequalities.push_back(std::move(cap));

      convex::ConvexExpr floor_g;
      floor_g.affine.add(vbar_var[static_cast<std::size_t>(n)], t);
      for (const auto& term : dx.terms) floor_g.affine.add(term.first, -dir(0) * term.second);
      for (const auto& term : dy.terms) floor_g.affine.add(term.first, -dir(1) * term.second);
      floor_g.affine.constant -= dir(0) * dx.constant + dir(1) * dy.constant;
      prog.inequalities.push_back(std::move(floor_g));

      // Slightly above the model floor so solver-tolerance shortfall on the
      // hop-length row cannot push a true speed below it.
      prog.lower(vbar_var[static_cast<std::size_t>(n)]) = s.solver.min_speed_floor * 1.001;
      prog.upper(vbar_var[static_cast<std::size_t>(n)]) = s.energy.max_speed;
      const Eigen::VectorXd speeds = hop_speeds(s, out.path);
      x0(vbar_var[static_cast<std::size_t>(n)]) =
          std::min(std::max(speeds(n), s.solver.min_speed_floor), s.energy.max_speed);

      if (alpha_m > 0.0) {
        prog.objective.atoms.emplace_back(alpha_m * s.energy.fly_tau1 / (t * t),
                                          convex::make_norm_power({dx, dy}, 3.0));
        convex::LinExpr vb;
        vb.add(vbar_var[static_cast<std::size_t>(n)], 1.0);
        prog.objective.atoms.emplace_back(alpha_m * t * s.energy.fly_tau2,
                                          convex::make_inverse(std::move(vb)));
      }
    }

    convex::SolveOptions opts;
    opts.tol = s.solver.nlp_tol;
    opts.max_iters = 200;
    opts.warm_x = &x0;
    convex::SolveReport rep;
    try {
      rep = convex::solve(prog, opts);
    } catch (const std::exception&) {
      break;
    }
    if (rep.status == convex::SolveStatus::numerical_failure ||
        rep.status == convex::SolveStatus::infeasible) {
      break;
    }

    Trajectory cand = out.path;
    for (int j = 0; j < free_pos; ++j) {
      cand[static_cast<std::size_t>(j)] = Eigen::Vector2d(rep.x(2 * j), rep.x(2 * j + 1));
    }
    cand[static_cast<std::size_t>(free_pos)] = s.geometry.uav_goal;

    const double val = model_objective(in, cand);
    ++out.iterations;
    if (!(val > best_val)) break;
    const double gain = val - best_val;
    out.path = std::move(cand);
    best_val = val;
    out.trace.push_back(best_val);
    out.improved = true;
    if (gain <= s.solver.sca_tol) break;
  }
  return out;
}

}  // namespace risuav::trajectory

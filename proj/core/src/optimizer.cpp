#include "risuav/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "risuav/bitpower.hpp"
#include "risuav/phase.hpp"
#include "risuav/rng.hpp"
#include "risuav/trajectory.hpp"

namespace risuav::optimizer {

namespace {

constexpr double kTwoPi = 6.283185307179586;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void sanitize_channel(ChannelState& ch, Strategy strategy) {
  if (strategy != Strategy::no_ris) return;
  for (auto& slot : ch.cascade) slot.setZero();
  ch.cascade_mag_coeff.setZero();
}

Eigen::MatrixXd rates_from_powers(const Scenario& s, const ChannelState& ch,
                                  const Eigen::MatrixXd& powers) {
  Eigen::MatrixXd rates(s.device_count(), s.time.slots);
  for (int n = 0; n < s.time.slots; ++n) {
    rates.col(n) =
        offload_rates(powers.col(n), ch.gain_sq.col(n), ch.orders[static_cast<std::size_t>(n)],
                      s.radio.bandwidth_hz, s.radio.noise_power_w);
  }
  return rates;
}

PhaseConfig initial_phases(const Scenario& s, std::uint64_t seed) {
  PhaseConfig phases(s.time.slots, s.radio.ris_elements);
  for (int n = 0; n < s.time.slots; ++n) {
    const rng::Stream draw(seed, rng::Purpose::random_phase, static_cast<std::uint64_t>(n));
    for (int m = 0; m < s.radio.ris_elements; ++m) {
      phases(n, m) = draw.uniform_in(static_cast<std::uint64_t>(m), 0.0, kTwoPi);
    }
  }
  return phases;
}

struct BcdState {
  DecisionVariables z;
  ChannelState ch;      // always matches z.phases and z.path
  double value = 0.0;   // parametric value of z at the current price
  bitpower::Result bp;  // last allocation solve, reused as a multiplier warm start
  bool bp_valid = false;
};

// Evaluate a candidate (channel, phases, path) by re-deriving achievable rates
// at the incumbent powers, repairing feasibility, and comparing the parametric
// value. The incumbent survives unless the candidate is strictly better.
bool accept_candidate(const Scenario& s, double alpha, bool allow_local, ChannelState&& ch2,
                      const PhaseConfig& phases, const Trajectory& path, BcdState& st) {
  bitpower::Inputs bin;
  bin.scenario = &s;
  bin.channel = &ch2;
  bin.alpha = alpha;
  bin.allow_local = allow_local;
  bitpower::Result r;
  r.bits = st.z.bits;
  r.rates = rates_from_powers(s, ch2, st.z.powers);
  bitpower::polish_feasible(bin, r);
  DecisionVariables zc;
  zc.bits = std::move(r.bits);
  zc.rates = std::move(r.rates);
  zc.powers = std::move(r.powers);
  zc.phases = phases;
  zc.path = path;
  const double vc = parametric_value(s, zc, alpha);
  if (!(vc > st.value)) return false;
  st.z = std::move(zc);
  st.ch = std::move(ch2);
  st.value = vc;
  return true;
}

// One descent run at a fixed price: allocation, then phases, then path, each
// keeping the incumbent unless strictly improved. Stops on a pass that
// changes nothing (exact fixed point) or gains at most bcd_tol.
std::vector<double> bcd_inner(const Scenario& s, const ChannelDraws& draws, double alpha,
                              Strategy strategy, std::uint64_t seed, BcdState& st) {
  const bool allow_local = strategy != Strategy::full_offload;
  std::vector<double> trace;
  st.value = parametric_value(s, st.z, alpha);
  for (int pass = 0; pass < s.solver.bcd_max_passes; ++pass) {
    bool changed = false;
    const double pass_start = st.value;

    {
      bitpower::Inputs bin;
      bin.scenario = &s;
      bin.channel = &st.ch;
      bin.alpha = alpha;
      bin.allow_local = allow_local;
      bitpower::Result cand = bitpower::dual_search(bin, st.bp_valid ? &st.bp : nullptr);
      DecisionVariables zc = st.z;
      zc.bits = cand.bits;
      zc.rates = cand.rates;
      zc.powers = cand.powers;
      const double vc = parametric_value(s, zc, alpha);
      if (vc > st.value) {
        st.z = std::move(zc);
        st.value = vc;
        changed = true;
      }
      st.bp = std::move(cand);
      st.bp_valid = true;
    }

    if (strategy != Strategy::random_phase && strategy != Strategy::no_ris) {
      phase::Inputs pin;
      pin.scenario = &s;
      pin.channel = &st.ch;
      pin.powers = &st.z.powers;
      pin.seed = seed;
      const phase::Result pres = phase::optimize(pin, st.z.phases);
      if ((pres.phases - st.z.phases).cwiseAbs().maxCoeff() > 0.0) {
        ChannelState ch2 = st.ch;
        apply_phases(s, ch2, pres.phases);
        if (accept_candidate(s, alpha, allow_local, std::move(ch2), pres.phases, st.z.path,
                             st)) {
          changed = true;
        }
      }
    }

    if (strategy != Strategy::straight_line) {
      trajectory::Inputs tin;
      tin.scenario = &s;
      tin.channel = &st.ch;
      tin.bits = &st.z.bits;
      tin.powers = &st.z.powers;
      tin.alpha = alpha;
      const trajectory::Result tres = trajectory::optimize(tin, st.z.path);
      if (tres.improved) {
        ChannelState base = compute_channel_state(s, draws, tres.path);
        sanitize_channel(base, strategy);
        {
          ChannelState ch2 = base;
          apply_phases(s, ch2, st.z.phases);
          if (accept_candidate(s, alpha, allow_local, std::move(ch2), st.z.phases, tres.path,
                               st)) {
            changed = true;
          }
        }
        if (strategy == Strategy::proposed || strategy == Strategy::full_offload) {
          // The path model assumes coherent reflection at the new positions;
          // the incumbent phases were tuned for the old ones. Re-aim each
          // slot at its strongest transmitter, then let the phase solver
          // refine, so the move is judged at the configuration it would
          // actually reach.
          PhaseConfig aligned = st.z.phases;
          for (int n = 0; n < s.time.slots; ++n) {
            int strongest = -1;
            double top = 0.0;
            for (int i = 0; i < s.device_count(); ++i) {
              if (st.z.powers(i, n) > top) {
                top = st.z.powers(i, n);
                strongest = i;
              }
            }
            if (strongest < 0) continue;
            aligned.row(n) = align_phases(s, draws, strongest, n,
                                          tres.path[static_cast<std::size_t>(n)]);
          }
          ChannelState ch2 = base;
          apply_phases(s, ch2, aligned);
          phase::Inputs pin;
          pin.scenario = &s;
          pin.channel = &ch2;
          pin.powers = &st.z.powers;
          pin.seed = seed;
          const phase::Result pres = phase::optimize(pin, aligned);
          ChannelState ch3 = base;
          apply_phases(s, ch3, pres.phases);
          if (accept_candidate(s, alpha, allow_local, std::move(ch3), pres.phases, tres.path,
                               st)) {
            changed = true;
          }
        }
      }
    }

    trace.push_back(st.value);
    if (!changed) break;
    if (st.value - pass_start <= s.solver.bcd_tol) break;
  }
  return trace;
}

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::proposed: return "proposed";
    case Strategy::straight_line: return "straight-line";
    case Strategy::random_phase: return "random-phase";
    case Strategy::no_ris: return "no-ris";
    case Strategy::full_offload: return "full-offload";
  }
  return "unknown";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "proposed") return Strategy::proposed;
  if (name == "straight-line") return Strategy::straight_line;
  if (name == "random-phase") return Strategy::random_phase;
  if (name == "no-ris") return Strategy::no_ris;
  if (name == "full-offload") return Strategy::full_offload;
  throw std::invalid_argument("unknown strategy: " + name);
}

double parametric_value(const Scenario& s, const DecisionVariables& v, double alpha) {
  const EnergyBreakdown b = energy_breakdown(s, v);
  return b.total_bits() - alpha * b.total_energy();
}

DecisionVariables warm_start(const Scenario& s, const ChannelDraws& draws, Strategy strategy,
                             std::uint64_t seed) {
  const int devices = s.device_count();
  const int slots = s.time.slots;
  const double t = s.slot_length();

  DecisionVariables z;
  z.path = straight_line_trajectory(s);
  z.phases = initial_phases(s, seed);

  ChannelState ch = compute_channel_state(s, draws, z.path);
  sanitize_channel(ch, strategy);
  apply_phases(s, ch, z.phases);

  const bool allow_local = strategy != Strategy::full_offload;
  bitpower::Result r;
  r.bits = BitAllocation::zero(devices, slots);
  r.rates = Eigen::MatrixXd::Zero(devices, slots);
  for (int i = 0; i < devices; ++i) {
    const double share = s.tasks.bits[i] / slots;
    const double cap = s.energy.device_cpu_hz * t / s.tasks.cycles_per_bit[i];
    for (int n = 0; n < slots; ++n) {
      const double local = allow_local ? std::min(share, cap) : 0.0;
      r.bits.local(i, n) = local;
      r.bits.uav(i, n) = share - local;
      r.rates(i, n) = r.bits.uav(i, n) / t;
    }
  }
  bitpower::Inputs bin;
  bin.scenario = &s;
  bin.channel = &ch;
  bin.alpha = 0.0;
  bin.allow_local = allow_local;
  bitpower::polish_feasible(bin, r);

  z.bits = std::move(r.bits);
  z.rates = std::move(r.rates);
  z.powers = std::move(r.powers);
  return z;
}

RunResult run(const RunConfig& cfg) {
  const auto t_run = std::chrono::steady_clock::now();
  const Scenario& s = cfg.scenario;
  const auto violations = validate(s);
  if (!violations.empty()) {
    throw std::invalid_argument("invalid scenario: " + violations.front().field + ": " +
                                violations.front().message);
  }

  RunResult out;
  if (cfg.strategy == Strategy::full_offload) {
    double cycles = 0.0;
    for (int i = 0; i < s.device_count(); ++i) cycles += s.tasks.bits[i] * s.tasks.cycles_per_bit[i];
    out.demand_feasible = cycles <= s.energy.uav_cpu_hz * s.time.horizon_s * (1.0 + 1e-12);
  } else {
    out.demand_feasible = bitpower::demand_attainable(s);
  }
  if (!out.demand_feasible) {
    out.wall_time_s = seconds_since(t_run);
    return out;
  }

  const ChannelDraws draws = ChannelDraws::sample(s, cfg.seed);

  BcdState st;
  st.z = warm_start(s, draws, cfg.strategy, cfg.seed);
  st.ch = compute_channel_state(s, draws, st.z.path);
  sanitize_channel(st.ch, cfg.strategy);
  apply_phases(s, st.ch, st.z.phases);

  EnergyBreakdown b = energy_breakdown(s, st.z);
  double alpha = b.total_bits() / b.total_energy();

  for (int k = 0; k < s.solver.outer_max_iters; ++k) {
    const auto t_iter = std::chrono::steady_clock::now();
    OuterRecord rec;
    rec.alpha = alpha;
    rec.pass_values = bcd_inner(s, draws, alpha, cfg.strategy, cfg.seed, st);
    b = energy_breakdown(s, st.z);
    rec.completed_bits = b.total_bits();
    rec.energy_j = b.total_energy();
    rec.residual_bits = rec.completed_bits - alpha * rec.energy_j;
    rec.wall_time_s = seconds_since(t_iter);
    out.outer.push_back(rec);
    if (std::abs(rec.residual_bits) <= s.solver.outer_tol) {
      out.converged = true;
      break;
    }
    alpha = rec.completed_bits / rec.energy_j;
  }

  out.decision = st.z;
  out.breakdown = b;
  out.completed_bits = b.total_bits();
  out.total_energy_j = b.total_energy();
  out.energy_efficiency = out.completed_bits / out.total_energy_j;
  out.feasibility = check_feasibility(s, st.z);
  out.wall_time_s = seconds_since(t_run);
  return out;
}

}  // namespace risuav::optimizer

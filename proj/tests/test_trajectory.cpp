#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "risuav/bitpower.hpp"
#include "risuav/channel.hpp"
#include "risuav/energy.hpp"
#include "risuav/rng.hpp"
#include "risuav/scenario.hpp"
#include "risuav/trajectory.hpp"

using namespace risuav;
namespace tj = risuav::trajectory;

namespace {

struct Fixture {
  Scenario s;
  ChannelDraws draws;
  ChannelState ch;
  BitAllocation bits;
  Eigen::MatrixXd powers;

  explicit Fixture(std::uint64_t seed) : s(desk_default()), draws(ChannelDraws::sample(s, seed)) {
    const Trajectory straight = straight_line_trajectory(s);
    PhaseConfig aligned(s.time.slots, s.radio.ris_elements);
    for (int n = 0; n < s.time.slots; ++n)
      aligned.row(n) = align_phases(s, draws, 0, n, straight[n]);
    ch = compute_channel_state(s, draws, straight, aligned);

    const int devices = s.device_count(), slots = s.time.slots;
    bits = BitAllocation::zero(devices, slots);
    powers = Eigen::MatrixXd::Zero(devices, slots);
    rng::Stream st(seed, rng::Purpose::instance);
    for (int i = 0; i < devices; ++i) {
      for (int n = 0; n < slots; ++n) {
        powers(i, n) = st.uniform_in(i * 64 + n, 0.05, 0.5);
        bits.uav(i, n) = st.uniform_in(4096 + i * 64 + n, 1e4, 2e5);
        bits.local(i, n) = st.uniform_in(8192 + i * 64 + n, 1e4, 2e6);
      }
    }
  }
};

tj::SlotSignalModel model_for(const Fixture& f, int slot) {
  std::vector<int> active = f.ch.orders[slot].order;
  return tj::build_slot_model(f.s, f.ch, f.powers.col(slot), active, slot);
}

}  // namespace

TEST_CASE("signal model matches the aligned-phase channel at the true distances") {
  const Fixture f(1);
  for (int n = 0; n < f.s.time.slots; ++n) {
    const tj::SlotSignalModel m = model_for(f, n);
    const std::vector<int>& order = f.ch.orders[n].order;
    const int count = static_cast<int>(order.size());
    Eigen::VectorXd u(count);
    for (int k = 0; k < count; ++k) u(k) = f.ch.dist_du(order[k], n);
    const double w = f.ch.dist_ru(n);

    double expect = 1.0;
    const Trajectory straight = straight_line_trajectory(f.s);
    for (int k = 0; k < count; ++k) {
      const int dev = order[k];
      const double g = coherent_magnitude_gain(f.s, f.draws, dev, n, u(k), w);
      expect += f.powers(dev, n) * g * g / f.s.radio.noise_power_w;
    }
    CHECK(m.log_value(count, u, w) == doctest::Approx(std::log(expect)).epsilon(1e-9));
  }
}

TEST_CASE("tangent touches at the expansion point") {
  const Fixture f(2);
  const tj::SlotSignalModel m = model_for(f, 0);
  const int count = f.s.device_count();
  Eigen::VectorXd u0(count);
  for (int k = 0; k < count; ++k) u0(k) = 30.0 + 5.0 * k;
  const double w0 = 25.0;
  const tj::LogTangent tan = tj::linearize(m, count, u0, w0);
  const double exact = m.log_value(count, u0, w0);
  CHECK(std::abs(tan.at(u0, w0) - exact) <= 1e-9 * std::max(1.0, std::abs(exact)));
}

TEST_CASE("tangent is a global lower bound") {
  const Fixture f(3);
  const tj::SlotSignalModel m = model_for(f, 2);
  const int count = f.s.device_count();
  Eigen::VectorXd u0 = Eigen::VectorXd::Constant(count, 40.0);
  const double w0 = 30.0;
  const tj::LogTangent tan = tj::linearize(m, count, u0, w0);

  rng::Stream st(7, rng::Purpose::instance);
  for (int probe = 0; probe < 1000; ++probe) {
    Eigen::VectorXd u(count);
    for (int k = 0; k < count; ++k)
      u(k) = st.uniform_in(probe * 16 + k, 5.0, 120.0);
    const double w = st.uniform_in(probe * 16 + 8, 5.0, 120.0);
    const double exact = m.log_value(count, u, w);
    CHECK(tan.at(u, w) <= exact + 1e-9 * std::max(1.0, std::abs(exact)));
  }
}

TEST_CASE("model gradients match finite differences") {
  const Fixture f(4);
  const tj::SlotSignalModel m = model_for(f, 1);
  const int count = f.s.device_count();
  Eigen::VectorXd u = Eigen::VectorXd::Constant(count, 35.0);
  u(count - 1) = 55.0;
  const double w = 28.0;

  Eigen::VectorXd du(count);
  double dw = 0.0;
  m.log_gradient(count, u, w, du, dw);

  const double h = 1e-5;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd a = u, b = u;
    a(k) += h;
    b(k) -= h;
    const double fd = (m.log_value(count, a, w) - m.log_value(count, b, w)) / (2.0 * h);
    CHECK(du(k) == doctest::Approx(fd).epsilon(1e-6));
  }
  const double fdw = (m.log_value(count, u, w + h) - m.log_value(count, u, w - h)) / (2.0 * h);
  CHECK(dw == doctest::Approx(fdw).epsilon(1e-6));
}

TEST_CASE("refinement is keep-best and pins the endpoint") {
  const Fixture f(5);
  tj::Inputs in{&f.s, &f.ch, &f.bits, &f.powers, 2e5};
  const Trajectory straight = straight_line_trajectory(f.s);

  // Perturbed incumbent: still feasible, clearly not optimal.
  Trajectory bent = straight;
  for (std::size_t n = 0; n + 1 < bent.size(); ++n)
    bent[n] += Eigen::Vector2d{2.0 * ((n % 2) ? 1.0 : -1.0), 0.0};

  const double before = tj::model_objective(in, bent);
  const tj::Result res = tj::optimize(in, bent);
  const double after = tj::model_objective(in, res.path);
  CHECK(after >= before - 1e-9 * std::abs(before));
  if (res.improved) CHECK(after > before);

  REQUIRE(res.path.size() == straight.size());
  CHECK((res.path.back() - f.s.geometry.uav_goal).norm() <= 1e-6);
  const Eigen::VectorXd v = hop_speeds(f.s, res.path);
  CHECK(v.maxCoeff() <= f.s.energy.max_speed * (1.0 + 1e-6));
  CHECK(v.minCoeff() >= f.s.solver.min_speed_floor * (1.0 - 1e-6));
}

TEST_CASE("refinement trace never decreases") {
  const Fixture f(6);
  tj::Inputs in{&f.s, &f.ch, &f.bits, &f.powers, 1e5};
  Trajectory bent = straight_line_trajectory(f.s);
  for (std::size_t n = 0; n + 1 < bent.size(); ++n) bent[n] += Eigen::Vector2d{0.0, 3.0};
  const tj::Result res = tj::optimize(in, bent);
  for (std::size_t k = 1; k < res.trace.size(); ++k)
    CHECK(res.trace[k] >= res.trace[k - 1] - 1e-6 * std::max(1.0, std::abs(res.trace[k - 1])));
}

TEST_CASE("with a huge energy price the straight path is already optimal") {
  // Desk geometry flies above the power-optimal speed, so any detour raises
  // both the speed and the propulsion power; with bits worthless the straight
  // line is the unique minimizer.
  Fixture f(7);
  f.bits.uav.setZero();
  f.powers.setZero();
  tj::Inputs in{&f.s, &f.ch, &f.bits, &f.powers, 1e12};
  const Trajectory straight = straight_line_trajectory(f.s);
  REQUIRE(f.s.geometry.uav_start != f.s.geometry.uav_goal);
  REQUIRE((f.s.geometry.uav_goal - f.s.geometry.uav_start).norm() / f.s.time.horizon_s >
          fly_optimal_speed(f.s.energy.fly_tau1, f.s.energy.fly_tau2));

  const double at_straight = tj::model_objective(in, straight);
  const tj::Result from_straight = tj::optimize(in, straight);
  CHECK(tj::model_objective(in, from_straight.path) <=
        at_straight + 1e-6 * std::abs(at_straight));

  Trajectory bent = straight;
  for (std::size_t n = 0; n + 1 < bent.size(); ++n) bent[n] += Eigen::Vector2d{3.0, 1.0};
  const tj::Result res = tj::optimize(in, bent);
  CHECK(tj::model_objective(in, res.path) >= tj::model_objective(in, bent));
  // The refinement should recover most of the gap to the straight line.
  const double gap0 = at_straight - tj::model_objective(in, bent);
  const double gap1 = at_straight - tj::model_objective(in, res.path);
  CHECK(gap1 <= 0.5 * gap0);
}

TEST_CASE("optimization is deterministic") {
  const Fixture f(8);
  tj::Inputs in{&f.s, &f.ch, &f.bits, &f.powers, 3e5};
  Trajectory bent = straight_line_trajectory(f.s);
  for (std::size_t n = 0; n + 1 < bent.size(); ++n) bent[n] += Eigen::Vector2d{1.0, -1.0};
  const tj::Result a = tj::optimize(in, bent);
  const tj::Result b = tj::optimize(in, bent);
  REQUIRE(a.path.size() == b.path.size());
  for (std::size_t n = 0; n < a.path.size(); ++n)
    CHECK((a.path[n] - b.path[n]).norm() == 0.0);
}

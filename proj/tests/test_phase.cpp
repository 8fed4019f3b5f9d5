#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "risuav/channel.hpp"
#include "risuav/phase.hpp"
#include "risuav/rng.hpp"
#include "risuav/scenario.hpp"

using namespace risuav;

namespace {

Eigen::VectorXcd phasor(const Eigen::VectorXd& theta) {
  Eigen::VectorXcd v(theta.size());
  for (int m = 0; m < theta.size(); ++m)
    v(m) = std::complex<double>(std::cos(theta(m)), std::sin(theta(m)));
  return v;
}

Scenario tiny(int devices, int elements) {
  Scenario s = desk_default();
  s.geometry.devices.resize(devices);
  for (int i = 0; i < devices; ++i)
    s.geometry.devices[i] = Eigen::Vector2d{40.0 + 5.0 * i, 20.0 + 3.0 * i};
  s.tasks.bits.assign(devices, 2e6);
  s.tasks.cycles_per_bit.assign(devices, 1000.0);
  s.radio.ris_elements = elements;
  return s;
}

}  // namespace

TEST_CASE("rank-one lift reproduces the squared magnitude") {
  rng::Stream st(41, rng::Purpose::instance);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(st.word(trial) % 8);
    Eigen::VectorXcd cascade(m);
    for (int k = 0; k < m; ++k) cascade(k) = 1e-5 * st.complex_normal(trial * 64 + k);
    const std::complex<double> direct = 1e-5 * st.complex_normal(trial * 64 + 60);
    Eigen::VectorXd theta(m);
    for (int k = 0; k < m; ++k)
      theta(k) = st.uniform_in(trial * 64 + 32 + k, 0.0, 2.0 * M_PI);

    const std::complex<double> combined = direct + cascade.cwiseProduct(phasor(theta)).sum();
    const double expect = std::norm(combined);

    Eigen::VectorXcd f(m + 1);
    f.head(m) = phasor(theta);
    f(m) = 1.0;
    const Eigen::MatrixXcd lift = phase::lift_matrix(cascade, direct);
    const double got = (lift * (f * f.adjoint())).trace().real();
    CHECK(got == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("slot sum rate telescopes and ignores decoding order") {
  const Scenario s = tiny(3, 4);
  rng::Stream st(43, rng::Purpose::instance);
  Eigen::VectorXcd combined(3);
  Eigen::VectorXd powers(3);
  for (int i = 0; i < 3; ++i) {
    combined(i) = 1e-4 * st.complex_normal(i);
    powers(i) = st.uniform_in(16 + i, 0.1, 2.0);
  }
  double received = 0.0;
  for (int i = 0; i < 3; ++i) received += powers(i) * std::norm(combined(i));
  const double expect =
      s.radio.bandwidth_hz * std::log2(1.0 + received / s.radio.noise_power_w);
  CHECK(phase::slot_sum_rate(s, combined, powers) == doctest::Approx(expect).epsilon(1e-12));

  // Matches the per-device successive-decoding rates summed.
  Eigen::VectorXd gains(3);
  for (int i = 0; i < 3; ++i) gains(i) = std::norm(combined(i));
  const Eigen::VectorXd rates = offload_rates(powers, gains, decoding_order(gains),
                                              s.radio.bandwidth_hz, s.radio.noise_power_w);
  CHECK(rates.sum() == doctest::Approx(phase::slot_sum_rate(s, combined, powers)).epsilon(1e-12));
}

namespace {

struct Fixture {
  Scenario s;
  ChannelDraws draws;
  ChannelState ch;
  Eigen::MatrixXd powers;
  PhaseConfig incumbent;

  Fixture(int devices, int elements, std::uint64_t seed, double power = 0.5)
      : s(tiny(devices, elements)), draws(ChannelDraws::sample(s, seed)) {
    ch = compute_channel_state(s, draws, straight_line_trajectory(s));
    powers = Eigen::MatrixXd::Constant(devices, s.time.slots, power);
    incumbent = PhaseConfig::Zero(s.time.slots, elements);
    apply_phases(s, ch, incumbent);
  }
};

double slot_value(const Fixture& f, int n, const Eigen::VectorXd& theta) {
  const Eigen::VectorXcd combined = f.ch.direct.col(n) + f.ch.cascade[n] * phasor(theta);
  return phase::slot_sum_rate(f.s, combined, f.powers.col(n));
}

}  // namespace

TEST_CASE("two-element surface matches an exhaustive grid") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Fixture f(1, 2, seed);
    phase::Inputs in{&f.s, &f.ch, &f.powers, seed};
    const phase::Result res = phase::optimize(in, f.incumbent);

    for (int n = 0; n < f.s.time.slots; ++n) {
      double grid_best = 0.0;
      for (int i = 0; i < 64; ++i) {
        for (int j = 0; j < 64; ++j) {
          Eigen::VectorXd theta(2);
          theta << 2.0 * M_PI * i / 64.0, 2.0 * M_PI * j / 64.0;
          grid_best = std::max(grid_best, slot_value(f, n, theta));
        }
      }
      const double achieved = slot_value(f, n, res.phases.row(n).transpose());
      CHECK(achieved >= grid_best * 0.98);
      CHECK(res.slots[n].achieved_value == doctest::Approx(achieved).epsilon(1e-9));
    }
  }
}

TEST_CASE("result never falls below the incumbent") {
  for (std::uint64_t seed : {5ull, 6ull}) {
    Fixture f(3, 6, seed);
    // Random incumbents, including decent ones.
    rng::Stream st(seed, rng::Purpose::instance);
    for (int n = 0; n < f.s.time.slots; ++n)
      for (int m = 0; m < 6; ++m)
        f.incumbent(n, m) = st.uniform_in(n * 64 + m, 0.0, 2.0 * M_PI);
    ChannelState fresh = compute_channel_state(f.s, f.draws, straight_line_trajectory(f.s));
    apply_phases(f.s, fresh, f.incumbent);
    f.ch = fresh;

    phase::Inputs in{&f.s, &f.ch, &f.powers, seed};
    const phase::Result res = phase::optimize(in, f.incumbent);
    for (int n = 0; n < f.s.time.slots; ++n) {
      const double before = slot_value(f, n, f.incumbent.row(n).transpose());
      const double after = slot_value(f, n, res.phases.row(n).transpose());
      CHECK(after >= before * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("relaxation value bounds the achieved rate") {
  Fixture f(2, 4, 9);
  phase::Inputs in{&f.s, &f.ch, &f.powers, 9};
  const phase::Result res = phase::optimize(in, f.incumbent);
  for (int n = 0; n < f.s.time.slots; ++n) {
    const auto& rep = res.slots[n];
    if (!rep.solved) continue;
    CHECK(rep.achieved_value <= rep.relaxed_bound * (1.0 + 5e-3) + 1.0);
  }
}

TEST_CASE("refinement traces never decrease") {
  Fixture f(3, 5, 13);
  phase::Inputs in{&f.s, &f.ch, &f.powers, 13};
  const phase::Result res = phase::optimize(in, f.incumbent);
  bool saw_trace = false;
  for (const auto& rep : res.slots) {
    for (std::size_t k = 1; k < rep.trace.size(); ++k) {
      saw_trace = true;
      CHECK(rep.trace[k] >= rep.trace[k - 1] * (1.0 - 1e-6) - 1e-6);
    }
  }
  CHECK(saw_trace);
}

TEST_CASE("slots without transmit power keep their rows") {
  Fixture f(2, 4, 15);
  f.powers.col(1).setZero();
  f.incumbent.row(1).setConstant(0.7);
  phase::Inputs in{&f.s, &f.ch, &f.powers, 15};
  const phase::Result res = phase::optimize(in, f.incumbent);
  CHECK_FALSE(res.slots[1].solved);
  CHECK((res.phases.row(1).array() == 0.7).all());
}

TEST_CASE("optimization is deterministic") {
  Fixture f(2, 5, 20);
  phase::Inputs in{&f.s, &f.ch, &f.powers, 20};
  const phase::Result a = phase::optimize(in, f.incumbent);
  const phase::Result b = phase::optimize(in, f.incumbent);
  CHECK(a.phases == b.phases);
  CHECK(a.total_iterations == b.total_iterations);
}

TEST_CASE("single-device slots align to the coherent optimum") {
  // With one transmitter the best phases align every reflected term with the
  // direct one; the solver should land within numerical noise of that rate.
  Fixture f(1, 4, 25, 1.0);
  phase::Inputs in{&f.s, &f.ch, &f.powers, 25};
  const phase::Result res = phase::optimize(in, f.incumbent);
  const Trajectory traj = straight_line_trajectory(f.s);
  for (int n = 0; n < f.s.time.slots; ++n) {
    const Eigen::VectorXd aligned = align_phases(f.s, f.draws, 0, n, traj[n]);
    const double best = slot_value(f, n, aligned);
    const double achieved = slot_value(f, n, res.phases.row(n).transpose());
    CHECK(achieved >= best * (1.0 - 1e-6));
  }
}

// Microbenchmarks for the hot paths: channel cache construction, the two
// allocation routes, the per-slot phase solve, one path refinement round, and
// the full desk pipeline as a one-shot end-to-end number.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "risuav/bitpower.hpp"
#include "risuav/channel.hpp"
#include "risuav/optimizer.hpp"
#include "risuav/phase.hpp"
#include "risuav/rng.hpp"
#include "risuav/scenario.hpp"
#include "risuav/trajectory.hpp"

using namespace risuav;

namespace {

PhaseConfig seeded_phases(const Scenario& s, std::uint64_t seed) {
  PhaseConfig phases(s.time.slots, s.radio.ris_elements);
  rng::Stream st(seed, rng::Purpose::random_phase);
  for (int n = 0; n < s.time.slots; ++n)
    for (int m = 0; m < s.radio.ris_elements; ++m)
      phases(n, m) =
          st.uniform_in(static_cast<std::uint64_t>(n) * 1024 + m, 0.0, 2.0 * M_PI);
  return phases;
}

void bench_channel_state(benchmark::State& state, const Scenario& s) {
  const ChannelDraws draws = ChannelDraws::sample(s, 1);
  const Trajectory traj = straight_line_trajectory(s);
  const PhaseConfig phases = seeded_phases(s, 1);
  for (auto _ : state) {
    ChannelState ch = compute_channel_state(s, draws, traj, phases);
    benchmark::DoNotOptimize(ch.gain_sq.data());
  }
}

void BM_ChannelStateDesk(benchmark::State& state) {
  bench_channel_state(state, desk_default());
}
BENCHMARK(BM_ChannelStateDesk)->Unit(benchmark::kMicrosecond);

void BM_ChannelStateReference(benchmark::State& state) {
  bench_channel_state(state, reference_default());
}
BENCHMARK(BM_ChannelStateReference)->Unit(benchmark::kMicrosecond);

void BM_OffloadRates(benchmark::State& state) {
  const Scenario s = desk_default();
  const ChannelDraws draws = ChannelDraws::sample(s, 1);
  const ChannelState ch =
      compute_channel_state(s, draws, straight_line_trajectory(s), seeded_phases(s, 1));
  const Eigen::VectorXd powers = Eigen::VectorXd::Constant(s.device_count(), 0.3);
  for (auto _ : state) {
    const Eigen::VectorXd rates =
        offload_rates(powers, ch.gain_sq.col(0), ch.orders[0], s.radio.bandwidth_hz,
                      s.radio.noise_power_w);
    benchmark::DoNotOptimize(rates.data());
  }
}
BENCHMARK(BM_OffloadRates)->Unit(benchmark::kNanosecond);

struct AllocFixture {
  Scenario s = desk_default();
  ChannelDraws draws = ChannelDraws::sample(s, 1);
  ChannelState ch =
      compute_channel_state(s, draws, straight_line_trajectory(s), seeded_phases(s, 1));
  bitpower::Inputs in{&s, &ch, 2.0e5, true};
};

void BM_AllocationDualSearch(benchmark::State& state) {
  AllocFixture f;
  for (auto _ : state) {
    const bitpower::Result r = bitpower::dual_search(f.in);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_AllocationDualSearch)->Unit(benchmark::kMillisecond);

void BM_AllocationDirect(benchmark::State& state) {
  AllocFixture f;
  for (auto _ : state) {
    const bitpower::Result r = bitpower::solve_direct(f.in);
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_AllocationDirect)->Unit(benchmark::kMillisecond);

void BM_PhaseOptimize(benchmark::State& state) {
  const Scenario s = desk_default();
  const ChannelDraws draws = ChannelDraws::sample(s, 1);
  ChannelState ch = compute_channel_state(s, draws, straight_line_trajectory(s));
  const PhaseConfig incumbent = PhaseConfig::Zero(s.time.slots, s.radio.ris_elements);
  apply_phases(s, ch, incumbent);
  const Eigen::MatrixXd powers =
      Eigen::MatrixXd::Constant(s.device_count(), s.time.slots, 0.3);
  phase::Inputs in{&s, &ch, &powers, 1};
  for (auto _ : state) {
    const phase::Result r = phase::optimize(in, incumbent);
    benchmark::DoNotOptimize(r.total_iterations);
  }
  state.counters["slots"] = s.time.slots;
}
BENCHMARK(BM_PhaseOptimize)->Unit(benchmark::kMillisecond);

void BM_TrajectoryRefine(benchmark::State& state) {
  const Scenario s = desk_default();
  const ChannelDraws draws = ChannelDraws::sample(s, 1);
  const Trajectory straight = straight_line_trajectory(s);
  PhaseConfig aligned(s.time.slots, s.radio.ris_elements);
  for (int n = 0; n < s.time.slots; ++n)
    aligned.row(n) = align_phases(s, draws, 0, n, straight[static_cast<std::size_t>(n)]);
  const ChannelState ch = compute_channel_state(s, draws, straight, aligned);
  BitAllocation bits = BitAllocation::zero(s.device_count(), s.time.slots);
  bits.uav.setConstant(1e6);
  const Eigen::MatrixXd powers =
      Eigen::MatrixXd::Constant(s.device_count(), s.time.slots, 0.3);
  trajectory::Inputs in{&s, &ch, &bits, &powers, 2.0e5};
  for (auto _ : state) {
    const trajectory::Result r = trajectory::optimize(in, straight);
    benchmark::DoNotOptimize(r.iterations);
  }
}
BENCHMARK(BM_TrajectoryRefine)->Unit(benchmark::kMillisecond);

void BM_DeskPipeline(benchmark::State& state) {
  const Scenario s = desk_default();
  for (auto _ : state) {
    const optimizer::RunResult r = optimizer::run({s, 1, optimizer::Strategy::proposed});
    benchmark::DoNotOptimize(r.energy_efficiency);
    state.counters["outer"] = static_cast<double>(r.outer.size());
  }
}
BENCHMARK(BM_DeskPipeline)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();

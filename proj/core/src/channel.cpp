#include "risuav/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace risuav {

ChannelDraws ChannelDraws::sample(const Scenario& s, std::uint64_t seed) {
  const int device_count = s.device_count();
  const int slots = s.time.slots;
  const int elements = s.radio.ris_elements;
  ChannelDraws d;
  d.direct_fade.resize(device_count, slots);
  d.ris_nlos.resize(device_count, elements);
  for (int i = 0; i < device_count; ++i) {
    rng::Stream direct(seed, rng::Purpose::direct_fade, static_cast<std::uint64_t>(i));
    for (int n = 0; n < slots; ++n) d.direct_fade(i, n) = direct.complex_normal(n);
    rng::Stream nlos(seed, rng::Purpose::ris_nlos, static_cast<std::uint64_t>(i));
    for (int m = 0; m < elements; ++m) d.ris_nlos(i, m) = nlos.complex_normal(m);
  }
  return d;
}

ChannelDraws ChannelDraws::deterministic(const Scenario& s) {
  ChannelDraws d;
  d.direct_fade = Eigen::MatrixXcd::Ones(s.device_count(), s.time.slots);
  d.ris_nlos = Eigen::MatrixXcd::Zero(s.device_count(), s.radio.ris_elements);
  return d;
}

double device_uav_distance(const Scenario& s, int device, const Eigen::Vector2d& q) {
  const double horiz = (q - s.geometry.devices[device]).norm();
  return std::sqrt(horiz * horiz + s.geometry.uav_altitude * s.geometry.uav_altitude);
}

double ris_uav_distance(const Scenario& s, const Eigen::Vector2d& q) {
  const double horiz = (q - s.geometry.ris_position).norm();
  const double vert = s.geometry.uav_altitude - s.geometry.ris_height;
  return std::sqrt(vert * vert + horiz * horiz);
}

double device_ris_distance(const Scenario& s, int device) {
  const double horiz = (s.geometry.devices[device] - s.geometry.ris_position).norm();
  return std::sqrt(horiz * horiz + s.geometry.ris_height * s.geometry.ris_height);
}

Eigen::VectorXcd ris_uav_channel(const Scenario& s, const Eigen::Vector2d& q) {
  const int elements = s.radio.ris_elements;
  const double d = ris_uav_distance(s, q);
  const double amp = std::sqrt(s.radio.ref_gain) / d;
  // Departure cosine along the array axis, from the x offset.
  const double cos_dep = (s.geometry.ris_position.x() - q.x()) / d;
  const double step = -2.0 * M_PI * s.radio.element_spacing * cos_dep;
  Eigen::VectorXcd h(elements);
  for (int m = 0; m < elements; ++m)
    h(m) = amp * std::exp(std::complex<double>(0.0, step * m));
  return h;
}

Eigen::VectorXcd device_ris_channel(const Scenario& s, const ChannelDraws& d, int device) {
  const int elements = s.radio.ris_elements;
  const double dist = device_ris_distance(s, device);
  const double amp = std::sqrt(s.radio.ref_gain * std::pow(dist, -s.radio.ris_exponent));
  const double beta = s.radio.rician_beta;
  const double los_w = std::sqrt(beta / (1.0 + beta));
  const double nlos_w = std::sqrt(1.0 / (1.0 + beta));
  const double cos_arr =
      (s.geometry.devices[device].x() - s.geometry.ris_position.x()) / dist;
  const double step = -2.0 * M_PI * s.radio.element_spacing * cos_arr;
  Eigen::VectorXcd h(elements);
  for (int m = 0; m < elements; ++m) {
    const std::complex<double> los = std::exp(std::complex<double>(0.0, step * m));
    h(m) = amp * (los_w * los + nlos_w * d.ris_nlos(device, m));
  }
  return h;
}

std::complex<double> direct_channel(const Scenario& s, const ChannelDraws& d, int device,
                                    int slot, const Eigen::Vector2d& q) {
  const double dist = device_uav_distance(s, device, q);
  const double amp = std::sqrt(s.radio.ref_gain * std::pow(dist, -s.radio.direct_exponent));
  return amp * d.direct_fade(device, slot);
}

Eigen::VectorXcd cascade_row(const Scenario& s, const ChannelDraws& d, int device,
                             const Eigen::Vector2d& q) {
  const Eigen::VectorXcd to_surface = device_ris_channel(s, d, device);
  const Eigen::VectorXcd to_uav = ris_uav_channel(s, q);
  return to_surface.conjugate().cwiseProduct(to_uav);
}

std::complex<double> combined_gain(const Scenario& s, const ChannelDraws& d, int device,
                                   int slot, const Eigen::Vector2d& q,
                                   const Eigen::VectorXd& theta) {
  const Eigen::VectorXcd row = cascade_row(s, d, device, q);
  std::complex<double> sum = direct_channel(s, d, device, slot, q);
  for (int m = 0; m < row.size(); ++m)
    sum += row(m) * std::exp(std::complex<double>(0.0, theta(m)));
  return sum;
}

Eigen::VectorXd cascade_magnitudes(const Scenario& s, const ChannelDraws& d, int device) {
  return device_ris_channel(s, d, device).cwiseAbs();
}

double coherent_magnitude_gain(const Scenario& s, const ChannelDraws& d, int device,
                               int slot, double dist_device_uav, double dist_ris_uav) {
  const double root_gain = std::sqrt(s.radio.ref_gain);
  const double direct_part = root_gain * std::abs(d.direct_fade(device, slot)) /
                             std::pow(dist_device_uav, s.radio.direct_exponent / 2.0);
  const double reflected_part =
      root_gain * cascade_magnitudes(s, d, device).sum() / dist_ris_uav;
  return direct_part + reflected_part;
}

Eigen::VectorXd align_phases(const Scenario& s, const ChannelDraws& d, int device, int slot,
                             const Eigen::Vector2d& q) {
  const std::complex<double> direct = direct_channel(s, d, device, slot, q);
  const double target = std::arg(direct);
  const Eigen::VectorXcd row = cascade_row(s, d, device, q);
  Eigen::VectorXd theta(row.size());
  for (int m = 0; m < row.size(); ++m) theta(m) = target - std::arg(row(m));
  return theta;
}

DecodingOrder decoding_order(const Eigen::VectorXd& gains_sq) {
  const int device_count = static_cast<int>(gains_sq.size());
  DecodingOrder out;
  out.order.resize(device_count);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&gains_sq](int a, int b) { return gains_sq(a) < gains_sq(b); });
  out.position.resize(device_count);
  for (int k = 0; k < device_count; ++k) out.position[out.order[k]] = k;
  return out;
}

Eigen::VectorXd offload_rates(const Eigen::VectorXd& powers, const Eigen::VectorXd& gains_sq,
                              const DecodingOrder& order, double bandwidth_hz,
                              double noise_w) {
  const int device_count = static_cast<int>(powers.size());
  Eigen::VectorXd rates(device_count);
  double interference = 0.0;
  for (int k = 0; k < device_count; ++k) {
    const int dev = order.order[k];
    const double signal = powers(dev) * gains_sq(dev);
    rates(dev) = bandwidth_hz * std::log2(1.0 + signal / (interference + noise_w));
    interference += signal;
  }
  return rates;
}

ChannelState compute_channel_state(const Scenario& s, const ChannelDraws& d,
                                   const Trajectory& traj) {
  const int device_count = s.device_count();
  const int slots = s.time.slots;
  if (static_cast<int>(traj.size()) != slots)
    throw std::invalid_argument("channel: trajectory length must equal slot count");

  ChannelState st;
  st.dist_du.resize(device_count, slots);
  st.dist_ru.resize(slots);
  st.direct.resize(device_count, slots);
  st.cascade.resize(slots);
  st.direct_mag_coeff.resize(device_count, slots);
  st.cascade_mag_coeff.resize(device_count);

  const double root_gain = std::sqrt(s.radio.ref_gain);
  std::vector<Eigen::VectorXcd> to_surface(device_count);
  for (int i = 0; i < device_count; ++i) {
    to_surface[i] = device_ris_channel(s, d, i);
    st.cascade_mag_coeff(i) = root_gain * to_surface[i].cwiseAbs().sum();
  }

  for (int n = 0; n < slots; ++n) {
    const Eigen::Vector2d& q = traj[n];
    st.dist_ru(n) = ris_uav_distance(s, q);
    const Eigen::VectorXcd to_uav = ris_uav_channel(s, q);
    st.cascade[n].resize(device_count, s.radio.ris_elements);
    for (int i = 0; i < device_count; ++i) {
      st.dist_du(i, n) = device_uav_distance(s, i, q);
      st.direct(i, n) = direct_channel(s, d, i, n, q);
      st.direct_mag_coeff(i, n) = root_gain * std::abs(d.direct_fade(i, n));
      st.cascade[n].row(i) = to_surface[i].conjugate().cwiseProduct(to_uav).transpose();
    }
  }
  return st;
}

void apply_phases(const Scenario& s, ChannelState& st, const PhaseConfig& phases) {
  const int device_count = s.device_count();
  const int slots = s.time.slots;
  if (phases.rows() != slots || phases.cols() != s.radio.ris_elements)
    throw std::invalid_argument("channel: phase table must be slots x elements");

  st.combined.resize(device_count, slots);
  st.gain_sq.resize(device_count, slots);
  st.orders.resize(slots);
  for (int n = 0; n < slots; ++n) {
    Eigen::VectorXcd shift(s.radio.ris_elements);
    for (int m = 0; m < s.radio.ris_elements; ++m)
      shift(m) = std::exp(std::complex<double>(0.0, phases(n, m)));
    Eigen::VectorXcd combined = st.direct.col(n) + st.cascade[n] * shift;
    st.combined.col(n) = combined;
    st.gain_sq.col(n) = combined.cwiseAbs2();
    st.orders[n] = decoding_order(st.gain_sq.col(n));
  }
}

ChannelState compute_channel_state(const Scenario& s, const ChannelDraws& d,
                                   const Trajectory& traj, const PhaseConfig& phases) {
  ChannelState st = compute_channel_state(s, d, traj);
  apply_phases(s, st, phases);
  return st;
}

Trajectory straight_line_trajectory(const Scenario& s) {
  const int slots = s.time.slots;
  Trajectory traj(slots);
  for (int n = 0; n < slots; ++n) {
    const double f = static_cast<double>(n + 1) / slots;
    traj[n] = s.geometry.uav_start + f * (s.geometry.uav_goal - s.geometry.uav_start);
  }
  return traj;
}

}  // namespace risuav

// Copyright 2026 The mhamcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MHAMCL__FILTER_HPP_
#define MHAMCL__FILTER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/gridmap.hpp"
#include "mhamcl/metrics.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/scan.hpp"

namespace mhamcl
{

/// Pose hypothesis, probability weight and the number of beams it matched
/// in the last correction.
struct Particle
{
  Transform2D pose;
  double weight{0.0};
  int hits{0};
};

struct ParticleBounds
{
  std::size_t min{100};
  std::size_t max{1000};

  bool contains(std::size_t n) const {return n >= min && n <= max;}
};

/// One AMCL population.
struct ParticleSet
{
  std::vector<Particle> particles;
  ParticleBounds bounds;
  double last_prediction_time{0.0};
  std::optional<std::size_t> beams_used;  // set by the last successful correction

  std::size_t size() const {return particles.size();}
  bool empty() const {return particles.empty();}
};

struct PoseStd
{
  double x{0.0};
  double y{0.0};
  double yaw{0.0};
};

/// Odometry noise as fractions of the displacement: translation noise per
/// meter and per radian, rotation noise per radian and per meter.
struct MotionNoiseParams
{
  double trans_per_m{0.05};
  double trans_per_rad{0.0};
  double rot_per_rad{0.05};
  double rot_per_m{0.0};

  void validate() const
  {
    if (trans_per_m < 0.0 || trans_per_rad < 0.0 || rot_per_rad < 0.0 || rot_per_m < 0.0) {
      throw ParameterError("motion noise scales must be >= 0");
    }
  }
};

struct ReseedParams
{
  double winner_pct{0.1};
  double loser_pct{0.3};
  PoseStd jitter{0.02, 0.02, 0.01};

  void validate() const
  {
    if (!(winner_pct >= 0.0 && winner_pct <= 1.0) || !(loser_pct >= 0.0 && loser_pct <= 1.0) ||
      winner_pct + loser_pct > 1.0 + 1e-12)
    {
      throw ParameterError("reseed: winner_pct and loser_pct must lie in [0,1] and sum to <= 1");
    }
    if (jitter.x < 0.0 || jitter.y < 0.0 || jitter.yaw < 0.0) {
      throw ParameterError("reseed: jitter must be >= 0");
    }
  }
};

struct AdaptParams
{
  double grow_above{0.3};
  double shrink_below{0.05};

  void validate() const
  {
    if (!(shrink_below > 0.0 && grow_above > shrink_below)) {
      throw ParameterError("adapt_size: need grow_above > shrink_below > 0");
    }
  }
};

struct CorrectionResult
{
  std::size_t beams_used{0};
  bool degenerate{false};  // every weight vanished; weights were reset to uniform
};

namespace detail
{

inline std::size_t fraction_of(double pct, std::size_t n)
{
  return static_cast<std::size_t>(std::floor(pct * static_cast<double>(n) + 1e-9));
}

// Half-normal draw over the sorted winner indices, biased toward the best.
inline std::size_t draw_winner_index(Rng & rng, std::size_t n_winners)
{
  const double spread = static_cast<double>(n_winners) / 2.0;
  const double draw = std::floor(std::fabs(sample_normal(rng, spread)));
  return std::min(static_cast<std::size_t>(draw), n_winners - 1);
}

inline Particle perturbed_copy(const Particle & source, const PoseStd & jitter, Rng & rng)
{
  Particle p = source;
  p.pose = Transform2D{
    source.pose.x() + sample_normal(rng, jitter.x),
    source.pose.y() + sample_normal(rng, jitter.y),
    source.pose.yaw() + sample_normal(rng, jitter.yaw)};
  return p;
}

inline void sort_by_weight(std::vector<Particle> & particles)
{
  std::stable_sort(
    particles.begin(), particles.end(),
    [](const Particle & a, const Particle & b) {return a.weight > b.weight;});
}

// Fixed-order summation keeps normalization independent of evaluation order.
inline void normalize_weights(std::vector<Particle> & particles)
{
  double total = 0.0;
  for (const Particle & p : particles) {
    total += p.weight;
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    const double w = 1.0 / static_cast<double>(particles.size());
    for (Particle & p : particles) {
      p.weight = w;
    }
    return;
  }
  for (Particle & p : particles) {
    p.weight /= total;
  }
}

}  // namespace detail

inline ParticleSet init_gaussian(
  const Transform2D & pose, const PoseStd & stddev, std::size_t n, const ParticleBounds & bounds,
  Rng & rng, double stamp = 0.0)
{
  if (bounds.min > bounds.max || !bounds.contains(n)) {
    throw ParameterError("init_gaussian: particle count outside [particles_min, particles_max]");
  }
  ParticleSet set;
  set.bounds = bounds;
  set.last_prediction_time = stamp;
  set.particles.reserve(n);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.particles.push_back(detail::perturbed_copy(Particle{pose, w, 0}, stddev, rng));
  }
  return set;
}

/// Moves every particle by the odometry increment u plus zero-mean noise whose
/// deviation scales with the size of u.
inline void predict(ParticleSet & set, const Transform2D & u, const MotionNoiseParams & noise, Rng & rng)
{
  const double trans = std::hypot(u.x(), u.y());
  const double rot = std::fabs(u.yaw());
  const double trans_std = noise.trans_per_m * trans + noise.trans_per_rad * rot;
  const double rot_std = noise.rot_per_rad * rot + noise.rot_per_m * trans;
  for (Particle & p : set.particles) {
    const Transform2D noisy{
      u.x() + sample_normal(rng, trans_std),
      u.y() + sample_normal(rng, trans_std),
      u.yaw() + sample_normal(rng, rot_std)};
    p.pose = p.pose * noisy;
  }
}

/// Gaussian density of a range error, the per-beam correction factor.
inline double beam_likelihood(double error, double sigma)
{
  const double z = error / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double log_beam_likelihood(double error, double sigma)
{
  const double z = error / sigma;
  return -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
}

/// Weighs every particle by the product of per-beam likelihoods (accumulated
/// in log space) and counts hits. Poses are untouched.
inline CorrectionResult correct(
  ParticleSet & set, std::span<const Beam> beams, const OccupancyGrid & grid,
  const Transform2D & base_to_laser, const SensorModelParams & params)
{
  CorrectionResult result;
  result.beams_used = beams.size();
  if (beams.empty() || set.empty()) {
    return result;
  }
  const double hit_threshold = params.hit_threshold();
  std::vector<double> log_w(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    Particle & p = set.particles[i];
    const Transform2D laser = p.pose * base_to_laser;
    double acc = p.weight > 0.0 ? std::log(p.weight) : -std::numeric_limits<double>::infinity();
    int hits = 0;
    for (const Beam & b : beams) {
      const double err = beam_error(grid, laser, b.angle, b.range, params.sigma);
      acc += log_beam_likelihood(err, params.sigma);
      hits += err <= hit_threshold ? 1 : 0;
    }
    log_w[i] = acc;
    p.hits = hits;
  }

  const double max_log = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(max_log)) {
    result.degenerate = true;
    for (Particle & p : set.particles) {
      p.weight = 0.0;
    }
  } else {
    for (std::size_t i = 0; i < set.size(); ++i) {
      set.particles[i].weight = std::exp(log_w[i] - max_log);
    }
  }
  detail::normalize_weights(set.particles);
  set.beams_used = beams.size();
  return result;
}

inline CorrectionResult correct(
  ParticleSet & set, const LaserScan & scan, const OccupancyGrid & grid,
  const Transform2D & base_to_laser, const SensorModelParams & params)
{
  const std::vector<Beam> beams = select_beams(scan, params);
  return correct(set, beams, grid, base_to_laser, params);
}

/// Mean fraction of matched beams over the population.
inline double quality(std::span<const Particle> particles, std::size_t beams_used)
{
  if (beams_used == 0) {
    throw InvalidStateError("quality: no beams were used");
  }
  if (particles.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const Particle & p : particles) {
    sum += static_cast<double>(p.hits) / static_cast<double>(beams_used);
  }
  return sum / static_cast<double>(particles.size());
}

inline double quality(const ParticleSet & set)
{
  if (!set.beams_used) {
    throw InvalidStateError("quality: no correction has run on this particle set");
  }
  return quality(set.particles, *set.beams_used);
}

/// Replaces the lowest-weight fraction with jittered copies of winners and
/// resets weights to uniform. The particle count is unchanged.
inline void reseed(ParticleSet & set, const ReseedParams & params, Rng & rng)
{
  params.validate();
  const std::size_t n = set.size();
  if (n < 2) {
    return;
  }
  detail::sort_by_weight(set.particles);
  const std::size_t n_winners = std::max<std::size_t>(1, detail::fraction_of(params.winner_pct, n));
  const std::size_t n_losers = std::min(detail::fraction_of(params.loser_pct, n), n - n_winners);
  for (std::size_t i = n - n_losers; i < n; ++i) {
    const std::size_t w = detail::draw_winner_index(rng, n_winners);
    set.particles[i] = detail::perturbed_copy(set.particles[w], params.jitter, rng);
  }
  const double uniform = 1.0 / static_cast<double>(n);
  for (Particle & p : set.particles) {
    p.weight = uniform;
  }
}

/// Grows (x1.5, new particles drawn from the winners) or shrinks (x0.75,
/// lowest weights dropped) the population by the estimate's uncertainty,
/// staying inside the set's bounds.
inline void adapt_size(
  ParticleSet & set, const PoseEstimate & estimate, const AdaptParams & adapt,
  const ReseedParams & reseed_params, Rng & rng)
{
  adapt.validate();
  const std::size_t n = set.size();
  if (n == 0) {
    return;
  }
  const double u = uncertainty(estimate, 1e-9);
  std::size_t target = n;
  if (u > adapt.grow_above) {
    target = static_cast<std::size_t>(std::lround(static_cast<double>(n) * 1.5));
  } else if (u < adapt.shrink_below) {
    target = static_cast<std::size_t>(std::lround(static_cast<double>(n) * 0.75));
  }
  target = std::clamp(target, set.bounds.min, set.bounds.max);
  if (target == n) {
    return;
  }

  detail::sort_by_weight(set.particles);
  if (target < n) {
    set.particles.resize(target);
  } else {
    const std::size_t n_winners =
      std::max<std::size_t>(1, detail::fraction_of(reseed_params.winner_pct, n));
    set.particles.reserve(target);
    for (std::size_t i = n; i < target; ++i) {
      const std::size_t w = detail::draw_winner_index(rng, n_winners);
      set.particles.push_back(detail::perturbed_copy(set.particles[w], reseed_params.jitter, rng));
    }
  }
  detail::normalize_weights(set.particles);
}

inline PoseEstimate estimate(const ParticleSet & set)
{
  if (set.empty()) {
    throw InvalidStateError("estimate: empty particle set");
  }
  return weighted_mean_cov(set.particles);
}

}  // namespace mhamcl

#endif  // MHAMCL__FILTER_HPP_

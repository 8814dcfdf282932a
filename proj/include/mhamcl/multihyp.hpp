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

#ifndef MHAMCL__MULTIHYP_HPP_
#define MHAMCL__MULTIHYP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mhamcl/errors.hpp"
#include "mhamcl/filter.hpp"
#include "mhamcl/geometry.hpp"
#include "mhamcl/matcher.hpp"
#include "mhamcl/random.hpp"
#include "mhamcl/scan.hpp"

namespace mhamcl
{

struct MultiHypParams
{
  double destroy_below{0.25};
  double spawn_above{0.5};
  double merge_dist{0.5};
  double merge_yaw{0.3};
  std::size_t max_hypotheses{5};
  double quality_alpha{0.5};  // 1 disables smoothing
  bool spawn_only_when_empty{false};

  double predict_hz{100.0};
  double correct_hz{10.0};
  double reseed_hz{0.3};
  double match_period{5.0};
  double stall_timeout{1.0};

  void validate() const
  {
    if (!(destroy_below >= 0.0 && destroy_below <= 1.0)) {
      throw ParameterError("multihyp.destroy_below must lie in [0,1]");
    }
    if (!(spawn_above >= 0.0 && spawn_above <= 1.0)) {
      throw ParameterError("multihyp.spawn_above must lie in [0,1]");
    }
    if (!(merge_dist > 0.0)) {
      throw ParameterError("multihyp.merge_dist must be positive");
    }
    if (!(merge_yaw > 0.0)) {
      throw ParameterError("multihyp.merge_yaw must be positive");
    }
    if (max_hypotheses < 1) {
      throw ParameterError("multihyp.max_hypotheses must be >= 1");
    }
    if (!(quality_alpha > 0.0 && quality_alpha <= 1.0)) {
      throw ParameterError("multihyp.quality_alpha must lie in (0,1]");
    }
    if (!(predict_hz > 0.0)) {throw ParameterError("multihyp.predict_hz must be positive");}
    if (!(correct_hz > 0.0)) {throw ParameterError("multihyp.correct_hz must be positive");}
    if (!(reseed_hz > 0.0)) {throw ParameterError("multihyp.reseed_hz must be positive");}
    if (!(match_period > 0.0)) {throw ParameterError("multihyp.match_period must be positive");}
    if (!(stall_timeout > 0.0)) {throw ParameterError("multihyp.stall_timeout must be positive");}
  }
};

struct FilterConfig
{
  ParticleBounds bounds{100, 1000};
  std::size_t initial_particles{300};
  PoseStd initial_std{0.1, 0.1, 0.05};
  PoseStd spawn_std{0.05, 0.05, 0.05};
  MotionNoiseParams noise;
  ReseedParams reseed;
  AdaptParams adapt;

  void validate() const
  {
    if (bounds.min < 1 || bounds.min > bounds.max) {
      throw ParameterError("filter.particles_min must be >= 1 and <= filter.particles_max");
    }
    if (!bounds.contains(initial_particles)) {
      throw ParameterError("filter.initial_particles must lie in [particles_min, particles_max]");
    }
    for (const PoseStd * s : {&initial_std, &spawn_std}) {
      if (s->x < 0.0 || s->y < 0.0 || s->yaw < 0.0) {
        throw ParameterError("filter.initial_std and filter.spawn_std must be >= 0");
      }
    }
    noise.validate();
    reseed.validate();
    adapt.validate();
  }
};

struct LocalizerConfig
{
  FilterConfig filter;
  SensorModelParams sensor;
  MatcherParams matcher;
  MultiHypParams multihyp;
  Transform2D base_to_laser;

  void validate() const
  {
    filter.validate();
    sensor.validate();
    matcher.validate();
    multihyp.validate();
  }
};

/// One particle population competing to be the system output.
struct Hypothesis
{
  long id{0};
  ParticleSet set;
  double quality{0.0};
  bool has_quality{false};
  double created_at{0.0};
};

class HypothesisSet
{
public:
  explicit HypothesisSet(MultiHypParams params)
  : params_(std::move(params)) {}

  const MultiHypParams & params() const {return params_;}
  MultiHypParams & params() {return params_;}

  std::vector<Hypothesis> & hypotheses() {return hypotheses_;}
  const std::vector<Hypothesis> & hypotheses() const {return hypotheses_;}

  std::size_t size() const {return hypotheses_.size();}
  bool empty() const {return hypotheses_.empty();}

  Hypothesis & add(ParticleSet set, double created_at)
  {
    hypotheses_.push_back(Hypothesis{next_id_++, std::move(set), 0.0, false, created_at});
    return hypotheses_.back();
  }

private:
  MultiHypParams params_;
  std::vector<Hypothesis> hypotheses_;
  long next_id_{0};
};

/// One hypothesis around a known initial pose, or none when it is unknown.
inline HypothesisSet start(
  const std::optional<Transform2D> & initial_pose, const LocalizerConfig & config, Rng & rng,
  double stamp = 0.0)
{
  HypothesisSet hs(config.multihyp);
  if (initial_pose) {
    hs.add(
      init_gaussian(
        *initial_pose, config.filter.initial_std, config.filter.initial_particles,
        config.filter.bounds, rng, stamp),
      stamp);
  }
  return hs;
}

inline bool poses_close(const Transform2D & a, const Transform2D & b, const MultiHypParams & p)
{
  return std::hypot(a.x() - b.x(), a.y() - b.y()) < p.merge_dist &&
         std::fabs(angle_diff(a.yaw(), b.yaw())) < p.merge_yaw;
}

/// Exponential smoothing of the per-correction quality; the first value is
/// taken as is.
inline void update_quality(Hypothesis & h, double raw, double alpha)
{
  h.quality = h.has_quality ? alpha * raw + (1.0 - alpha) * h.quality : raw;
  h.has_quality = true;
}

/// Spawns a hypothesis at every good candidate that is not already covered,
/// while capacity remains. Candidates must be sorted by score. Returns the
/// number spawned.
inline std::size_t on_match_results(
  HypothesisSet & hs, std::span<const MatchCandidate> candidates, const FilterConfig & filter,
  Rng & rng, double stamp)
{
  const MultiHypParams & p = hs.params();
  std::size_t spawned = 0;
  for (const MatchCandidate & c : candidates) {
    if (hs.size() >= p.max_hypotheses) {
      break;
    }
    if (p.spawn_only_when_empty && !hs.empty()) {
      break;
    }
    if (c.score < p.spawn_above) {
      continue;
    }
    const bool covered = std::any_of(
      hs.hypotheses().begin(), hs.hypotheses().end(),
      [&](const Hypothesis & h) {return poses_close(estimate(h.set).mean, c.pose, p);});
    if (covered) {
      continue;
    }
    hs.add(
      init_gaussian(
        c.pose, filter.spawn_std, filter.initial_particles, filter.bounds, rng, stamp),
      stamp);
    ++spawned;
  }
  return spawned;
}

/// Drops hypotheses whose quality fell below destroy_below. The last one
/// standing is always kept (the best, if every hypothesis is below).
inline void prune(HypothesisSet & hs)
{
  auto & hyps = hs.hypotheses();
  if (hyps.size() <= 1) {
    return;
  }
  const double floor = hs.params().destroy_below;
  auto is_bad = [floor](const Hypothesis & h) {return h.has_quality && h.quality < floor;};
  if (std::all_of(hyps.begin(), hyps.end(), is_bad)) {
    auto keep = std::max_element(
      hyps.begin(), hyps.end(), [](const Hypothesis & a, const Hypothesis & b) {
        return a.quality < b.quality || (a.quality == b.quality && a.id > b.id);
      });
    Hypothesis survivor = std::move(*keep);
    hyps.clear();
    hyps.push_back(std::move(survivor));
    return;
  }
  std::erase_if(hyps, is_bad);
}

namespace detail
{

// Union of both populations, truncated to the larger one, keeping the
// heaviest particles. The higher-quality hypothesis keeps its identity.
inline Hypothesis merge_pair(Hypothesis a, Hypothesis b)
{
  const bool a_wins = a.quality > b.quality || (a.quality == b.quality && a.id < b.id);
  Hypothesis & keep = a_wins ? a : b;
  Hypothesis & other = a_wins ? b : a;
  const std::size_t target = std::max(keep.set.size(), other.set.size());
  std::vector<Particle> pool = std::move(keep.set.particles);
  pool.insert(pool.end(), other.set.particles.begin(), other.set.particles.end());
  sort_by_weight(pool);
  pool.resize(target);
  normalize_weights(pool);
  keep.set.particles = std::move(pool);
  keep.set.bounds.max = std::max(keep.set.bounds.max, target);
  keep.set.last_prediction_time = std::max(keep.set.last_prediction_time, other.set.last_prediction_time);
  keep.created_at = std::min(keep.created_at, other.created_at);
  return std::move(keep);
}

}  // namespace detail

/// Merges converged hypotheses pairwise until no pair lies within
/// (merge_dist, merge_yaw) of each other.
inline void merge(HypothesisSet & hs)
{
  auto & hyps = hs.hypotheses();
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Transform2D> means;
    means.reserve(hyps.size());
    for (const Hypothesis & h : hyps) {
      means.push_back(estimate(h.set).mean);
    }
    for (std::size_t i = 0; i < hyps.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < hyps.size() && !changed; ++j) {
        if (!poses_close(means[i], means[j], hs.params())) {
          continue;
        }
        Hypothesis merged = detail::merge_pair(std::move(hyps[i]), std::move(hyps[j]));
        hyps.erase(hyps.begin() + static_cast<std::ptrdiff_t>(j));
        hyps[i] = std::move(merged);
        changed = true;
      }
    }
  }
}

struct BestEstimate
{
  long id{0};
  double quality{0.0};
  PoseEstimate estimate;
};

/// Highest quality wins; ties go to the lowest (oldest) id.
inline std::optional<BestEstimate> best(const HypothesisSet & hs)
{
  const Hypothesis * winner = nullptr;
  for (const Hypothesis & h : hs.hypotheses()) {
    if (winner == nullptr || h.quality > winner->quality ||
      (h.quality == winner->quality && h.id < winner->id))
    {
      winner = &h;
    }
  }
  if (winner == nullptr) {
    return std::nullopt;
  }
  return BestEstimate{winner->id, winner->quality, estimate(winner->set)};
}

}  // namespace mhamcl

#endif  // MHAMCL__MULTIHYP_HPP_

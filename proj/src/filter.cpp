#include "gapf/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gapf/error.hpp"
#include "gapf/parallel.hpp"

namespace gapf {

void FilterConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kConfig, what);
  };
  require(particle_count >= 1, "filter.particles must be >= 1");
  require(diffusion.is_valid(), "filter diffusion sigmas must be >= 0");
  require(icp_iterations >= 1, "filter.icp_iterations must be >= 1");
  require(ess_threshold_fraction > 0.0 && ess_threshold_fraction <= 1.0, "filter.ess_threshold must be in (0, 1]");
  require(weight_blend > 0.0 && weight_blend < 1.0, "filter.weight_blend must be in (0, 1)");
  require(weight_temperature > 0.0, "filter.weight_temperature must be > 0");
  require(icp.max_correspondence_distance > 0.0, "icp.max_distance must be > 0");
  require(icp.sac.inlier_threshold > 0.0, "sac.inlier_threshold must be > 0");
  require(icp.sac.iterations >= 0, "sac.iterations must be >= 0");
  require(intrinsics.is_valid(), "camera intrinsics are invalid");
  require(penalty_factor > 0.0 && penalty_floor > 0.0, "penalty factor and floor must be > 0");
}

std::vector<double> normalized_probabilities(std::span<const Particle> particles, double temperature) {
  std::vector<double> q(particles.size());
  if (particles.empty()) return q;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& p : particles) lowest = std::min(lowest, p.weight);
  double sum = 0.0;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    q[i] = std::exp(-(particles[i].weight - lowest) / temperature);
    sum += q[i];
  }
  for (double& v : q) v /= sum;
  return q;
}

double effective_sample_size(std::span<const Particle> particles, double temperature) {
  const std::vector<double> q = normalized_probabilities(particles, temperature);
  double sum_sq = 0.0;
  for (double v : q) sum_sq += v * v;
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

std::vector<Particle> resample(std::span<const Particle> particles, Rng& rng, double temperature) {
  const std::size_t n = particles.size();
  std::vector<Particle> out;
  if (n == 0) return out;
  out.reserve(n);
  const std::vector<double> q = normalized_probabilities(particles, temperature);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& p : particles) lowest = std::min(lowest, p.weight);

  const double spacing = 1.0 / static_cast<double>(n);
  const double offset = std::uniform_real_distribution<double>(0.0, spacing)(rng);
  double cumulative = q[0];
  std::size_t src = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double target = offset + static_cast<double>(j) * spacing;
    while (target > cumulative && src + 1 < n) cumulative += q[++src];
    out.push_back({particles[src].view_pose, lowest});
  }
  return out;
}

std::size_t map_index(std::span<const Particle> particles) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < particles.size(); ++i) {
    if (particles[i].weight < particles[best].weight) best = i;
  }
  return best;
}

FilterState initialize(const PointCloud& observation, const Eigen::Vector3d& target, const FilterConfig& config,
                       Rng& rng) {
  if (observation.empty()) throw Error(ErrorCode::kEmptyObservation, "cannot initialize from an empty observation");
  config.validate();
  const double radius = mean_distance(observation);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);

  FilterState state;
  state.particles.reserve(config.particle_count);
  for (std::size_t i = 0; i < config.particle_count; ++i) {
    Eigen::Vector3d dir;
    do {
      dir = Eigen::Vector3d(normal(rng), normal(rng), normal(rng));
    } while (dir.squaredNorm() < 1e-12);
    dir.normalize();
    const double roll = angle(rng);
    state.particles.push_back({look_at(target + radius * dir, target, roll), 0.0});
  }
  state.map_index = 0;
  state.map_estimate = state.particles.front().view_pose;
  state.ess = static_cast<double>(config.particle_count);
  return state;
}

FilterState step(FilterState state, const PointCloud& observation, const Pose& control_input,
                 const SampledModel& model, const FilterConfig& config, Rng& rng, StageTimes* timing) {
  if (observation.empty()) throw Error(ErrorCode::kEmptyObservation, "empty observation in filter step");
  if (state.particles.empty()) throw Error(ErrorCode::kConfig, "filter state has no particles");
  const std::uint64_t frame_seed = rng();
  const std::size_t n = state.particles.size();

  state.resampled = false;
  const double ess = effective_sample_size(state.particles, config.weight_temperature);
  if (ess < config.ess_threshold_fraction * static_cast<double>(n)) {
    const auto start = std::chrono::steady_clock::now();
    Rng resample_rng = make_stream(frame_seed, StreamTag::kResample, 0);
    state.particles = resample(state.particles, resample_rng, config.weight_temperature);
    ++state.resample_count;
    state.resampled = true;
    if (timing) timing->resample += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  const ObservationIndex index(observation);
  std::vector<double> errors(n);
  std::vector<StageTimes> times(timing ? n : 0);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    Rng prng = make_stream(frame_seed, StreamTag::kParticle, i);
    Particle& p = state.particles[i];
    Pose pose = compose(p.view_pose, control_input);
    pose = perturb(pose, config.diffusion, prng);
    const AlignmentResult aligned = icp_refine(index, model, pose, config.intrinsics, config.icp_iterations,
                                               config.icp, prng, timing ? &times[i] : nullptr);
    p.view_pose = aligned.lost_track ? pose : aligned.transform;
    errors[i] = aligned.overlap_scaled_error;
  });

  double worst = 0.0;
  for (double e : errors) {
    if (std::isfinite(e)) worst = std::max(worst, e);
  }
  const double penalty = std::max(config.penalty_floor, config.penalty_factor * worst);
  state.lost_particles = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = errors[i];
    if (!std::isfinite(e)) {
      e = penalty;
      ++state.lost_particles;
    }
    state.particles[i].weight = blend_weight(state.particles[i].weight, e, config.weight_blend);
  }
  if (timing) {
    for (const auto& t : times) *timing += t;
  }

  state.map_index = map_index(state.particles);
  state.map_estimate = state.particles[state.map_index].view_pose;
  state.map_weight = state.particles[state.map_index].weight;
  state.ess = effective_sample_size(state.particles, config.weight_temperature);
  ++state.frame_index;
  return state;
}

}  // namespace gapf

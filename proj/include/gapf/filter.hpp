#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gapf/point_cloud.hpp"
#include "gapf/random.hpp"
#include "gapf/registration.hpp"
#include "gapf/se3.hpp"
#include "gapf/viewgen.hpp"

namespace gapf {

/// A pose hypothesis. The weight is an accumulated log-space error
/// (m^2, lower is better), not a probability.
struct Particle {
  Pose view_pose;  // camera pose in the object frame
  double weight = 0;
};

struct FilterConfig {
  std::size_t particle_count = 200;
  PerturbationScale diffusion{Eigen::Vector3d::Constant(0.005), Eigen::Vector3d::Constant(M_PI / 180.0)};
  int icp_iterations = 3;
  double ess_threshold_fraction = 0.5;
  double weight_blend = 0.5;
  /// Scale (m^2) dividing weight differences before they become
  /// probabilities for ESS and resampling.
  double weight_temperature = 1.0;
  IcpParams icp;
  CameraIntrinsics intrinsics;
  /// Lost particles score penalty_factor x the worst finite error of the
  /// frame, at least penalty_floor (m^2).
  double penalty_factor = 10.0;
  double penalty_floor = 1.0;
  /// Worker threads for the per-particle update; never changes results.
  unsigned jobs = 1;

  /// Throws Error(kConfig) on violated invariants.
  void validate() const;
};

struct FilterState {
  std::vector<Particle> particles;
  std::size_t frame_index = 0;
  Pose map_estimate;
  std::size_t map_index = 0;
  double map_weight = 0;
  double ess = 0;  // after the latest weight update
  std::size_t resample_count = 0;
  bool resampled = false;  // during the latest step
  std::size_t lost_particles = 0;
};

/// Places config.particle_count viewing poses uniformly on the sphere centred
/// at `target` (object frame) with radius equal to the mean observation
/// distance, each looking at `target` with a uniformly random roll. Weights
/// start at 0. Throws Error(kEmptyObservation).
FilterState initialize(const PointCloud& observation, const Eigen::Vector3d& target, const FilterConfig& config,
                       Rng& rng);

/// One filter frame: resample when ESS < threshold * N; then, per particle,
/// propagate by `control_input`, diffuse, render, ICP-refine and score
/// w <- blend * (w + error); finally pick the minimum-weight particle.
/// Per-particle randomness comes from streams keyed on (draw from rng,
/// particle index), so results do not depend on config.jobs.
FilterState step(FilterState state, const PointCloud& observation, const Pose& control_input,
                 const SampledModel& model, const FilterConfig& config, Rng& rng, StageTimes* timing = nullptr);

/// q_i proportional to exp(-(w_i - min_j w_j) / temperature), normalized.
std::vector<double> normalized_probabilities(std::span<const Particle> particles, double temperature = 1.0);
/// 1 / sum q_i^2.
double effective_sample_size(std::span<const Particle> particles, double temperature = 1.0);
/// Systematic resampling over normalized_probabilities; survivors take the
/// pre-resample minimum weight.
std::vector<Particle> resample(std::span<const Particle> particles, Rng& rng, double temperature = 1.0);
/// Lowest weight; ties go to the lowest index.
std::size_t map_index(std::span<const Particle> particles);

inline double blend_weight(double weight, double error, double blend) { return blend * (weight + error); }

}  // namespace gapf

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skillrrt/domain.hpp"

namespace skillrrt {

struct Problem {
  State s0;
  Pose goal;
  std::string start_class;
  std::string goal_class;
};

/// Stable-pose class "region/pair"; pair = roll_index * n_pitches + pitch_index.
struct PoseClass {
  std::size_t region = 0;
  std::size_t roll_index = 0;
  std::size_t pitch_index = 0;
};

PoseClass ParsePoseClass(const Domain& domain, const std::string& text);
std::string FormatPoseClass(const Domain& domain, const PoseClass& c);
/// Class of a pose, if it lies in any region.
std::optional<PoseClass> ClassOf(const Domain& domain, const Pose& pose);

/// Uniform x, y, yaw inside the class's region with the class's roll/pitch.
Pose SampleClassPose(const Domain& domain, const PoseClass& c, Rng& rng);

/// Stationary robot configuration away from the object, by rejection sampling
/// of tool positions inside the reach ball. Throws ConfigError if none is found.
RobotConfig SampleRobotConfig(const Domain& domain, const Pose& q_obj, Rng& rng);

/// Problem i draws start and goal from distinct classes of the domain's
/// problem spec using the stream DeriveSeed(seed, i).
Problem GenerateProblem(const Domain& domain, std::uint64_t seed, std::size_t index);
std::vector<Problem> GenerateProblems(const Domain& domain, std::size_t count, std::uint64_t seed);

}  // namespace skillrrt

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "skillrrt/random.hpp"

namespace skillrrt {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDefaultAlpha = 0.1;

/// Rigid transform in SE(3). The quaternion is kept unit-norm with w >= 0.
class Pose {
 public:
  Pose();
  Pose(const Vec3& position, const Quat& orientation);

  static Pose Identity() { return Pose(); }
  static Pose FromTranslation(const Vec3& t);
  /// Stores an already canonical quaternion bit-for-bit (deserialization).
  /// Throws InvalidArgument unless |q| is within 1e-9 of 1 and w >= 0.
  static Pose FromCanonical(const Vec3& position, const Quat& orientation);
  /// Orientation Rz(yaw) * Ry(pitch) * Rx(roll).
  static Pose FromXyzRpy(const Vec3& t, double roll, double pitch, double yaw);

  const Vec3& position() const { return position_; }
  const Quat& orientation() const { return orientation_; }
  Mat3 rotation() const { return orientation_.toRotationMatrix(); }

  Pose Compose(const Pose& rhs) const;
  Pose Inverse() const;
  Vec3 Transform(const Vec3& p) const;
  bool IsFinite() const;

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position_ == b.position_ && a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  Vec3 position_;
  Quat orientation_;
};

Quat RpyToQuat(double roll, double pitch, double yaw);

/// Geodesic rotation angle between two orientations, in [0, pi].
double RotationAngle(const Quat& a, const Quat& b);

/// Euclidean position distance plus alpha times geodesic rotation angle.
/// Throws InvalidArgument on non-finite input or negative alpha.
double Se3Distance(const Pose& a, const Pose& b, double alpha = kDefaultAlpha);

using Keypoints = std::array<Vec3, 8>;

class KeypointTemplate {
 public:
  explicit KeypointTemplate(std::vector<Vec3> points);
  /// Box corners spanning [-half, half] on each axis, ordered by bit pattern
  /// (x varies fastest).
  static KeypointTemplate Box(const Vec3& half_extents, const Vec3& center = Vec3::Zero());

  const Keypoints& points() const { return points_; }

 private:
  Keypoints points_;
};

Keypoints KeypointsOf(const Pose& pose, const KeypointTemplate& tmpl);
Keypoints TransformPoints(const Pose& pose, const Keypoints& points);
/// Stacked L2 norm over all eight point differences (a 24-vector norm).
double KeypointDistance(const Keypoints& a, const Keypoints& b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool Contains(double v, double tol) const { return v >= lo - tol && v <= hi + tol; }
};

/// Yaw interval stored as (start, width); wraps around 2*pi.
struct YawInterval {
  double start = 0.0;
  double width = 0.0;
  bool Contains(double yaw, double tol) const;
};

/// Blocked half-space {p : normal . p < offset} in world coordinates.
struct HalfSpace {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  bool Blocks(const Vec3& p) const { return normal.dot(p) < offset; }
};

/// Coordinates of a pose expressed in a region frame, with the matched
/// admissible (roll, pitch) pair.
struct RegionCoords {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  std::size_t roll_index = 0;
  std::size_t pitch_index = 0;
};

/// Stable-pose region: planar box in a region frame with a fixed height,
/// yaw interval and a finite set of admissible roll/pitch values.
struct Region {
  std::string id;
  Pose frame;
  Interval x;
  Interval y;
  YawInterval yaw;
  double fixed_z = 0.0;
  std::vector<double> rolls{0.0};
  std::vector<double> pitches{0.0};
  std::vector<HalfSpace> blocked;

  /// Throws ConfigError when bounds are inverted or the angle sets are empty.
  void Validate() const;
  Pose PoseAt(double x, double y, double yaw, double roll, double pitch) const;
};

std::optional<RegionCoords> DecomposeInRegion(const Region& region, const Pose& pose, double tol);
bool RegionContains(const Region& region, const Pose& pose, double tol);
Pose SamplePose(const Region& region, Rng& rng);

/// Wraps an angle to (-pi, pi].
double WrapAngle(double a);

}  // namespace skillrrt

#include "skillrrt/geometry.hpp"

#include <cmath>

#include "skillrrt/error.hpp"

namespace skillrrt {

namespace {

Quat Canonical(Quat q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

constexpr double kTwoPi = 2.0 * kPi;

}  // namespace

Pose::Pose() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}

Pose::Pose(const Vec3& position, const Quat& orientation)
    : position_(position), orientation_(Canonical(orientation)) {}

Pose Pose::FromCanonical(const Vec3& position, const Quat& orientation) {
  if (!position.allFinite() || !orientation.coeffs().allFinite() ||
      std::abs(orientation.norm() - 1.0) > 1e-9 || orientation.w() < 0.0) {
    throw InvalidArgument("pose: quaternion must be unit-norm with w >= 0");
  }
  Pose p;
  p.position_ = position;
  p.orientation_ = orientation;
  return p;
}

Pose Pose::FromTranslation(const Vec3& t) { return Pose(t, Quat::Identity()); }

Pose Pose::FromXyzRpy(const Vec3& t, double roll, double pitch, double yaw) {
  return Pose(t, RpyToQuat(roll, pitch, yaw));
}

Pose Pose::Compose(const Pose& rhs) const {
  return Pose(position_ + orientation_ * rhs.position_, orientation_ * rhs.orientation_);
}

Pose Pose::Inverse() const {
  const Quat inv = orientation_.conjugate();
  return Pose(-(inv * position_), inv);
}

Vec3 Pose::Transform(const Vec3& p) const { return orientation_ * p + position_; }

bool Pose::IsFinite() const {
  return position_.allFinite() && orientation_.coeffs().allFinite();
}

Quat RpyToQuat(double roll, double pitch, double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()));
}

double RotationAngle(const Quat& a, const Quat& b) {
  const Quat rel = a.conjugate() * b;
  // atan2 form stays accurate for both tiny and near-pi angles.
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

double Se3Distance(const Pose& a, const Pose& b, double alpha) {
  if (!a.IsFinite() || !b.IsFinite() || !std::isfinite(alpha)) {
    throw InvalidArgument("se3_distance: non-finite input");
  }
  if (alpha < 0.0) throw InvalidArgument("se3_distance: alpha must be >= 0");
  return (a.position() - b.position()).norm() +
         alpha * RotationAngle(a.orientation(), b.orientation());
}

KeypointTemplate::KeypointTemplate(std::vector<Vec3> points) {
  if (points.size() != 8) {
    throw InvalidArgument("keypoint template needs exactly 8 points, got " +
                          std::to_string(points.size()));
  }
  for (std::size_t i = 0; i < 8; ++i) {
    if (!points[i].allFinite()) throw InvalidArgument("keypoint template: non-finite point");
    points_[i] = points[i];
  }
}

KeypointTemplate KeypointTemplate::Box(const Vec3& half, const Vec3& center) {
  std::vector<Vec3> pts;
  pts.reserve(8);
  for (int i = 0; i < 8; ++i) {
    pts.emplace_back(center.x() + ((i & 1) ? half.x() : -half.x()),
                     center.y() + ((i & 2) ? half.y() : -half.y()),
                     center.z() + ((i & 4) ? half.z() : -half.z()));
  }
  return KeypointTemplate(std::move(pts));
}

Keypoints KeypointsOf(const Pose& pose, const KeypointTemplate& tmpl) {
  return TransformPoints(pose, tmpl.points());
}

Keypoints TransformPoints(const Pose& pose, const Keypoints& points) {
  if (!pose.IsFinite()) throw InvalidArgument("keypoints_of: non-finite pose");
  const Mat3 r = pose.rotation();
  Keypoints out;
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = r * points[i] + pose.position();
  return out;
}

double KeypointDistance(const Keypoints& a, const Keypoints& b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sq);
}

double WrapAngle(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - kPi;
}

bool YawInterval::Contains(double yaw, double tol) const {
  if (width >= kTwoPi - tol) return true;
  double d = std::fmod(yaw - start, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d <= width + tol || d >= kTwoPi - tol;
}

void Region::Validate() const {
  if (id.empty()) throw ConfigError("region id must not be empty");
  if (x.lo > x.hi || y.lo > y.hi) throw ConfigError("region '" + id + "': inverted interval");
  if (yaw.width < 0.0 || yaw.width > kTwoPi + 1e-12) {
    throw ConfigError("region '" + id + "': yaw width must lie in [0, 2pi]");
  }
  if (rolls.empty() || pitches.empty()) {
    throw ConfigError("region '" + id + "': admissible roll/pitch sets must be non-empty");
  }
  if (!frame.IsFinite() || !std::isfinite(fixed_z)) {
    throw ConfigError("region '" + id + "': non-finite frame");
  }
}

Pose Region::PoseAt(double px, double py, double pyaw, double roll, double pitch) const {
  return frame.Compose(Pose::FromXyzRpy(Vec3(px, py, fixed_z), roll, pitch, pyaw));
}

std::optional<RegionCoords> DecomposeInRegion(const Region& region, const Pose& pose, double tol) {
  if (!pose.IsFinite()) return std::nullopt;
  const Pose local = region.frame.Inverse().Compose(pose);
  const Vec3& p = local.position();
  if (!region.x.Contains(p.x(), tol) || !region.y.Contains(p.y(), tol) ||
      std::abs(p.z() - region.fixed_z) > tol) {
    return std::nullopt;
  }
  const Mat3 r = local.rotation();
  for (std::size_t ri = 0; ri < region.rolls.size(); ++ri) {
    for (std::size_t pi = 0; pi < region.pitches.size(); ++pi) {
      const double roll = region.rolls[ri];
      const double pitch = region.pitches[pi];
      const Mat3 base = (Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                         Eigen::AngleAxisd(roll, Vec3::UnitX()))
                            .toRotationMatrix();
      // Residual must be a pure rotation about z.
      const Mat3 residual = r * base.transpose();
      const Vec3 z_axis = residual.col(2);
      const double tilt = std::atan2(z_axis.head<2>().norm(), z_axis.z());
      if (tilt > tol) continue;
      const double yaw = std::atan2(residual(1, 0), residual(0, 0));
      if (!region.yaw.Contains(yaw, tol)) continue;
      return RegionCoords{p.x(), p.y(), p.z(), roll, pitch, yaw, ri, pi};
    }
  }
  return std::nullopt;
}

bool RegionContains(const Region& region, const Pose& pose, double tol) {
  if (tol < 0.0) throw InvalidArgument("region_contains: tol must be >= 0");
  return DecomposeInRegion(region, pose, tol).has_value();
}

Pose SamplePose(const Region& region, Rng& rng) {
  const double x = UniformIn(rng, region.x.lo, region.x.hi);
  const double y = UniformIn(rng, region.y.lo, region.y.hi);
  const double yaw = WrapAngle(region.yaw.start + UniformIn(rng, 0.0, region.yaw.width));
  const double roll = region.rolls[region.rolls.size() == 1 ? 0 : UniformIndex(rng, region.rolls.size())];
  const double pitch =
      region.pitches[region.pitches.size() == 1 ? 0 : UniformIndex(rng, region.pitches.size())];
  return region.PoseAt(x, y, yaw, roll, pitch);
}

}  // namespace skillrrt

#pragma once

// Independent reference computations used as expected values in tests. They
// work from raw numbers (explicit matrices, closed forms, graph search) and
// never call the library routine they check.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <vector>

#include "skillrrt/domain.hpp"
#include "skillrrt/domain_io.hpp"

namespace oracle {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline Mat3 Rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}
inline Mat3 Ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Mat3 Rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}

/// Rotation matrix from a unit quaternion written out component by component.
inline Mat3 QuatMatrix(double w, double x, double y, double z) {
  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return m;
}

/// Geodesic angle from explicit rotation matrices: arccos((tr(R1^T R2) - 1) / 2).
inline double MatrixAngle(const Mat3& r1, const Mat3& r2) {
  const double c = std::clamp(((r1.transpose() * r2).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

/// Translation distance plus alpha times the matrix-derived rotation angle.
inline double Se3(const Vec3& t1, const Mat3& r1, const Vec3& t2, const Mat3& r2, double alpha) {
  return (t1 - t2).norm() + alpha * MatrixAngle(r1, r2);
}

/// Roll/pitch/yaw of R = Rz(yaw) Ry(pitch) Rx(roll), away from gimbal lock.
inline std::array<double, 3> Rpy(const Mat3& r) {
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

inline double AngleDiff(double a, double b) {
  double d = std::fmod(a - b, 2 * M_PI);
  if (d > M_PI) d -= 2 * M_PI;
  if (d < -M_PI) d += 2 * M_PI;
  return std::abs(d);
}

inline double ExpPotential(double e0, double e1, double d_prev, double d_curr) {
  return e0 * std::exp(-e1 * d_curr) - e0 * std::exp(-e1 * d_prev);
}

inline double RationalPotential(double e0, double e1, double d_prev, double d_curr) {
  return e0 / (d_curr + e1) - e0 / (d_prev + e1);
}

/// Closed-form push per connector step: gain * max(0, 1 - d / radius).
inline double Push(double d, double radius, double gain) {
  if (radius <= 0.0) return 0.0;
  return gain * std::max(0.0, 1.0 - d / radius);
}

/// Standard error of a Bernoulli mean.
inline double BernoulliSe(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

/// Grasp point world position for a card lying flat at (x, y, z) with the
/// given roll (0 or pi) and yaw, for a template offset given in the card frame.
inline Vec3 CardGraspPoint(const Vec3& center, double roll, double yaw, const Vec3& offset) {
  return center + Rz(yaw) * Rx(roll) * offset;
}

/// Analytic grasp feasibility for the card domain: inside the reach ball and
/// not under any blocked half-space {n . p < c} of the table.
struct CardGeometry {
  Vec3 reach_center;
  double reach_radius = 0.0;
  std::vector<std::pair<Vec3, double>> blocked;
  std::vector<Vec3> offsets;
  double z = 0.0;

  static CardGeometry From(const skillrrt::Domain& d) {
    CardGeometry g;
    g.reach_center = d.grasp_model.reach_center;
    g.reach_radius = d.grasp_model.reach_radius;
    for (const auto& h : d.regions.at(0).blocked) g.blocked.emplace_back(h.normal, h.offset);
    for (const auto& t : d.grasp_model.templates) g.offsets.push_back(t.offset.position());
    g.z = d.regions.at(0).fixed_z;
    return g;
  }

  bool Feasible(double x, double y, double roll, double yaw, std::size_t j) const {
    const Vec3 p = CardGraspPoint(Vec3(x, y, z), roll, yaw, offsets[j]);
    if ((p - reach_center).norm() > reach_radius) return false;
    for (const auto& [n, c] : blocked) {
      if (n.dot(p) < c) return false;
    }
    return true;
  }

  std::set<std::size_t> FeasibleSet(double x, double y, double roll, double yaw) const {
    std::set<std::size_t> s;
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      if (Feasible(x, y, roll, yaw, j)) s.insert(j);
    }
    return s;
  }
};

/// Breadth-first search over a discretised (x cell, y cell, yaw cell, face)
/// graph of the card domain. Slides connect cells with the same face; a flip
/// connects two cells whose cell-centre poses share a feasible grasp. The
/// exact start and goal poses are added as two extra cells.
class CardBfs {
 public:
  CardBfs(const skillrrt::Domain& d, int nx = 5, int ny = 46, int nyaw = 16)
      : geo_(CardGeometry::From(d)), region_(d.regions.at(0)), nx_(nx), ny_(ny), nyaw_(nyaw) {}

  struct Cell {
    double x, y, roll, yaw;
    int face;
  };

  bool Solvable(const Cell& start, const Cell& goal) const {
    std::vector<Cell> cells{start, goal};
    for (int f = 0; f < 2; ++f) {
      for (int i = 0; i < nx_; ++i) {
        for (int j = 0; j < ny_; ++j) {
          for (int k = 0; k < nyaw_; ++k) {
            const double x = region_.x.lo + (i + 0.5) * (region_.x.hi - region_.x.lo) / nx_;
            const double y = region_.y.lo + (j + 0.5) * (region_.y.hi - region_.y.lo) / ny_;
            const double yaw = region_.yaw.start + (k + 0.5) * region_.yaw.width / nyaw_;
            cells.push_back({x, y, f == 0 ? 0.0 : M_PI, yaw, f});
          }
        }
      }
    }
    std::vector<std::set<std::size_t>> grasps(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      grasps[c] = geo_.FeasibleSet(cells[c].x, cells[c].y, cells[c].roll, cells[c].yaw);
    }
    // Edges are implied by shared face or shared grasp index, so each group is
    // expanded at most once.
    std::vector<std::vector<std::size_t>> by_face(2), by_grasp(geo_.offsets.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      by_face[cells[c].face].push_back(c);
      for (std::size_t g : grasps[c]) by_grasp[g].push_back(c);
    }
    std::vector<bool> seen(cells.size(), false), face_done(2, false), grasp_done(by_grasp.size(), false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    const auto visit = [&](const std::vector<std::size_t>& group) {
      for (std::size_t b : group) {
        if (!seen[b]) {
          seen[b] = true;
          queue.push_back(b);
        }
      }
    };
    while (!queue.empty()) {
      const std::size_t a = queue.front();
      queue.pop_front();
      if (a == 1) return true;
      if (!face_done[cells[a].face]) {
        face_done[cells[a].face] = true;
        visit(by_face[cells[a].face]);
      }
      for (std::size_t g : grasps[a]) {
        if (!grasp_done[g]) {
          grasp_done[g] = true;
          visit(by_grasp[g]);
        }
      }
    }
    return false;
  }

 private:
  CardGeometry geo_;
  skillrrt::Region region_;
  int nx_, ny_, nyaw_;
};

inline skillrrt::DomainBundle Builtin(const std::string& name) {
  return skillrrt::LoadDomainText(skillrrt::BuiltinDomainText(name));
}

}  // namespace oracle

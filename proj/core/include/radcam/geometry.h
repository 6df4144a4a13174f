/* Copyright 2026 The Radcam Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef RADCAM_GEOMETRY_H_
#define RADCAM_GEOMETRY_H_

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "radcam/errors.h"

// Ego frame: x forward, y left, z up. Azimuth is measured from +x toward +y.
// Camera frame: x right, y down, z along the optical axis.

namespace radcam {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr double kPi = 3.14159265358979323846;

// Maps into (-pi, pi].
double WrapAngle(double angle);

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 Apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 Rotate(const Vec3& v) const { return rotation * v; }
  // Throws GeometryError unless the rotation is orthonormal within 1e-9.
  void Validate() const;

  static RigidTransform FromYawTranslation(double yaw, const Vec3& translation);
};

struct CameraModel {
  Mat3 intrinsics = Mat3::Identity();
  RigidTransform ego_to_camera;
  int image_width = 0;
  int image_height = 0;
  // Feature-map pixels per image pixel, one entry per pyramid level.
  std::vector<double> feature_scale;

  void Validate() const;

  // Camera looking along ego yaw `yaw` from `mount` with a horizontal field
  // of view `hfov` (radians).
  static CameraModel Looking(double yaw, const Vec3& mount, int width, int height, double hfov,
                             std::vector<double> feature_scale);
};

constexpr double kMinProjectionDepth = 0.1;

struct CameraHit {
  int camera = 0;
  Vec2 uv = Vec2::Zero();
  double depth = 0;
  bool valid = false;
};

// One hit per camera. Validity is judged in image pixels; uv is reported in
// feature pixels of `level`, or in image pixels when level < 0.
std::vector<CameraHit> ProjectToCameras(const Vec3& point, std::span<const CameraModel> cams,
                                        int level = -1);

struct BevGridSpec {
  double x_min = -32.0;
  double x_max = 32.0;
  double y_min = -32.0;
  double y_max = 32.0;
  double resolution = 0.5;
  int channels = 64;

  // Rows run along x, columns along y.
  int rows() const;
  int cols() const;
  // Extents must divide into whole cells; the size floor (>= 8) is skipped
  // when `enforce_min_size` is false, for tiny test grids.
  void Validate(bool enforce_min_size = true) const;
  Vec2 CellCenter(int row, int col) const;
  bool Contains(const Vec2& xy) const;
};

struct BevCell {
  int row = 0;
  int col = 0;
  bool operator==(const BevCell&) const = default;
};

// Floor-quantized cell; nullopt outside the half-open extent.
std::optional<BevCell> BevCellOf(const Vec2& xy, const BevGridSpec& spec);

struct PolarCoord {
  double range = 0;
  double azimuth = 0;
};

PolarCoord ToPolar(const Vec2& xy);
Vec2 FromPolar(const PolarCoord& polar);

struct VelocityParts {
  Vec2 tangential = Vec2::Zero();
  Vec2 radial = Vec2::Zero();
};

// Splits v into components along and across the line of sight to `center`.
// Throws GeometryError when |center| < 1e-6 m.
VelocityParts DecomposeVelocity(const Vec2& velocity, const Vec2& center);

}  // namespace radcam

#endif  // RADCAM_GEOMETRY_H_

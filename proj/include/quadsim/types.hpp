#pragma once

#include <Eigen/Dense>

namespace quadsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kGravity = 9.81;  // m/s^2

inline Vec3 e3() { return Vec3::UnitZ(); }

// Full rigid-body state. R is the body-to-inertial rotation, omega is the
// angular velocity expressed in the body frame.
struct RigidBodyState {
  Vec3 r = Vec3::Zero();      // position, m
  Vec3 v = Vec3::Zero();      // velocity, m/s
  Mat3 R = Mat3::Identity();  // attitude, body -> inertial
  Vec3 omega = Vec3::Zero();  // body angular velocity, rad/s
};

}  // namespace quadsim

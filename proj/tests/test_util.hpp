#pragma once

#include <random>

#include "quadsim/so3.hpp"
#include "quadsim/types.hpp"

namespace quadsim::test {

inline Vec3 random_vec(std::mt19937& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Vec3 random_unit(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec3 v{g(rng), g(rng), g(rng)};
  while (v.norm() < 1e-6) v = Vec3{g(rng), g(rng), g(rng)};
  return v.normalized();
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::uniform_real_distribution<double> angle(-3.14, 3.14);
  return so3::exp(angle(rng) * random_unit(rng));
}

}  // namespace quadsim::test

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include "sambamixer/dataset/preprocess.hpp"
#include "sambamixer/dataset/synthetic.hpp"
#include "sambamixer/model/config.hpp"
#include "sambamixer/numerics/tensor.hpp"

namespace sambamixer::testing {

using numerics::Real;
using numerics::Tensor;

inline Tensor random_tensor(numerics::Shape shape, std::mt19937_64& rng, Real scale = 1) {
  std::uniform_real_distribution<Real> dist(-scale, scale);
  Tensor t(std::move(shape));
  for (Real& v : t.data()) v = dist(rng);
  return t;
}

inline model::ModelConfig tiny_config(std::size_t layers = 2, std::size_t d_model = 8, std::size_t samples = 8,
                                      std::size_t d_state = 4) {
  model::ModelConfig c;
  c.d_model = d_model;
  c.d_state = d_state;
  c.num_layers = layers;
  c.num_samples = samples;
  c.droppath_rate = 0;
  return c;
}

// Preprocessed synthetic batteries, small enough for unit tests.
inline std::vector<dataset::Battery> synthetic_batteries(const std::vector<int>& numbers, int cycles,
                                                         std::uint64_t seed = 1, Real sample_period = 60) {
  dataset::SyntheticOptions o;
  o.num_cycles = cycles;
  o.sample_period_s = sample_period;
  o.fault_probability = 0;
  return dataset::preprocess(dataset::synthesize_batteries(numbers, o, seed));
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("sambamixer_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace sambamixer::testing

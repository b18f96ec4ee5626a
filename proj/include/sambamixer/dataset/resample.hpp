// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "sambamixer/dataset/cycle.hpp"

namespace sambamixer::dataset {

enum class ResampleMode { kLinear, kRandom, kAnchor };

std::string to_string(ResampleMode mode);
// Accepts "linear", "random", "anchor". Throws ConfigError otherwise.
ResampleMode parse_resample_mode(const std::string& text);

// L equidistant times from min(S) to max(S), both included. Throws ParameterError for L < 2.
std::vector<Real> resample_linear(std::span<const Real> times, int length);

// L uniform draws from [min(S), max(S)], sorted ascending.
std::vector<Real> resample_random(std::span<const Real> times, int length, std::mt19937_64& rng);

// Linear anchors jittered by U[-f*w/2, f*w/2], w the anchor spacing and f the noise fraction.
// Results are clamped to [min(S), max(S)]. noise_fraction = 0 reproduces resample_linear.
std::vector<Real> resample_anchor(std::span<const Real> times, int length, std::mt19937_64& rng,
                                  Real noise_fraction = 1);

std::vector<Real> resample(ResampleMode mode, std::span<const Real> times, int length, std::mt19937_64& rng);

// Piecewise-linear interpolation of (knots, values) at the query points.
// Throws ParameterError if a query leaves [knots.front(), knots.back()].
std::vector<Real> interpolate(std::span<const Real> knots, std::span<const Real> values,
                              std::span<const Real> queries);

// Assembles the L x 4 input (I, V, T at the query times, then the times themselves).
ResampledCycle interpolate_cycle(const PreparedCycle& cycle, std::span<const Real> sample_times);

}  // namespace sambamixer::dataset

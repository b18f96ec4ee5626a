// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "sambamixer/dataset/canonical_io.hpp"
#include "sambamixer/dataset/normalize.hpp"
#include "sambamixer/dataset/preprocess.hpp"
#include "sambamixer/dataset/resample.hpp"
#include "sambamixer/dataset/splits.hpp"
#include "sambamixer/dataset/synthetic.hpp"
#include "sambamixer/error.hpp"
#include "test_support.hpp"

namespace sambamixer::dataset {
namespace {

DischargeCycle make_cycle(const std::string& id, int index, double start, Real capacity, std::size_t n = 5) {
  DischargeCycle c;
  c.battery_id = id;
  c.cycle_index = index;
  c.start_time = start;
  c.capacity_ah = capacity;
  for (std::size_t i = 0; i < n; ++i) {
    c.time.push_back(Real(10) * i);
    c.current.push_back(-2.0);
    c.voltage.push_back(4.2 - 0.1 * i);
    c.temperature.push_back(24 + 0.5 * i);
  }
  return c;
}

std::vector<Real> iota_times(int n) {
  std::vector<Real> s(n);
  std::iota(s.begin(), s.end(), Real{0});
  return s;
}

// ---- canonical io -----------------------------------------------------------------

GTEST_TEST(CanonicalIoTest, EmptyFileGivesEmptyList) {
  const auto dir = testing::scratch_dir("io_empty");
  std::ofstream(dir / "x.jsonl").close();
  EXPECT_TRUE(load_canonical(dir / "x.jsonl").empty());
}

GTEST_TEST(CanonicalIoTest, RoundTrip) {
  const auto dir = testing::scratch_dir("io_roundtrip");
  DischargeCycle c = make_cycle("B0005", 3, 1207141697.0, 1.8565);
  c.voltage[2] = 3.9876543210987654;
  write_canonical(dir / "b.jsonl", std::span<const DischargeCycle>(&c, 1));
  const auto back = load_canonical(dir / "b.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].battery_id, "B0005");
  EXPECT_EQ(back[0].cycle_index, 3);
  EXPECT_DOUBLE_EQ(back[0].start_time, c.start_time);
  EXPECT_EQ(back[0].capacity_ah, c.capacity_ah);
  EXPECT_EQ(back[0].voltage, c.voltage);
  EXPECT_EQ(back[0].current, c.current);
  EXPECT_EQ(back[0].temperature, c.temperature);
  EXPECT_EQ(back[0].time, c.time);
}

GTEST_TEST(CanonicalIoTest, DirectoryIsSortedByBatteryAndTime) {
  const auto dir = testing::scratch_dir("io_dir");
  std::vector<DischargeCycle> a{make_cycle("B0007", 0, 500, 1.8), make_cycle("B0007", 1, 100, 1.8)};
  std::vector<DischargeCycle> b{make_cycle("B0006", 0, 900, 2.0)};
  write_canonical(dir / "b7.jsonl", a);
  write_canonical(dir / "b6.jsonl", b);
  const auto all = load_canonical(dir);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].battery_id, "B0006");
  EXPECT_EQ(all[1].start_time, 100);
  EXPECT_EQ(all[2].start_time, 500);
}

GTEST_TEST(CanonicalIoTest, NonMonotonicTimeNamesTheCycle) {
  DischargeCycle c = make_cycle("B0018", 12, 0, 1.8);
  c.time[3] = c.time[2];
  try {
    parse_cycle_record(format_cycle_record(c), 4);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cycle 12"), std::string::npos) << msg;
    EXPECT_NE(msg.find("B0018"), std::string::npos) << msg;
    EXPECT_EQ(e.line(), 4u);
  }
}

GTEST_TEST(CanonicalIoTest, MalformedRecordsCarryLineNumbers) {
  const auto dir = testing::scratch_dir("io_bad");
  const DischargeCycle c = make_cycle("B0005", 0, 0, 1.8);
  std::ofstream(dir / "x.jsonl") << format_cycle_record(c) << "\n{not json\n";
  try {
    load_canonical(dir / "x.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_cycle_record(R"({"schema_version":"cycles-v1","battery_id":"B1"})"), ParseError);
}

GTEST_TEST(CanonicalIoTest, VersionMismatchIsAFormatError) {
  std::string text = format_cycle_record(make_cycle("B0005", 0, 0, 1.8));
  text.replace(text.find("cycles-v1"), 9, "cycles-v2");
  EXPECT_THROW(parse_cycle_record(text), FormatError);
}

GTEST_TEST(CanonicalIoTest, Iso8601) {
  EXPECT_EQ(parse_iso8601("1970-01-01T00:00:00Z"), 0.0);
  EXPECT_EQ(parse_iso8601("2008-04-02T13:08:17Z"), 1207141697.0);
  EXPECT_DOUBLE_EQ(parse_iso8601("2008-04-02T13:08:17.25Z"), 1207141697.25);
  EXPECT_EQ(format_iso8601(1207141697.0), "2008-04-02T13:08:17Z");
  EXPECT_THROW(parse_iso8601("yesterday"), ParseError);
}

// ---- preprocess -------------------------------------------------------------------

GTEST_TEST(SohLabelTest, Examples) {
  EXPECT_DOUBLE_EQ(soh_label(1.8565, 1.8565), 100.0);
  EXPECT_DOUBLE_EQ(soh_label(1.3, 2.0), 65.0);
  EXPECT_THROW(soh_label(1.0, 0.0), ParameterError);
  EXPECT_THROW(soh_label(1.0, -1.0), ParameterError);
}

GTEST_TEST(PreprocessTest, LargeDropIsRemoved) {
  std::vector<DischargeCycle> cycles;
  const Real soh[] = {100, 95, 80, 94};
  for (int k = 0; k < 4; ++k) cycles.push_back(make_cycle("B0005", k, 3600.0 * k, 2.0 * soh[k] / 100));
  PreprocessReport report;
  const auto out = preprocess(cycles, {}, &report);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].cycles.size(), 3u);
  EXPECT_DOUBLE_EQ(out[0].cycles[0].soh_pct, 100);
  EXPECT_DOUBLE_EQ(out[0].cycles[1].soh_pct, 95);
  EXPECT_DOUBLE_EQ(out[0].cycles[2].soh_pct, 94);
  EXPECT_EQ(out[0].cycles[2].cycle.cycle_index, 2);
  EXPECT_EQ(report.dropped_cycles, 1u);
}

GTEST_TEST(PreprocessTest, TrailingZeroCurrentIsTruncated) {
  DischargeCycle c = make_cycle("B0005", 0, 0, 2.0, 6);
  c.current = {2.0, 2.0, 2.0, 2.0, 0.0, 0.0};
  EXPECT_EQ(truncate_after_disconnect(c, 0.05), 2u);
  EXPECT_EQ(c.current, (std::vector<Real>{2, 2, 2, 2}));
  EXPECT_EQ(c.time.size(), 4u);
  EXPECT_EQ(c.voltage.size(), 4u);
  // A dip inside the trace is not a disconnect.
  DischargeCycle d = make_cycle("B0005", 0, 0, 2.0, 4);
  d.current = {2.0, 0.0, 2.0, 0.01};
  EXPECT_EQ(truncate_after_disconnect(d, 0.05), 1u);
  EXPECT_EQ(d.current.size(), 3u);
}

GTEST_TEST(PreprocessTest, DeltaTInHours) {
  std::vector<DischargeCycle> cycles{make_cycle("B0005", 0, 1000, 2.0), make_cycle("B0005", 1, 1000 + 7200, 2.0)};
  const auto out = preprocess(cycles);
  ASSERT_EQ(out[0].cycles.size(), 2u);
  EXPECT_EQ(out[0].cycles[0].delta_t_hours, 0.0);
  EXPECT_DOUBLE_EQ(out[0].cycles[1].delta_t_hours, 2.0);
}

GTEST_TEST(PreprocessTest, ShortBatteryIsExcludedWithWarning) {
  std::vector<DischargeCycle> cycles{make_cycle("B0005", 0, 0, 2.0), make_cycle("B0006", 0, 0, 2.0),
                                     make_cycle("B0006", 1, 10, 2.0)};
  PreprocessReport report;
  const auto out = preprocess(cycles, {}, &report);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, "B0006");
  EXPECT_EQ(report.excluded_batteries, (std::vector<std::string>{"B0005"}));
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.warnings[0].find("B0005"), std::string::npos);
}

GTEST_TEST(PreprocessTest, GlitchCapacityIsDropped) {
  std::vector<DischargeCycle> cycles{make_cycle("B0005", 0, 0, 0.001), make_cycle("B0005", 1, 10, 2.0),
                                     make_cycle("B0005", 2, 20, 1.9)};
  const auto out = preprocess(cycles);
  ASSERT_EQ(out[0].cycles.size(), 2u);
  EXPECT_EQ(out[0].reference_capacity_ah, 2.0);
  EXPECT_DOUBLE_EQ(out[0].cycles[1].soh_pct, 95.0);
}

GTEST_TEST(PreprocessTest, NoSurvivingDropExceedsThreshold) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(-13, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<DischargeCycle> cycles;
    Real soh = 100;
    for (int k = 0; k < 30; ++k) {
      cycles.push_back(make_cycle("B0005", k, 100.0 * k, 2.0 * soh / 100));
      soh = std::max<Real>(soh + step(rng), 20);
    }
    const auto out = preprocess(cycles);
    if (out.empty()) continue;
    const auto& kept = out[0].cycles;
    for (std::size_t k = 1; k < kept.size(); ++k) {
      EXPECT_GE(kept[k].soh_pct, kept[k - 1].soh_pct - 10 - 1e-9);
      EXPECT_EQ(kept[k].cycle.cycle_index, static_cast<int>(k));
      EXPECT_GE(kept[k].delta_t_hours, 0);
    }
  }
}

// ---- resampling -------------------------------------------------------------------

GTEST_TEST(ResampleTest, LinearExamples) {
  const auto s = iota_times(11);
  EXPECT_EQ(resample_linear(s, 5), (std::vector<Real>{0, 2.5, 5, 7.5, 10}));
  EXPECT_EQ(resample_linear(s, 2), (std::vector<Real>{0, 10}));
  EXPECT_THROW(resample_linear(s, 1), ParameterError);
  EXPECT_THROW(resample_linear({}, 4), ParameterError);
}

GTEST_TEST(ResampleTest, RandomIsBoundedSortedAndUnbiased) {
  const std::vector<Real> s{3, 4, 9, 13};
  std::mt19937_64 rng(4);
  double total = 0;
  std::size_t count = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto out = resample_random(s, 100, rng);
    ASSERT_EQ(out.size(), 100u);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
    for (Real v : out) {
      EXPECT_GE(v, 3);
      EXPECT_LE(v, 13);
      total += v;
      ++count;
    }
  }
  EXPECT_NEAR(total / count, 8.0, 0.08);
}

GTEST_TEST(ResampleTest, AnchorStaysNearAnchorsAndOrdered) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Real> s{0};
    const int n = 2 + static_cast<int>(u(rng) * 50);
    for (int i = 1; i < n; ++i) s.push_back(s.back() + 0.1 + 20 * u(rng));
    const int len = 2 + static_cast<int>(u(rng) * 130);
    const auto anchors = resample_linear(s, len);
    const auto out = resample_anchor(s, len, rng);
    const Real half = (s.back() - s.front()) / (len - 1) / 2;
    for (int t = 0; t < len; ++t) {
      EXPECT_LE(std::abs(out[t] - anchors[t]), half * (1 + 1e-12));
      EXPECT_GE(out[t], s.front());
      EXPECT_LE(out[t], s.back());
      if (t) {
        EXPECT_GE(out[t], out[t - 1]);
      }
    }
  }
}

GTEST_TEST(ResampleTest, ZeroNoiseAnchorIsLinear) {
  const auto s = iota_times(37);
  std::mt19937_64 rng(6);
  EXPECT_EQ(resample_anchor(s, 16, rng, 0), resample_linear(s, 16));
}

GTEST_TEST(ResampleTest, ModeNames) {
  for (auto m : {ResampleMode::kLinear, ResampleMode::kRandom, ResampleMode::kAnchor})
    EXPECT_EQ(parse_resample_mode(to_string(m)), m);
  EXPECT_THROW(parse_resample_mode("cubic"), ConfigError);
}

GTEST_TEST(InterpolateTest, Examples) {
  const std::vector<Real> knots{0, 10}, values{0, 10};
  EXPECT_EQ(interpolate(knots, values, std::vector<Real>{2.5}), (std::vector<Real>{2.5}));
  EXPECT_THROW(interpolate(knots, values, std::vector<Real>{10.5}), ParameterError);
  EXPECT_THROW(interpolate(knots, values, std::vector<Real>{-0.1}), ParameterError);
}

GTEST_TEST(InterpolateTest, KnotsRoundTripExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3);
  std::vector<Real> knots{0}, values{Real(u(rng))};
  for (int i = 0; i < 60; ++i) {
    knots.push_back(knots.back() + u(rng));
    values.push_back(u(rng) - 1.5);
  }
  EXPECT_EQ(interpolate(knots, values, knots), values);
}

GTEST_TEST(InterpolateTest, IdentityGridAndLabels) {
  PreparedCycle p;
  p.cycle = make_cycle("B0006", 4, 0, 1.7, 9);
  p.soh_pct = 85;
  p.delta_t_hours = 1.5;
  const ResampledCycle r = interpolate_cycle(p, p.cycle.time);
  ASSERT_EQ(r.signals.shape(), (numerics::Shape{9, 4}));
  for (std::size_t t = 0; t < 9; ++t) {
    EXPECT_EQ(r.signals.at(t, kCurrent), p.cycle.current[t]);
    EXPECT_EQ(r.signals.at(t, kVoltage), p.cycle.voltage[t]);
    EXPECT_EQ(r.signals.at(t, kTemperature), p.cycle.temperature[t]);
    EXPECT_EQ(r.signals.at(t, kSampleTime), p.cycle.time[t]);
  }
  EXPECT_EQ(r.soh_label, 85);
  EXPECT_EQ(r.delta_t_hours, 1.5);
  EXPECT_EQ(r.battery_id, "B0006");
  EXPECT_EQ(r.cycle_index, 4);
}

// ---- normalization ----------------------------------------------------------------

GTEST_TEST(NormalizeTest, ConstantChannelFallsBackToUnitStd) {
  Battery b;
  b.id = "B0005";
  for (int k = 0; k < 3; ++k) b.cycles.push_back({make_cycle("B0005", k, k, 2.0), 100, 0});
  std::vector<std::string> warnings;
  const NormStats stats = fit_norm_stats({b}, &warnings);
  EXPECT_EQ(stats.mean[kCurrent], -2.0);
  EXPECT_EQ(stats.stddev[kCurrent], 1.0);
  ASSERT_EQ(warnings.size(), 1u);
  const ResampledCycle r = interpolate_cycle(b.cycles[0], b.cycles[0].cycle.time);
  Tensor sig = r.signals;
  stats.apply(sig);
  for (std::size_t t = 0; t < sig.dim(0); ++t) {
    EXPECT_EQ(sig.at(t, kCurrent), 0.0);
    EXPECT_EQ(sig.at(t, kSampleTime), r.signals.at(t, kSampleTime));
  }
  EXPECT_THROW(fit_norm_stats({}), ParameterError);
}

GTEST_TEST(NormalizeTest, TrainingChannelsAreStandardized) {
  const auto train = testing::synthetic_batteries({5, 18}, 20, 3);
  const NormStats stats = fit_norm_stats(train);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& b : train)
      for (const auto& c : b.cycles) {
        const std::vector<Real>* col[] = {&c.cycle.current, &c.cycle.voltage, &c.cycle.temperature};
        for (Real v : *col[ch]) {
          const double z = (v - stats.mean[ch]) / stats.stddev[ch];
          sum += z;
          sq += z * z;
          ++n;
        }
      }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0, 1e-9);
    EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 1, 1e-9);
  }
}

GTEST_TEST(NormalizeTest, EvalUsesTrainStatistics) {
  const auto train = testing::synthetic_batteries({5}, 10, 3);
  const auto eval = testing::synthetic_batteries({6}, 10, 9);
  const NormStats stats = fit_norm_stats(train);
  ResampledCycle r = interpolate_cycle(eval[0].cycles[0], eval[0].cycles[0].cycle.time);
  const Tensor raw = r.signals;
  stats.apply(r);
  for (std::size_t ch = 0; ch < 3; ++ch)
    EXPECT_DOUBLE_EQ(r.signals.at(1, ch), (raw.at(1, ch) - stats.mean[ch]) / stats.stddev[ch]);
  Tensor wrong({4, 3});
  EXPECT_THROW(stats.apply(wrong), DimensionError);
}

// ---- splits -----------------------------------------------------------------------

GTEST_TEST(SplitTest, Tables) {
  EXPECT_EQ(nasa_split("NASA-S").train_ids, (std::vector<int>{5, 25, 29, 48}));
  EXPECT_EQ(nasa_split("NASA-M").train_ids, (std::vector<int>{5, 18, 45, 46, 48}));
  EXPECT_EQ(nasa_split("NASA-L").train_ids, (std::vector<int>{5, 18, 31, 34, 36, 45, 46, 48, 54, 55, 56}));
  for (const auto& name : split_names()) {
    const auto split = nasa_split(name);
    EXPECT_EQ(split.eval_ids, (std::vector<int>{6, 7, 47}));
    for (int id : split.eval_ids)
      EXPECT_EQ(std::count(split.train_ids.begin(), split.train_ids.end(), id), 0);
  }
  EXPECT_THROW(nasa_split("NASA-XL"), ConfigError);
}

GTEST_TEST(SplitTest, Identifiers) {
  EXPECT_EQ(battery_number("B0005"), 5);
  EXPECT_EQ(battery_number("battery_47"), 47);
  EXPECT_EQ(battery_number("none"), std::nullopt);
  EXPECT_EQ(battery_name(5), "B0005");
  EXPECT_EQ(battery_name(47), "B0047");
}

GTEST_TEST(SplitTest, ApplyReportsMissingMembers) {
  const auto all = testing::synthetic_batteries({5, 6, 7, 25}, 20);
  const auto s = apply_split(all, nasa_split("NASA-S"));
  ASSERT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.train[0].id, "B0005");
  EXPECT_EQ(s.eval.size(), 2u);
  EXPECT_EQ(s.missing, (std::vector<int>{29, 48, 47}));
}

// ---- synthetic data ---------------------------------------------------------------

GTEST_TEST(SyntheticTest, TracesAreValidAndAgeing) {
  SyntheticOptions o;
  o.num_cycles = 80;
  o.fault_probability = 0;
  const auto cycles = synthesize_battery("B0005", o, 11);
  ASSERT_EQ(cycles.size(), 80u);
  for (const auto& c : cycles) EXPECT_NO_THROW(validate_cycle(c));
  EXPECT_LT(cycles.back().capacity_ah, cycles.front().capacity_ah);
  EXPECT_LT(cycles.back().time.back(), cycles.front().time.back());
  const auto same = synthesize_battery("B0005", o, 11);
  EXPECT_EQ(same.back().voltage, cycles.back().voltage);
  PreprocessReport report;
  const auto prepared = preprocess(cycles, {}, &report);
  EXPECT_EQ(report.truncated_samples, 80u * o.trailing_rest_samples);
  EXPECT_NEAR(prepared[0].cycles.back().soh_pct, o.end_of_run_soh, 6);
}

GTEST_TEST(SyntheticTest, FaultsAreRemovedByPreprocessing) {
  SyntheticOptions o;
  o.num_cycles = 200;
  o.fault_probability = 0.1;
  PreprocessReport report;
  const auto prepared = preprocess(synthesize_battery("B0007", o, 2), {}, &report);
  EXPECT_GT(report.dropped_cycles, 0u);
  const auto& kept = prepared[0].cycles;
  for (std::size_t k = 1; k < kept.size(); ++k) EXPECT_GE(kept[k].soh_pct, kept[k - 1].soh_pct - 10);
}

}  // namespace
}  // namespace sambamixer::dataset

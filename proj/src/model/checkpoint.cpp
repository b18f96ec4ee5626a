// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/model/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "sambamixer/error.hpp"

namespace sambamixer::model {
namespace {

constexpr char kMagic[8] = {'S', 'M', 'B', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["config"] = to_json(ckpt.config);
  header["step"] = ckpt.step;
  header["extras"] = ckpt.extras;
  header["tensors"] = nlohmann::json::array();
  std::string data;
  for (const auto& t : ckpt.tensors) {
    header["tensors"].push_back({{"name", t.name}, {"shape", t.value.shape()}, {"offset", data.size()}});
    for (Real v : t.value.data()) put_f64(data, static_cast<double>(v));
  }
  const std::string text = header.dump();
  std::string blob(kMagic, sizeof kMagic);
  put_u32(blob, static_cast<std::uint32_t>(text.size()));
  blob += text;
  blob += data;

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint " + tmp);
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw FormatError("short write on checkpoint " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (blob.size() < 12 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0)
    throw FormatError(path + ": not a checkpoint file");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  std::uint32_t header_size = 0;
  for (int i = 0; i < 4; ++i) header_size |= static_cast<std::uint32_t>(bytes[8 + i]) << (8 * i);
  if (12 + static_cast<std::size_t>(header_size) > blob.size()) throw FormatError(path + ": truncated header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(blob.substr(12, header_size));
    const std::string version = header.at("version").get<std::string>();
    if (version != kCheckpointVersion)
      throw FormatError(path + ": checkpoint version '" + version + "', expected '" + kCheckpointVersion + "'");
    ckpt.config = model_config_from_json(header.at("config"));
    ckpt.step = header.at("step").get<std::int64_t>();
    ckpt.extras = header.value("extras", nlohmann::json::object());
    const std::size_t data_begin = 12 + header_size;
    for (const auto& rec : header.at("tensors")) {
      NamedTensor t;
      t.name = rec.at("name").get<std::string>();
      const auto shape = rec.at("shape").get<numerics::Shape>();
      const auto offset = rec.at("offset").get<std::size_t>();
      t.value = Tensor(shape);
      const std::size_t n = t.value.size();
      if (data_begin + offset + 8 * n > blob.size()) throw FormatError(path + ": tensor '" + t.name + "' truncated");
      const unsigned char* p = bytes + data_begin + offset;
      for (std::size_t i = 0; i < n; ++i) t.value[i] = static_cast<Real>(get_f64(p + 8 * i));
      ckpt.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": malformed checkpoint header: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path + ": bad model config: " + e.what());
  }
  return ckpt;
}

nlohmann::json to_json(const dataset::NormStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}

dataset::NormStats norm_stats_from_json(const nlohmann::json& j) {
  dataset::NormStats s;
  s.mean = j.at("mean").get<std::array<Real, 3>>();
  s.stddev = j.at("std").get<std::array<Real, 3>>();
  return s;
}

Checkpoint make_checkpoint(const SambaMixerModel& model, std::int64_t step) {
  Checkpoint ckpt;
  ckpt.config = model.config();
  ckpt.step = step;
  ckpt.extras["norm_stats"] = to_json(model.norm_stats());
  const auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) ckpt.tensors.push_back({params[i].name, params[i].value});
  return ckpt;
}

void load_parameters(SambaMixerModel& model, const Checkpoint& ckpt) {
  auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    const Tensor* t = ckpt.find(p.name);
    if (!t) throw FormatError("checkpoint lacks parameter '" + p.name + "'");
    if (!numerics::same_shape(*t, p.value))
      throw FormatError("checkpoint parameter '" + p.name + "' has shape " + numerics::shape_string(t->shape()) +
                        ", model expects " + numerics::shape_string(p.value.shape()));
    p.value = *t;
  }
  try {
    if (ckpt.extras.contains("norm_stats")) model.set_norm_stats(norm_stats_from_json(ckpt.extras.at("norm_stats")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint norm_stats: ") + e.what());
  }
}

SambaMixerModel model_from_checkpoint(const Checkpoint& ckpt) {
  SambaMixerModel model(ckpt.config, 0);
  load_parameters(model, ckpt);
  return model;
}

}  // namespace sambamixer::model

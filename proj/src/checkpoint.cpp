/* Copyright 2026 The SResNet Authors. All Rights Reserved.

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

#include "sresnet/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "sresnet/error.hpp"

namespace sresnet {

namespace {

constexpr char kMagic[8] = {'S', 'R', 'N', 'C', 'K', 'P', 'T', '\n'};
constexpr std::size_t kPreamble = 24;

template <typename T>
void put_le(std::string& out, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  out.append(reinterpret_cast<const char*>(bits.data()), bits.size());
}

template <typename T>
T get_le(const unsigned char* p) {
  std::array<unsigned char, sizeof(T)> bits;
  std::memcpy(bits.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointFormatError("cannot open checkpoint " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

struct ParsedCheckpoint {
  CheckpointHeader header;
  nlohmann::json tensors;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;
};

ParsedCheckpoint parse(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw CheckpointFormatError(path.string() + ": not a checkpoint (bad magic bytes)");
  }
  if (bytes.size() < kPreamble) throw CheckpointTruncatedError(path.string() + ": truncated preamble");
  const auto version = get_le<std::uint32_t>(bytes.data() + 8);
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError(path.string() + ": format version " + std::to_string(version) +
                                 ", this build reads version " + std::to_string(kCheckpointVersion));
  }
  const auto header_len = get_le<std::uint64_t>(bytes.data() + 16);
  if (header_len > bytes.size() - kPreamble) throw CheckpointTruncatedError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + kPreamble,
                                   bytes.begin() + static_cast<std::ptrdiff_t>(kPreamble + header_len));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(path.string() + ": malformed header: " + e.what());
  }

  ParsedCheckpoint pc;
  pc.header.version = version;
  try {
    pc.header.config = model_config_from_json(header.at("config"));
    pc.header.extra = header.value("extra", nlohmann::json::object());
    pc.tensors = header.at("tensors");
    const auto payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
    const std::size_t start = kPreamble + header_len;
    if (payload_bytes > bytes.size() - start) {
      throw CheckpointTruncatedError(path.string() + ": payload has " + std::to_string(bytes.size() - start) +
                                     " bytes, header declares " + std::to_string(payload_bytes));
    }
    pc.payload = bytes.data() + start;
    pc.payload_size = payload_bytes;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(path.string() + ": incomplete header: " + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointFormatError(path.string() + ": bad config in header: " + e.what());
  }
  return pc;
}

}  // namespace

nlohmann::json to_json(const ModelConfig& c) {
  return {
      {"num_classes", c.num_classes},
      {"se_scheme", std::string(to_string(c.se_scheme))},
      {"stem_channels", c.stem_channels},
      {"blocks_per_stage", c.blocks_per_stage},
      {"se_reduction", c.se_reduction},
      {"se_bias", c.se_bias},
      {"input_size", {c.input_height, c.input_width}},
      {"scale", std::string(to_string(c.scale))},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.se_scheme = parse_scheme(j.at("se_scheme").get<std::string>());
    c.stem_channels = j.at("stem_channels").get<std::size_t>();
    c.blocks_per_stage = j.at("blocks_per_stage").get<std::array<std::size_t, 4>>();
    c.se_reduction = j.at("se_reduction").get<std::size_t>();
    c.se_bias = j.at("se_bias").get<bool>();
    const auto size = j.at("input_size").get<std::array<std::size_t, 2>>();
    c.input_height = size[0];
    c.input_width = size[1];
    c.scale = parse_scale(j.at("scale").get<std::string>());
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

void save_checkpoint(Model& model, const std::filesystem::path& path, const nlohmann::json& extra) {
  nlohmann::json tensors = nlohmann::json::array();
  std::string payload;
  for (auto& [name, t] : model.named_tensors()) {
    tensors.push_back({{"name", name}, {"dtype", "f64"}, {"shape", t.shape()}, {"offset", payload.size()}});
    for (double v : t.data()) put_le(payload, v);
  }
  nlohmann::json header = {
      {"format_version", kCheckpointVersion},
      {"config", to_json(model.config())},
      {"tensors", tensors},
      {"payload_bytes", payload.size()},
      {"extra", extra.is_null() ? nlohmann::json::object() : extra},
  };
  const std::string text = header.dump(1);

  std::string blob(kMagic, 8);
  put_le(blob, kCheckpointVersion);
  put_le(blob, std::uint32_t{0});
  put_le(blob, static_cast<std::uint64_t>(text.size()));
  blob += text;
  blob += payload;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw Error("short write to checkpoint " + path.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse(bytes, path).header;
}

void load_checkpoint_into(Model& model, const std::filesystem::path& path, const LoadOptions& options) {
  const auto bytes = read_file(path);
  const ParsedCheckpoint pc = parse(bytes, path);

  auto is_classifier = [](const std::string& name) { return name.rfind("fc.", 0) == 0; };

  struct Entry {
    Shape shape;
    std::uint64_t offset;
  };
  std::map<std::string, Entry> stored;
  try {
    for (const auto& t : pc.tensors) {
      if (t.at("dtype").get<std::string>() != "f64") {
        throw CheckpointFormatError(path.string() + ": unsupported dtype for " + t.at("name").get<std::string>());
      }
      stored[t.at("name").get<std::string>()] = Entry{t.at("shape").get<Shape>(), t.at("offset").get<std::uint64_t>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointFormatError(path.string() + ": bad tensor directory: " + e.what());
  }

  // Validate everything first; nothing is written until all checks pass.
  std::vector<std::pair<Tensor, const unsigned char*>> plan;
  std::size_t expected = 0;
  for (auto& [name, t] : model.named_tensors()) {
    if (options.skip_classifier && is_classifier(name)) continue;
    ++expected;
    auto it = stored.find(name);
    if (it == stored.end()) throw CheckpointShapeError(path.string() + ": missing tensor " + name);
    if (it->second.shape != t.shape()) {
      throw CheckpointShapeError(path.string() + ": tensor " + name + " stored as " + shape_str(it->second.shape) +
                                 ", model expects " + shape_str(t.shape()));
    }
    const std::uint64_t nbytes = t.numel() * sizeof(double);
    if (it->second.offset > pc.payload_size || nbytes > pc.payload_size - it->second.offset) {
      throw CheckpointTruncatedError(path.string() + ": tensor " + name + " runs past the payload");
    }
    plan.emplace_back(t, pc.payload + it->second.offset);
  }
  std::size_t comparable = 0;
  for (const auto& [name, e] : stored) {
    if (!(options.skip_classifier && is_classifier(name))) ++comparable;
  }
  if (comparable != expected) {
    throw CheckpointShapeError(path.string() + ": checkpoint holds " + std::to_string(comparable) +
                               " tensors, model expects " + std::to_string(expected));
  }

  for (auto& [t, src] : plan) {
    auto dst = t.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = get_le<double>(src + i * sizeof(double));
  }
}

Model load_checkpoint(const std::filesystem::path& path, const ModelConfig& config) {
  Model m = Model::build(config, 0);
  load_checkpoint_into(m, path);
  return m;
}

}  // namespace sresnet

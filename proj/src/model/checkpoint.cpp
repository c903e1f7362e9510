#include "svwa/model/checkpoint.hpp"

#include <string>

#include "svwa/error.hpp"
#include "svwa/io/binary.hpp"

namespace svwa {

namespace {

constexpr std::string_view kMagic = "SVWA";

void write_dims(io::ByteWriter& w, const std::vector<std::size_t>& dims) {
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
}

std::vector<std::size_t> read_dims(io::ByteReader& r) {
  const std::uint32_t count = r.u32();
  if (count > r.remaining() / 4) throw FormatError("dimension count " + std::to_string(count) + " too large", r.offset());
  std::vector<std::size_t> dims(count);
  for (auto& d : dims) d = r.u32();
  return dims;
}

void write_entries(io::ByteWriter& w, const ParamSet& set) {
  for (const auto& e : set) {
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.raw(e.name);
    w.u8(static_cast<std::uint8_t>(e.value.dtype()));
    write_dims(w, e.value.shape());
    if (e.value.dtype() == DType::kF32) {
      for (double v : e.value.values()) w.f32(static_cast<float>(v));
    } else {
      for (double v : e.value.values()) w.f64(v);
    }
  }
}

// Reads entries whose names/shapes must match `expected` exactly.
ParamSet read_entries(io::ByteReader& r, const ParamSet& expected) {
  ParamSet out;
  for (const auto& e : expected) {
    const std::size_t at = r.offset();
    const std::uint16_t len = r.u16();
    const std::string name = r.raw(len);
    if (name != e.name) throw FormatError("expected parameter '" + e.name + "', found '" + name + "'", at);
    const std::size_t dtype_at = r.offset();
    const std::uint8_t dtype = r.u8();
    if (dtype > 1) throw FormatError("unknown dtype " + std::to_string(dtype), dtype_at);
    const std::size_t shape_at = r.offset();
    const Shape shape = read_dims(r);
    if (shape != e.value.shape()) {
      throw FormatError("parameter '" + name + "' has shape " + shape_to_string(shape) + ", expected " +
                            shape_to_string(e.value.shape()),
                        shape_at);
    }
    std::vector<double> values(shape_volume(shape));
    if (dtype == 0) {
      for (double& v : values) v = r.f32();
    } else {
      for (double& v : values) v = r.f64();
    }
    out.add(name, Tensor(shape, std::move(values), static_cast<DType>(dtype)));
  }
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelState& state) {
  const PointNetLiteConfig& c = state.config;
  c.validate();
  if (c.point_dims != 3) throw ConfigError("checkpoints store 3D point models only");
  io::ByteWriter w;
  w.raw(kMagic);
  w.u16(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(c.num_classes));
  w.u32(static_cast<std::uint32_t>(c.fps_points));
  write_dims(w, c.mlp_channels);
  write_dims(w, c.head_dims);
  write_entries(w, state.params);
  write_entries(w, state.running);
  return w.take();
}

ModelState decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes);
  if (r.raw(4) != kMagic) throw FormatError("not a checkpoint (bad magic)", 0);
  const std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kCheckpointVersion) + ")");
  }
  PointNetLiteConfig config;
  config.num_classes = r.u32();
  config.fps_points = r.u32();
  const std::size_t config_at = r.offset();
  config.mlp_channels = read_dims(r);
  config.head_dims = read_dims(r);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid config block: ") + e.what(), config_at);
  }

  // Layout template: names and shapes of every entry.
  const ModelState layout = ModelState::initialize(config, 0);
  ModelState state;
  state.config = config;
  state.params = read_entries(r, layout.params);
  state.running = read_entries(r, layout.running);
  r.expect_end("checkpoint");
  return state;
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(state));
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace svwa

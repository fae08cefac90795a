#include "bytes.hpp"
#include "facecond/model.hpp"

#include <fstream>
#include <iterator>

namespace facecond {

namespace detail {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("error while reading '{}'", path));
  return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("error while writing '{}'", path));
}

}  // namespace detail

namespace {

constexpr char kMagic[4] = {'F', 'C', 'N', 'D'};
constexpr std::uint32_t kVersion = 1;

using detail::ByteReader;
using detail::ByteWriter;

void write_dims(ByteWriter& w, std::initializer_list<std::size_t> dims) {
  w.u32(static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) w.u32(static_cast<std::uint32_t>(d));
}

void write_f32(ByteWriter& w, std::initializer_list<std::size_t> dims, std::span<const float> v) {
  write_dims(w, dims);
  for (float x : v) w.f32(x);
}

// Reads a rank/dims prefix and checks it against `expected`; zero entries in
// `expected` are free and get filled from the file.
std::size_t read_dims(ByteReader& r, const char* field, std::vector<std::size_t>& expected) {
  const std::uint32_t rank = r.u32(fmt::format("rank of `{}`", field));
  if (rank != expected.size())
    throw FormatError(
        fmt::format("field `{}`: expected rank {}, found {}", field, expected.size(), rank));
  std::size_t count = 1;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const std::uint32_t d = r.u32(fmt::format("dimensions of `{}`", field));
    if (expected[i] != 0 && expected[i] != d)
      throw FormatError(fmt::format("field `{}`: dimension {} is {}, expected {}", field, i, d,
                                    expected[i]));
    expected[i] = d;
    count *= d;
    if (count > r.remaining())
      throw FormatError(fmt::format("field `{}`: dimensions exceed file size", field));
  }
  return count;
}

std::vector<float> read_f32(ByteReader& r, const char* field, std::vector<std::size_t>& dims) {
  const std::size_t n = read_dims(r, field, dims);
  r.need(4 * n, fmt::format("data of `{}`", field));
  std::vector<float> out(n);
  for (float& x : out) x = r.f32(field);
  return out;
}

}  // namespace

std::vector<std::uint8_t> serialize_assets(const HeadModelAssets& a) {
  a.validate();
  const std::size_t v = a.num_vertices();
  const std::size_t f = a.num_faces();
  const std::size_t t = static_cast<std::size_t>(a.tex_res);

  ByteWriter w;
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  w.u32(kVersion);
  write_f32(w, {v, 3}, a.template_vertices);
  write_dims(w, {f, 3});
  for (const Face& face : a.topology->faces)
    for (std::uint32_t idx : face) w.u32(idx);
  write_f32(w, {v, 3, kShapeDims}, a.shape_basis);
  write_f32(w, {v, 3, kExpressionDims}, a.expression_basis);
  write_f32(w, {v}, a.jaw_weights);
  write_f32(w, {3}, a.jaw_joint);
  write_dims(w, {2});
  w.u32(a.eye_vertex_ids[0]);
  w.u32(a.eye_vertex_ids[1]);
  write_dims(w, {f, 3, 2});
  for (const FaceUv& corners : a.topology->uvs)
    for (const Vec2& uv : corners) {
      w.f32(static_cast<float>(uv.x()));
      w.f32(static_cast<float>(uv.y()));
    }
  write_f32(w, {t, t, 3}, a.albedo_mean);
  write_f32(w, {t, t, 3, kAppearanceDims}, a.albedo_basis);
  return std::move(w.buffer());
}

HeadModelAssets deserialize_assets(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic))
    throw FormatError("bad header: not an FCND asset file");
  const std::uint32_t version = r.u32("format version");
  if (version != kVersion)
    throw FormatError(fmt::format("bad header: unsupported format version {}", version));

  HeadModelAssets a;
  auto topology = std::make_shared<MeshTopology>();

  std::vector<std::size_t> dims{0, 3};
  a.template_vertices = read_f32(r, "template_vertices", dims);
  const std::size_t v = dims[0];

  dims = {0, 3};
  const std::size_t face_values = read_dims(r, "faces", dims);
  r.need(4 * face_values, "data of `faces`");
  topology->faces.resize(dims[0]);
  for (Face& face : topology->faces)
    for (std::uint32_t& idx : face) idx = r.u32("faces");
  const std::size_t f = dims[0];

  dims = {v, 3, kShapeDims};
  a.shape_basis = read_f32(r, "shape_basis", dims);
  dims = {v, 3, kExpressionDims};
  a.expression_basis = read_f32(r, "expression_basis", dims);
  dims = {v};
  a.jaw_weights = read_f32(r, "jaw_weights", dims);
  dims = {3};
  const auto joint = read_f32(r, "jaw_joint", dims);
  std::copy(joint.begin(), joint.end(), a.jaw_joint.begin());

  dims = {2};
  read_dims(r, "eye_vertex_ids", dims);
  a.eye_vertex_ids[0] = r.u32("eye_vertex_ids");
  a.eye_vertex_ids[1] = r.u32("eye_vertex_ids");

  dims = {f, 3, 2};
  const auto uv = read_f32(r, "uv_coords", dims);
  topology->uvs.resize(f);
  for (std::size_t i = 0; i < f; ++i)
    for (int k = 0; k < 3; ++k)
      topology->uvs[i][k] = Vec2(uv[(3 * i + k) * 2], uv[(3 * i + k) * 2 + 1]);

  dims = {0, 0, 3};
  a.albedo_mean = read_f32(r, "albedo_mean", dims);
  if (dims[0] != dims[1])
    throw FormatError(fmt::format("field `albedo_mean`: texture is {}x{}, expected square",
                                  dims[0], dims[1]));
  a.tex_res = static_cast<int>(dims[0]);
  const std::size_t t = dims[0];
  dims = {t, t, 3, kAppearanceDims};
  a.albedo_basis = read_f32(r, "albedo_basis", dims);

  if (r.remaining() != 0)
    throw FormatError(fmt::format("{} trailing bytes after `albedo_basis`", r.remaining()));

  a.topology = std::move(topology);
  a.validate();
  return a;
}

HeadModelAssets load_assets(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  try {
    return deserialize_assets(bytes);
  } catch (const ValidationError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void save_assets(const HeadModelAssets& assets, const std::filesystem::path& path) {
  detail::write_file(path.string(), serialize_assets(assets));
}

}  // namespace facecond

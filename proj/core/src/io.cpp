#include "hf/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "hf/errors.hpp"

namespace hf {

namespace {

constexpr char kMagic[8] = {'H', 'F', 'F', 'I', 'E', 'L', 'D', '1'};
static_assert(std::endian::native == std::endian::little, "container format assumes a little-endian host");

template <typename Field>
FieldFile pack_components(const Grid& grid, const Field& f, const char* kind, std::size_t components) {
  grid.check_shape(f.size());
  FieldFile out;
  out.kind = kind;
  out.grid = {grid.n_alpha(), grid.n_beta(), grid.n_gamma()};
  out.components = components;
  out.data.reserve(f.size() * components);
  return out;
}

nlohmann::json header_json(const FieldFile& file) {
  nlohmann::json h;
  h["kind"] = file.kind;
  h["grid"] = file.grid;
  h["components"] = file.components;
  if (file.kind == "matrix") {
    h["shape"] = {3, 3};
    h["index_order"] = "i,j";
  } else if (file.kind == "structure") {
    h["shape"] = {3, 3, 3};
    h["index_order"] = "k,i,j";
  } else if (file.kind == "curvature") {
    h["shape"] = {3, 3, 3, 3};
    h["index_order"] = "k,i,j,l";
  } else {
    h["shape"] = nlohmann::json::array();
    h["index_order"] = "";
  }
  h["node_order"] = "alpha,beta,gamma";
  return h;
}

void validate(const FieldFile& f) {
  for (int n : f.grid) {
    if (n < Grid::kMinCount) throw FormatError("field header has an invalid grid size");
  }
  if (f.components == 0) throw FormatError("field header has zero components");
  const std::size_t nodes = static_cast<std::size_t>(f.grid[0]) * f.grid[1] * f.grid[2];
  if (f.data.size() != nodes * f.components) throw FormatError("field payload does not match its header");
}

void parse_header(const nlohmann::json& h, FieldFile& out) {
  try {
    out.kind = h.at("kind").get<std::string>();
    out.grid = h.at("grid").get<std::array<int, 3>>();
    out.components = h.at("components").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field header: ") + e.what());
  }
}

}  // namespace

FieldFile pack(const Grid& grid, const MatrixField& f) {
  FieldFile out = pack_components(grid, f, "matrix", 9);
  for (const auto& m : f)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out.data.push_back(m(i, j));
  return out;
}

FieldFile pack(const Grid& grid, const StructureField& f) {
  FieldFile out = pack_components(grid, f, "structure", 27);
  for (const auto& c : f) out.data.insert(out.data.end(), c.begin(), c.end());
  return out;
}

FieldFile pack(const Grid& grid, const CurvatureField& f) {
  FieldFile out = pack_components(grid, f, "curvature", 81);
  for (const auto& r : f) out.data.insert(out.data.end(), r.begin(), r.end());
  return out;
}

MatrixField unpack_matrix(const FieldFile& file, const Grid& grid) {
  if (file.kind != "matrix" || file.components != 9) throw FormatError("expected a 3x3 matrix field, got '" + file.kind + "'");
  if (file.grid != std::array<int, 3>{grid.n_alpha(), grid.n_beta(), grid.n_gamma()})
    throw FormatError("field grid does not match");
  validate(file);
  MatrixField out(grid.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[n](i, j) = file.data[n * 9 + i * 3 + j];
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return text;
}

FieldEncoding encoding_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? FieldEncoding::json : FieldEncoding::binary;
}

void write_field(const std::filesystem::path& path, const FieldFile& file, FieldEncoding encoding) {
  validate(file);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  nlohmann::json h = header_json(file);
  if (encoding == FieldEncoding::json) {
    h["data"] = file.data;
    out << h.dump() << '\n';
  } else {
    const std::string text = h.dump();
    const std::uint64_t length = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&length), sizeof length);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(file.data.data()), static_cast<std::streamsize>(file.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");

  FieldFile out;
  if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0) {
    std::uint64_t length = 0;
    if (bytes.size() < 16) throw FormatError("truncated field header");
    std::memcpy(&length, bytes.data() + 8, sizeof length);
    if (bytes.size() < 16 + length) throw FormatError("truncated field header");
    const nlohmann::json h = nlohmann::json::parse(bytes.substr(16, length), nullptr, false);
    if (h.is_discarded()) throw FormatError("field header is not valid JSON");
    parse_header(h, out);
    const std::size_t payload = bytes.size() - 16 - length;
    if (payload % sizeof(double) != 0) throw FormatError("field payload is not a whole number of float64 values");
    out.data.resize(payload / sizeof(double));
    std::memcpy(out.data.data(), bytes.data() + 16 + length, payload);
  } else {
    const nlohmann::json h = nlohmann::json::parse(bytes, nullptr, false);
    if (h.is_discarded() || !h.is_object()) throw FormatError("'" + path.string() + "' is neither a binary nor a JSON field");
    parse_header(h, out);
    try {
      out.data = h.at("data").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad field data: ") + e.what());
    }
  }
  validate(out);
  return out;
}

}  // namespace hf

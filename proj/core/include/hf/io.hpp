#pragma once

// Field container.
//
// Binary layout (little endian):
//   8 bytes   magic "HFFIELD1"
//   8 bytes   uint64 length of the JSON header
//   header    UTF-8 JSON: {"kind", "grid": [n_alpha, n_beta, n_gamma],
//             "components", "shape", "index_order", "node_order"}
//   payload   nodes * components float64 values, node-major
//
// The JSON form is the same header object with an extra "data" array.
// Per node the components are row-major: a 3x3 matrix is A(0,0), A(0,1),
// ..., structure functions are C[k][i][j] and curvature R[k][i][j][l], k
// slowest. Nodes run alpha-major, gamma fastest, as Grid::index.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hf/fields.hpp"
#include "hf/grid.hpp"

namespace hf {

struct FieldFile {
  std::string kind;  // "matrix", "structure", "curvature" or "scalar"
  std::array<int, 3> grid{};
  std::size_t components = 0;
  std::vector<double> data;

  std::size_t nodes() const { return components == 0 ? 0 : data.size() / components; }
};

enum class FieldEncoding { binary, json };

FieldFile pack(const Grid& grid, const MatrixField& f);
FieldFile pack(const Grid& grid, const StructureField& f);
FieldFile pack(const Grid& grid, const CurvatureField& f);

/// Throws FormatError when the file is not a matrix field or its node count
/// does not match the grid.
MatrixField unpack_matrix(const FieldFile& file, const Grid& grid);

/// Writes with the encoding chosen by `encoding`; throws IoError.
void write_field(const std::filesystem::path& path, const FieldFile& file, FieldEncoding encoding = FieldEncoding::binary);

/// Detects the encoding from the leading bytes. Throws IoError when the file
/// cannot be opened and FormatError on malformed content.
FieldFile read_field(const std::filesystem::path& path);

/// Writes a whole text file; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Reads a whole file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);

/// Encoding implied by a path: ".json" selects JSON, anything else binary.
FieldEncoding encoding_for(const std::filesystem::path& path);

}  // namespace hf

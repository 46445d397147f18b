// JSON formats.
//   matrix:    {"d": int, "re": [[...]], "im": [[...]]}   ("im" optional)
//   generator: {"sigma": matrix, "terms": [{"c": real, "omega": real, "L": matrix}], "lipschitz_dim": int}
//              or {"depolarizing": matrix} for L(f) = Tr(σf) I − f
#pragma once

#include "qtc/generator.hpp"

#include <json.hpp>

#include <string>

namespace qtc {

using Json = nlohmann::json;

inline constexpr int kMaxFileDim = 16;

struct ParseError : InvalidInput {
    ParseError(const std::string& what, int line, int column);
    int line = 0, column = 0;
};

// Parses text; syntax errors carry 1-based line and column.
Json parse_json(const std::string& text, const std::string& origin = "<input>");
Json load_json(const std::string& path);
void save_json(const std::string& path, const Json& j);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& where = "matrix");
DensityMatrix density_from_json(const Json& j, const std::string& where = "state");
HermitianOperator hermitian_from_json(const Json& j, const std::string& where = "observable");

Json to_json(const DBGenerator& gen);
DBGenerator generator_from_json(const Json& j);
DBGenerator load_generator(const std::string& path);

}  // namespace qtc

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hyperrfk/bodies.hpp"
#include "hyperrfk/mesh.hpp"
#include "json.hpp"

namespace hyperrfk {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolkitVersion = "1.0.0";

struct LoadedBody {
  std::string kind;  // ball, fourier2d, revolution
  int n = 2;
  Body body;
  ConvexityReport convexity;
};

/// Body specification:
///   {"schema": 1, "kind": "ball"|"fourier2d"|"revolution", "n": int, "params": {...}}
/// ball: {r}; fourier2d: {a0, cos: [...], sin: [...]}; revolution: {a0, cos_even: [...]}.
/// "schema" may be omitted. Throws ParseError naming the offending field.
LoadedBody parse_body(const Json& j);
LoadedBody load_body(const std::string& path);
Json body_to_json(const Body& body);

/// Domain specification:
///   {"schema": 1, "inner": body, "outer": body, "inner_placement": P, "outer_placement": P}
/// with P = {"x", "y", "rotation"} or {"distance", "direction", "rotation"}; placements default to the origin.
AnnularDomain2D parse_domain(const Json& j);
AnnularDomain2D load_domain(const std::string& path);
Json domain_to_json(const AnnularDomain2D& dom);

/// Parses JSON text; syntax errors become ParseError with line and column.
Json parse_json_text(const std::string& text, const std::string& origin = "<input>");

/// Deterministic serialization: keys in insertion order, floats at 17
/// significant digits, non-finite values as null.
std::string dump_json(const Json& j, int indent = 2);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  Json tolerances = Json::object();
  Json resolutions = Json::object();
  std::string version = kToolkitVersion;
  double wall_time_s = 0.0;

  Json to_json(bool with_wall_time) const;
};

/// Writes {schema, command, result, manifest} to `path` (manifest without
/// wall time) and the full manifest to `path` with suffix ".manifest.json".
void write_report(const std::string& path, const Json& result, const RunManifest& manifest);

/// "a:b:k" (k evenly spaced values) or a comma list.
std::vector<double> parse_grid(const std::string& text);

/// Command-line entry point. Exit codes: 0 verdict true, 2 verdict false, 1 error.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hyperrfk

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtlocal/errors.hpp"
#include "mtlocal/scalar_grid.hpp"

namespace mtl {

namespace {

using nlohmann::json;

std::filesystem::path sidecar_path(const std::filesystem::path& raw) {
  auto p = raw;
  p.replace_extension(".json");
  return p;
}

ScalarGrid load_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file: " + path.string());
  std::string header;
  if (!std::getline(in, header))
    throw ValidationError("empty field file: " + path.string());
  std::istringstream hs(header);
  std::string word;
  if (!(hs >> word) || word != "dims")
    throw ValidationError("ascii field must start with a dims header line: " + path.string());
  ScalarGrid g;
  std::int64_t d;
  while (hs >> d) g.dims.push_back(d);
  if (!hs.eof()) {
    hs.clear();
    std::string tok;
    hs >> tok;
    throw ValidationError("bad extent '" + tok + "' in dims header of " + path.string());
  }
  if (g.dims.empty() || g.dims.size() > 3)
    throw ValidationError("dims header must list 1 to 3 extents: " + path.string());
  std::vector<double> vals;
  double x;
  while (in >> x) vals.push_back(x);
  if (!in.eof()) {
    in.clear();
    std::string tok;
    in >> tok;
    throw ValidationError("unparseable token '" + tok + "' in " + path.string());
  }
  g.values = std::move(vals);
  validate_grid(g);
  return g;
}

template <typename T>
std::vector<double> read_raw_values(const std::filesystem::path& path, std::int64_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raw field file: " + path.string());
  std::vector<T> buf(static_cast<std::size_t>(count));
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(sizeof(T) * buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T) * buf.size()))
    throw ValidationError("raw file shorter than dims product: " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw ValidationError("raw file longer than dims product: " + path.string());
  static_assert(std::endian::native == std::endian::little,
                "raw readers assume a little-endian host");
  return std::vector<double>(buf.begin(), buf.end());
}

ScalarGrid load_raw(const std::filesystem::path& path, FieldFormat format) {
  const auto side = sidecar_path(path);
  std::ifstream in(side);
  if (!in) throw IoError("missing raw sidecar: " + side.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("bad raw sidecar JSON (" + side.string() + "): " + e.what());
  }
  if (!j.contains("dims") || !j["dims"].is_array())
    throw ValidationError("sidecar lacks dims array: " + side.string());
  ScalarGrid g;
  for (const auto& d : j["dims"]) g.dims.push_back(d.get<std::int64_t>());
  const std::string dtype = j.value("dtype", format == FieldFormat::raw_f64 ? "f64" : "f32");
  const std::string endian = j.value("endianness", "little");
  if (endian != "little")
    throw ValidationError("unsupported raw endianness '" + endian + "' in " + side.string());
  if (dtype != "f32" && dtype != "f64")
    throw ValidationError("unsupported raw dtype '" + dtype + "' in " + side.string());
  if ((dtype == "f32") != (format == FieldFormat::raw_f32))
    throw ValidationError("sidecar dtype disagrees with requested format: " + side.string());
  if (g.dims.empty() || g.dims.size() > 3)
    throw ValidationError("sidecar dims must have 1 to 3 extents: " + side.string());
  std::int64_t prod = 1;
  for (auto d : g.dims) {
    if (d < 1) throw ValidationError("sidecar extents must be >= 1: " + side.string());
    prod *= d;
  }
  g.values = dtype == "f32" ? read_raw_values<float>(path, prod)
                            : read_raw_values<double>(path, prod);
  validate_grid(g);
  return g;
}

void save_ascii(const ScalarGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write field file: " + path.string());
  out << "dims";
  for (auto d : g.dims) out << ' ' << d;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", g.values[i]);
    out << buf << (((i + 1) % 8 == 0) ? '\n' : ' ');
  }
  if (g.values.size() % 8 != 0) out << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
void save_raw(const ScalarGrid& g, const std::filesystem::path& path, const char* dtype) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write raw field file: " + path.string());
    std::vector<T> buf(g.values.begin(), g.values.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(sizeof(T) * buf.size()));
    if (!out) throw IoError("write failed: " + path.string());
  }
  json j;
  j["dims"] = g.dims;
  j["dtype"] = dtype;
  j["endianness"] = "little";
  const auto side = sidecar_path(path);
  std::ofstream out(side);
  if (!out) throw IoError("cannot write raw sidecar: " + side.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + side.string());
}

}  // namespace

ScalarGrid load_field(const std::filesystem::path& path, FieldFormat format) {
  ScalarGrid g = format == FieldFormat::ascii ? load_ascii(path) : load_raw(path, format);
  g.meta = path.filename().string();
  return g;
}

void save_field(const ScalarGrid& g, const std::filesystem::path& path, FieldFormat format) {
  validate_grid(g);
  switch (format) {
    case FieldFormat::ascii: save_ascii(g, path); break;
    case FieldFormat::raw_f32: save_raw<float>(g, path, "f32"); break;
    case FieldFormat::raw_f64: save_raw<double>(g, path, "f64"); break;
  }
}

FieldFormat detect_format(const std::filesystem::path& path) {
  if (path.extension() != ".raw") return FieldFormat::ascii;
  const auto side = sidecar_path(path);
  std::ifstream in(side);
  if (!in) throw IoError("missing raw sidecar: " + side.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad raw sidecar JSON (" + side.string() + "): " + e.what());
  }
  const std::string dtype = j.value("dtype", "f32");
  if (dtype == "f64") return FieldFormat::raw_f64;
  if (dtype == "f32") return FieldFormat::raw_f32;
  throw ValidationError("unsupported raw dtype '" + dtype + "' in " + side.string());
}

}  // namespace mtl

// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#include "prednbv/cloud_io.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "prednbv/error.hpp"

namespace prednbv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse, fmt::format("line {}: '{}' is not a number", line, tok));
  }
}

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

}  // namespace

PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](std::string& out) -> bool {
    if (!std::getline(in, out)) return false;
    ++lineno;
    return true;
  };

  if (!next(line) || trim(line) != "ply") fail(ErrorCode::kParse, "missing 'ply' magic");

  std::size_t vertex_count = 0;
  bool in_vertex = false;
  bool seen_vertex = false;
  bool seen_format = false;
  std::vector<std::string> props;
  // Elements declared before `vertex` must be skipped line by line.
  std::size_t lines_before_vertex = 0;
  while (true) {
    if (!next(line)) fail(ErrorCode::kParse, "unexpected end of PLY header");
    std::istringstream ss(trim(line));
    std::string kw;
    ss >> kw;
    if (kw == "end_header") break;
    if (kw == "comment" || kw == "obj_info" || kw.empty()) continue;
    if (kw == "format") {
      std::string fmt_name;
      ss >> fmt_name;
      if (fmt_name != "ascii") fail(ErrorCode::kParse, "only ascii PLY is supported");
      seen_format = true;
    } else if (kw == "element") {
      std::string name;
      long long count = -1;
      ss >> name >> count;
      if (count < 0) fail(ErrorCode::kParse, fmt::format("line {}: bad element count", lineno));
      in_vertex = name == "vertex";
      if (in_vertex) {
        if (seen_vertex) fail(ErrorCode::kParse, "duplicate vertex element");
        seen_vertex = true;
        vertex_count = static_cast<std::size_t>(count);
      } else if (!seen_vertex) {
        lines_before_vertex += static_cast<std::size_t>(count);
      }
    } else if (kw == "property") {
      std::string type;
      ss >> type;
      if (type == "list") {
        if (in_vertex) fail(ErrorCode::kParse, "list properties on vertices are not supported");
        continue;
      }
      std::string name;
      ss >> name;
      if (name.empty()) fail(ErrorCode::kParse, fmt::format("line {}: bad property", lineno));
      if (in_vertex) props.push_back(name);
    } else {
      fail(ErrorCode::kParse, fmt::format("line {}: unknown header keyword '{}'", lineno, kw));
    }
  }
  if (!seen_format) fail(ErrorCode::kParse, "PLY header has no format line");
  if (!seen_vertex) fail(ErrorCode::kParse, "PLY has no vertex element");
  int ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i] == "x") ix = static_cast<int>(i);
    if (props[i] == "y") iy = static_cast<int>(i);
    if (props[i] == "z") iz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) fail(ErrorCode::kParse, "PLY vertex lacks x/y/z");

  for (std::size_t i = 0; i < lines_before_vertex; ++i) {
    if (!next(line)) fail(ErrorCode::kParse, "truncated PLY body");
  }
  std::vector<Point3> pts;
  pts.reserve(vertex_count);
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!next(line)) fail(ErrorCode::kParse, "truncated PLY vertex list");
    std::istringstream ss(line);
    toks.clear();
    std::string t;
    while (ss >> t) toks.push_back(t);
    if (toks.size() < props.size()) {
      fail(ErrorCode::kParse, fmt::format("line {}: expected {} values", lineno, props.size()));
    }
    Point3 p(parse_double(toks[ix], lineno), parse_double(toks[iy], lineno),
             parse_double(toks[iz], lineno));
    if (!p.allFinite()) fail(ErrorCode::kParse, fmt::format("line {}: non-finite point", lineno));
    pts.push_back(p);
  }
  return PointCloud(std::move(pts));
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : cloud) out << fmt::format("{} {} {}\n", p.x(), p.y(), p.z());
}

PointCloud read_xyz(std::istream& in) {
  std::vector<Point3> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ss(t);
    std::string a, b, c, extra;
    if (!(ss >> a >> b >> c) || (ss >> extra)) {
      fail(ErrorCode::kParse, fmt::format("line {}: expected three values", lineno));
    }
    Point3 p(parse_double(a, lineno), parse_double(b, lineno), parse_double(c, lineno));
    if (!p.allFinite()) fail(ErrorCode::kParse, fmt::format("line {}: non-finite point", lineno));
    pts.push_back(p);
  }
  return PointCloud(std::move(pts));
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  for (const auto& p : cloud) out << fmt::format("{} {} {}\n", p.x(), p.y(), p.z());
}

PointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot open '{}'", path.string()));
  const std::string ext = lower_ext(path);
  try {
    if (ext == ".ply") return read_ply(in);
    if (ext == ".xyz" || ext == ".txt") return read_xyz(in);
  } catch (const Error& e) {
    fail(e.code(), fmt::format("{}: {}", path.string(), e.what()));
  }
  fail(ErrorCode::kParse, fmt::format("'{}': unsupported extension", path.string()));
}

void save_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ostringstream out;
  const std::string ext = lower_ext(path);
  if (ext == ".ply") {
    write_ply(out, cloud);
  } else if (ext == ".xyz" || ext == ".txt") {
    write_xyz(out, cloud);
  } else {
    fail(ErrorCode::kParameter, fmt::format("'{}': unsupported extension", path.string()));
  }
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) fail(ErrorCode::kIo, fmt::format("write failed for '{}'", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::kIo, fmt::format("cannot rename into '{}'", path.string()));
  }
}

}  // namespace prednbv

// Copyright 2026 The prednbv Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PREDNBV_CLOUD_IO_HPP_
#define PREDNBV_CLOUD_IO_HPP_

#include <filesystem>
#include <istream>
#include <ostream>

#include "prednbv/geometry.hpp"

namespace prednbv {

// ASCII PLY with `element vertex N` and x, y, z properties. Extra vertex
// properties and trailing elements are ignored on read.
PointCloud read_ply(std::istream& in);
void write_ply(std::ostream& out, const PointCloud& cloud);

// Whitespace separated "x y z" per line; blank lines and '#' comments skipped.
PointCloud read_xyz(std::istream& in);
void write_xyz(std::ostream& out, const PointCloud& cloud);

// Dispatches on the extension (.ply / .xyz). Throws kIo or kParse.
PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const std::filesystem::path& path, const PointCloud& cloud);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace prednbv

#endif  // PREDNBV_CLOUD_IO_HPP_

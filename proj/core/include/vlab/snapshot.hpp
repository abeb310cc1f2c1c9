#pragma once

#include <filesystem>

#include "vlab/grid.hpp"

namespace vlab {

inline constexpr const char* field_format = "vlab-field-v1";

struct FieldMeta {
  double time = 0.0;
  double viscosity = 0.0;
};

// Writes <path> as raw little-endian f64 (row-major) and <path>.meta as
// "key = value" lines: format, n_points, box_length, origin_x, origin_y, time,
// viscosity.
void write_field(const std::filesystem::path& path, const ScalarField2D& w, const FieldMeta& meta);

struct LoadedField {
  ScalarField2D field;
  FieldMeta meta;
};

LoadedField read_field(const std::filesystem::path& path);

}  // namespace vlab

#pragma once

#include "ttda/dense_tensor.hpp"

#include <filesystem>
#include <iosfwd>

namespace ttda {

/// Binary tensor file format "TTEN": magic bytes `TTEN`, version byte 1,
/// unsigned 32-bit mode count (little-endian), one unsigned 64-bit dim per
/// mode, then prod(dims) IEEE-754 doubles (little-endian) in the canonical
/// first-mode-fastest order.
void write_tten(const DenseTensor& t, std::ostream& out);
void write_tten(const DenseTensor& t, const std::filesystem::path& path);

DenseTensor read_tten(std::istream& in);
DenseTensor read_tten(const std::filesystem::path& path);

}  // namespace ttda

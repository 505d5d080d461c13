#pragma once

#include "ttda/labeled_set.hpp"

#include <filesystem>

namespace ttda {

/// Directory of TTEN sample files with a labels.csv mapping filename,class.
/// Samples load in lexicographic filename order; class ids map to contiguous
/// indices in sorted order.
LabeledTensorSet load_tten_dataset(const std::filesystem::path& dir);

/// Writes one TTEN file per sample plus labels.csv.
void save_tten_dataset(const LabeledTensorSet& data, const std::filesystem::path& dir);

/// 8-bit grayscale PGM (P5 binary or P2 ascii, maxval 255) scaled to [0, 1];
/// shape (rows, cols).
DenseTensor load_pgm(const std::filesystem::path& path);

/// Folder of class subdirectories holding PGM files; subdirectories sort to
/// class indices and files load in lexicographic order. A nonempty
/// reshape_to reinterprets each sample (product must match).
LabeledTensorSet load_pgm_dataset(const std::filesystem::path& dir, const Shape& reshape_to = {});

}  // namespace ttda

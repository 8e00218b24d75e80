#pragma once

#include <string>

#include "grng/dataset.hpp"

namespace grng {

enum class FileFormat { Fvecs, Csv };

FileFormat format_from_name(const std::string& name);

/// Guess from the path: .fvecs[.gz] / .csv[.gz]; anything else is an error.
FileFormat format_from_path(const std::string& path);

/// Reads a dataset. Gzip-compressed files are detected by magic and
/// decompressed transparently. fvecs records are a little-endian int32
/// dimension followed by that many float32 values; values are promoted to
/// double. CSV is one row per point, ',' separated, optional header row.
/// Malformed input raises InputError naming the offending record/line.
Dataset load_dataset(const std::string& path, FileFormat format);

/// Writes a dataset. fvecs rounds coordinates to float32 (the format's
/// precision); CSV renders with 17 significant digits so doubles round-trip
/// exactly.
void save_dataset(const Dataset& data, const std::string& path, FileFormat format);

}  // namespace grng

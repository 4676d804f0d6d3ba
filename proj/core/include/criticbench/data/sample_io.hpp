#pragma once

#include <filesystem>
#include <string>

#include "criticbench/data/sample_set.hpp"

namespace criticbench::data {

// Binary sample format (.cbs): magic "CBS1", u32 little-endian n, u32
// little-endian d, u8 role code (0 train, 1 validation, 2 test), u16
// little-endian label length + UTF-8 label bytes, then n*d little-endian
// 64-bit floats row-major. The round trip is bit-exact.
void save_samples(const SampleSet& samples, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

// CSV interoperability: one row per sample, decimal floats, optional header
// row (detected on load by a non-numeric first line). Role and label are not
// stored in the CSV and must be supplied on load.
void save_samples_csv(const SampleSet& samples, const std::filesystem::path& path,
                      bool header = true);
SampleSet load_samples_csv(const std::filesystem::path& path, Role role,
                           const std::string& label);

} // namespace criticbench::data

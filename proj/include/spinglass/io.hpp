#pragma once

// File formats: estimate tables (CSV/JSON), disorder persistence headers
// with optional raw tensor dumps, and binary sample dumps.

#include <filesystem>
#include <string>
#include <vector>

#include "spinglass/hamiltonian.hpp"
#include "spinglass/sampler.hpp"

namespace spinglass {

struct EstimateRow {
    std::string quantity;
    double value = 0;
    double std_error = 0;
    std::string method;
    std::string flags;  // semicolon separated
};

std::string flags_to_string(const std::vector<std::string>& flags);

void write_estimates_csv(const std::filesystem::path& path, const std::vector<EstimateRow>& rows);
void write_estimates_json(const std::filesystem::path& path, const std::vector<EstimateRow>& rows);

// Disorder persistence: JSON header; tensors are regenerated from the seed.
// A raw little-endian float64 dump (degrees ascending, row-major) can be
// written alongside for cross-implementation comparisons.
void save_disorder(const Disorder& d, const std::filesystem::path& json_path,
                   const std::filesystem::path& raw_path = {});
Disorder load_disorder(const std::filesystem::path& json_path);

// Sample dump: ascii header line, then little-endian float64 coordinates,
// row-major points.
void write_samples(const std::filesystem::path& path, const SampleSet& s);
std::vector<Vec> read_samples(const std::filesystem::path& path, int dim);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace spinglass

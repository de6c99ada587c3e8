#ifndef MBDL_RECORD_IO_HPP
#define MBDL_RECORD_IO_HPP

// CSV + JSON sidecar persistence for experiment records and reports.

#include "mbdl/bounds.hpp"
#include "mbdl/dynamics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace mbdl {

/// Header "abscissa,mean,stderr,n", 17 significant digits.
std::string record_csv(const ExperimentRecord& rec);
nlohmann::json record_metadata(const ExperimentRecord& rec);

/// Write to a temporary sibling then rename over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes `csv_path` and its .json sidecar.
void write_record(const ExperimentRecord& rec, const std::filesystem::path& csv_path);
ExperimentRecord read_record(const std::filesystem::path& csv_path);
/// Both files present and readable.
bool record_complete(const std::filesystem::path& csv_path);

nlohmann::json to_json(const SpinLattice& lattice);
nlohmann::json to_json(const CouplingParams& params);
nlohmann::json to_json(const EnergyInterval& interval);
nlohmann::json to_json(const BoundReport& report);
nlohmann::json to_json(const DecayFit& fit);

}  // namespace mbdl

#endif  // MBDL_RECORD_IO_HPP

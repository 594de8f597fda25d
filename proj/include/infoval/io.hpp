#pragma once

#include <string>
#include <vector>

#include "infoval/model.hpp"
#include "infoval/pbvi.hpp"
#include "infoval/scenarios.hpp"

namespace infoval {

inline constexpr const char* kToolVersion = "0.1.0";

/// Fixed 12-significant-digit formatting used by every CSV writer, so that
/// identical runs produce byte-identical files.
std::string format_number(double v);

/// Loads and validates a POMDP instance from a JSON document. Indices in
/// the file are 1-based by convention; tables are nested arrays in the
/// index order transition[x][a][x'], emission_background[x][a][y],
/// emission_additional[x][z], cost_agent[x][a], cost_society[x][a].
/// Throws parse_error for ill-formed documents and invariant_error when a
/// table violates the model invariants.
PomdpModel load_model(const std::string& path);
void save_model(const std::string& path, const PomdpModel& model);

/// Alpha-set document: observation mode plus per-vector id, action (both
/// 1-based in the file) and values.
void save_alpha_set(const std::string& path, const AlphaSet& set);
AlphaSet load_alpha_set(const std::string& path);

/// Scenario document mirroring DeteriorationSpec field names.
DeteriorationSpec load_scenario_spec(const std::string& path);
void save_scenario_spec(const std::string& path,
                        const DeteriorationSpec& spec);

/// Controller document: inner states with representative beliefs and
/// actions, plus the updating map (-1 entries mark unreachable pairs).
void save_controller(const std::string& path, const Controller& ctrl);

/// Dense matrix audit dump (one CSV row per chain row).
void save_chain_csv(const std::string& path, const JointChain& chain);

/// Minimal CSV writer against the shared number format.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::vector<std::string>& names);
    void row(const std::vector<std::string>& cells);
    void row_numeric(const std::vector<double>& cells);

  private:
    struct Impl;
    Impl* impl_;
};

}  // namespace infoval

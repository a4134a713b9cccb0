#pragma once

// Delimited-text ingestion, JSON configs, reports and run records.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pht/harness.hpp"
#include "pht/one_sample.hpp"

namespace pht {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Raised when an input file cannot be opened.
class FileNotFound : public InvalidInput {
public:
    explicit FileNotFound(const std::filesystem::path& path)
        : InvalidInput("cannot open file '" + path.string() + "'") {}
};

/// Header plus raw string cells; every row has header.size() cells.
struct DataTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lineNumbers;  ///< 1-based source line of each row
    char delimiter = ',';
};

/// Reads comma- or tab-separated text with a header row. The delimiter is
/// tab when the header contains a tab, comma otherwise. Blank lines are
/// skipped; ragged rows raise ParseError with the line number.
DataTable read_table(std::istream& in);
DataTable read_table(const std::filesystem::path& path);

/// All columns parsed as finite reals.
SampleMatrix numeric_matrix(const DataTable& table);

struct GroupedData {
    SampleMatrix x;
    SampleMatrix y;
    std::string labelX;  ///< lexicographically smaller label
    std::string labelY;
    std::vector<std::string> columns;
};

/// Splits rows by the named label column, which must hold exactly two
/// distinct labels. The remaining columns are the covariates.
GroupedData split_groups(const DataTable& table, std::string_view groupColumn);

/// One-row table whose header matches `columns` exactly.
Vector read_mu0(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// FNV-1a, 64 bit, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

// ---- simulation configs -------------------------------------------------

/// A simulate document: a SimConfig plus an optional kappa grid, which turns
/// the run into a power curve.
struct SimulationSpec {
    SimConfig config;
    std::optional<std::vector<double>> kappaGrid;

    bool operator==(const SimulationSpec&) const = default;
};

/// Parses the flat snake_case document; unknown keys and bad values raise
/// ConfigError naming the key. Missing keys keep the SimConfig defaults.
SimulationSpec parse_simulation_spec(std::string_view json);
SimulationSpec load_simulation_spec(const std::filesystem::path& path);
std::string simulation_spec_json(const SimulationSpec& spec);

/// Named designs: sigma{1..4}-p{100,500}[-heavy] for size runs and
/// power-sigma{1..4}-p{100,500}[-heavy] for power runs with kappa 0.1 (p = 100) or 0.075 (p = 500).
SimulationSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// Deterministic report text: no timings, fixed key order, shortest
/// round-trip doubles.
std::string sim_report_json(const SimReport& report);
SimReport parse_sim_report(std::string_view json);
std::string power_report_json(const std::vector<SimReport>& reports);

// ---- run records ---------------------------------------------------------

struct RunRecord {
    int schemaVersion = kSchemaVersion;
    std::string toolVersion{kToolVersion};
    std::string command;  ///< "test-one", "test-two" or "simulate"
    std::vector<std::string> argv;
    std::string configHash;
    std::uint64_t seed = 0;
    std::string startedAt;
    std::string finishedAt;
    std::variant<std::monostate, TestOutcome, SimReport> result;

    bool operator==(const RunRecord&) const = default;
};

std::string run_record_json(const RunRecord& record);
RunRecord parse_run_record(std::string_view json);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace pht

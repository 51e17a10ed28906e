#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spdc/detector.hpp"
#include "spdc/sweep.hpp"

// Measurement and fit record files (CSV or JSON).
namespace spdc {

enum class RecordLayout { Single, Dual };

std::string to_string(RecordLayout layout);

using MeasurementRecord = std::variant<MeasuredRatesSingle, MeasuredRatesDual>;

struct MeasurementRow {
    std::size_t index = 0;  // 1-based data row
    std::string label;      // kept for malformed rows too
    std::optional<MeasurementRecord> record;
    bool d_c_missing = false;  // empty D_c field: caller supplies a default
    bool has_integration = false;
    std::string error;         // non-empty when the row is malformed
};

struct MeasurementTable {
    RecordLayout layout = RecordLayout::Single;
    std::vector<MeasurementRow> rows;
};

// Columns: single (label, R_t, R_c, D, D_c, dt_s), dual (label, R_a, R_b,
// R_c, D_a, D_b, D_c, dt_s). dt_s is the coincidence window in seconds; an
// optional integration_s column carries the integration time. Unknown
// columns are ignored. A missing required column throws ConfigError; a bad
// value only marks its row.
MeasurementTable parse_measurements_csv(const std::string& text);
// {"layout": "single"|"dual", "records": [{...}, ...]} with the CSV column
// names as keys.
MeasurementTable parse_measurements_json(const nlohmann::json& doc);
MeasurementTable parse_measurements(const std::string& text);

std::string measurement_csv_header(RecordLayout layout);
std::string measurement_csv_row(const MeasurementRecord& record);

// Fit records: label, xi_p, xi_a, xi_b (may be empty), quantity, rate.
std::vector<FitRecord> parse_fit_records_csv(const std::string& text);
std::vector<FitRecord> parse_fit_records_json(const nlohmann::json& doc);
std::vector<FitRecord> parse_fit_records(const std::string& text);
std::string fit_records_csv(const std::vector<FitRecord>& records);

// Both throw IoError on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace spdc

#include "spdc/records.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/format.hpp"

namespace spdc {

namespace {

const std::vector<std::string> kSingleColumns = {"label", "R_t", "R_c", "D", "D_c", "dt_s"};
const std::vector<std::string> kDualColumns = {"label", "R_a", "R_b", "R_c",
                                               "D_a",   "D_b", "D_c", "dt_s"};
const std::vector<std::string> kFitColumns = {"label", "xi_p", "xi_a", "xi_b", "quantity", "rate"};

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

// Non-blank, non-comment lines.
std::vector<std::string> data_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

using Row = std::map<std::string, std::string>;

// Field getters shared by CSV rows and JSON objects (converted to strings).
double required_number(const Row& row, const std::string& key) {
    const auto it = row.find(key);
    if (it == row.end() || trim(it->second).empty()) {
        throw DataQualityError("missing value for " + key);
    }
    try {
        return parse_double(it->second, key);
    } catch (const ConfigError& e) {
        throw DataQualityError(e.what());
    }
}

std::optional<double> optional_number(const Row& row, const std::string& key) {
    const auto it = row.find(key);
    if (it == row.end() || trim(it->second).empty()) return std::nullopt;
    try {
        return parse_double(it->second, key);
    } catch (const ConfigError& e) {
        throw DataQualityError(e.what());
    }
}

MeasurementRow row_to_measurement(const Row& row, RecordLayout layout, std::size_t index) {
    MeasurementRow out;
    out.index = index;
    try {
        const auto label_it = row.find("label");
        const std::string label = label_it == row.end() ? "" : trim(label_it->second);
        out.label = label;
        const auto d_c = optional_number(row, "D_c");
        out.d_c_missing = !d_c.has_value();
        const double window = required_number(row, "dt_s");
        if (!(window >= 0.0)) throw DataQualityError("dt_s must be >= 0");
        const auto integration = optional_number(row, "integration_s");
        out.has_integration = integration.has_value();
        if (integration && !(*integration > 0.0)) {
            throw DataQualityError("integration_s must be > 0");
        }
        if (layout == RecordLayout::Single) {
            MeasuredRatesSingle m;
            m.label = label;
            m.R_t = required_number(row, "R_t");
            m.R_c = required_number(row, "R_c");
            m.D = required_number(row, "D");
            m.D_c = d_c.value_or(0.0);
            m.window_s = window;
            if (integration) m.integration_s = *integration;
            out.record = m;
        } else {
            MeasuredRatesDual m;
            m.label = label;
            m.R_a = required_number(row, "R_a");
            m.R_b = required_number(row, "R_b");
            m.R_c = required_number(row, "R_c");
            m.D_a = required_number(row, "D_a");
            m.D_b = required_number(row, "D_b");
            m.D_c = d_c.value_or(0.0);
            m.window_s = window;
            if (integration) m.integration_s = *integration;
            out.record = m;
        }
    } catch (const Error& e) {
        out.record.reset();
        out.error = e.what();
    }
    return out;
}

RecordLayout layout_from_columns(const std::vector<std::string>& cols) {
    auto has = [&](const char* c) { return std::find(cols.begin(), cols.end(), c) != cols.end(); };
    const bool single = has("R_t");
    const bool dual = has("R_a") || has("R_b");
    if (single == dual) {
        throw ConfigError("measurement columns match neither the single (R_t) nor dual (R_a, R_b) schema");
    }
    const auto layout = single ? RecordLayout::Single : RecordLayout::Dual;
    for (const auto& req : layout == RecordLayout::Single ? kSingleColumns : kDualColumns) {
        if (!has(req.c_str())) throw ConfigError("measurement file lacks column '" + req + "'");
    }
    return layout;
}

std::string json_scalar_text(const nlohmann::json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return format_double(v.get<double>());
    return v.dump();
}

Row json_to_row(const nlohmann::json& obj) {
    if (!obj.is_object()) throw ConfigError("each record must be a JSON object");
    Row row;
    for (const auto& [k, v] : obj.items()) row[k] = json_scalar_text(v);
    return row;
}

std::vector<std::string> header_of(const std::string& line) {
    auto cols = split_csv_line(line);
    for (auto& c : cols) c = trim(c);
    return cols;
}

FitRecord row_to_fit(const Row& row, std::size_t index) {
    try {
        FitRecord r;
        const auto label_it = row.find("label");
        r.label = label_it == row.end() ? "" : trim(label_it->second);
        r.xi_p = required_number(row, "xi_p");
        r.xi_a = required_number(row, "xi_a");
        r.xi_b = optional_number(row, "xi_b");
        const auto q = row.find("quantity");
        r.quantity = rate_quantity_from_string(q == row.end() ? "R_c" : trim(q->second));
        r.measured = required_number(row, "rate");
        return r;
    } catch (const Error& e) {
        throw ConfigError("fit record " + std::to_string(index) + ": " + e.what());
    }
}

bool looks_like_json(const std::string& text) {
    const auto pos = text.find_first_not_of(" \t\r\n");
    return pos != std::string::npos && (text[pos] == '{' || text[pos] == '[');
}

}  // namespace

std::string to_string(RecordLayout layout) {
    return layout == RecordLayout::Single ? "single" : "dual";
}

MeasurementTable parse_measurements_csv(const std::string& text) {
    const auto lines = data_lines(text);
    if (lines.empty()) throw ConfigError("empty measurement file");
    const auto cols = header_of(lines.front());
    MeasurementTable table;
    table.layout = layout_from_columns(cols);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != cols.size()) {
            MeasurementRow bad;
            bad.index = i;
            if (!fields.empty()) {
                const auto it = std::find(cols.begin(), cols.end(), "label");
                const auto at = static_cast<std::size_t>(it - cols.begin());
                if (it != cols.end() && at < fields.size()) bad.label = trim(fields[at]);
            }
            bad.error = "expected " + std::to_string(cols.size()) + " fields, found " +
                        std::to_string(fields.size());
            table.rows.push_back(bad);
            continue;
        }
        Row row;
        for (std::size_t c = 0; c < cols.size(); ++c) row[cols[c]] = fields[c];
        table.rows.push_back(row_to_measurement(row, table.layout, i));
    }
    return table;
}

MeasurementTable parse_measurements_json(const nlohmann::json& doc) {
    const nlohmann::json* records = &doc;
    std::optional<RecordLayout> layout;
    if (doc.is_object()) {
        if (!doc.contains("records")) throw ConfigError("measurement JSON needs a 'records' array");
        records = &doc.at("records");
        if (doc.contains("layout")) {
            const auto id = doc.at("layout").get<std::string>();
            if (id == "single") {
                layout = RecordLayout::Single;
            } else if (id == "dual") {
                layout = RecordLayout::Dual;
            } else {
                throw ConfigError("unknown measurement layout '" + id + "'");
            }
        }
    }
    if (!records->is_array()) throw ConfigError("measurement records must be an array");
    if (records->empty()) throw ConfigError("empty measurement file");
    MeasurementTable table;
    if (!layout) {
        std::vector<std::string> keys;
        for (const auto& [k, v] : records->front().items()) keys.push_back(k);
        layout = layout_from_columns(keys);
    }
    table.layout = *layout;
    std::size_t i = 0;
    for (const auto& obj : *records) {
        ++i;
        try {
            table.rows.push_back(row_to_measurement(json_to_row(obj), table.layout, i));
        } catch (const ConfigError& e) {
            MeasurementRow bad;
            bad.index = i;
            bad.error = e.what();
            table.rows.push_back(bad);
        }
    }
    return table;
}

MeasurementTable parse_measurements(const std::string& text) {
    if (looks_like_json(text)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed measurement JSON: ") + e.what());
        }
        return parse_measurements_json(doc);
    }
    return parse_measurements_csv(text);
}

std::string measurement_csv_header(RecordLayout layout) {
    std::string s;
    for (const auto& c : layout == RecordLayout::Single ? kSingleColumns : kDualColumns) {
        if (!s.empty()) s += ',';
        s += c;
    }
    return s + ",integration_s";
}

std::string measurement_csv_row(const MeasurementRecord& record) {
    std::string s;
    auto num = [&](double v) {
        s += ',';
        s += format_double(v);
    };
    if (const auto* m = std::get_if<MeasuredRatesSingle>(&record)) {
        s = csv_field(m->label);
        for (double v : {m->R_t, m->R_c, m->D, m->D_c, m->window_s, m->integration_s}) num(v);
    } else {
        const auto& d = std::get<MeasuredRatesDual>(record);
        s = csv_field(d.label);
        for (double v : {d.R_a, d.R_b, d.R_c, d.D_a, d.D_b, d.D_c, d.window_s, d.integration_s}) {
            num(v);
        }
    }
    return s;
}

std::vector<FitRecord> parse_fit_records_csv(const std::string& text) {
    const auto lines = data_lines(text);
    if (lines.empty()) throw ConfigError("empty fit record file");
    const auto cols = header_of(lines.front());
    for (const char* req : {"xi_p", "xi_a", "rate"}) {
        if (std::find(cols.begin(), cols.end(), req) == cols.end()) {
            throw ConfigError(std::string("fit record file lacks column '") + req + "'");
        }
    }
    std::vector<FitRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != cols.size()) {
            throw ConfigError("fit record " + std::to_string(i) + ": expected " +
                              std::to_string(cols.size()) + " fields");
        }
        Row row;
        for (std::size_t c = 0; c < cols.size(); ++c) row[cols[c]] = fields[c];
        out.push_back(row_to_fit(row, i));
    }
    if (out.empty()) throw ConfigError("fit record file has no records");
    return out;
}

std::vector<FitRecord> parse_fit_records_json(const nlohmann::json& doc) {
    const nlohmann::json& arr = doc.is_object() && doc.contains("records") ? doc.at("records") : doc;
    if (!arr.is_array()) throw ConfigError("fit records must be an array");
    std::vector<FitRecord> out;
    std::size_t i = 0;
    for (const auto& obj : arr) out.push_back(row_to_fit(json_to_row(obj), ++i));
    if (out.empty()) throw ConfigError("fit record file has no records");
    return out;
}

std::vector<FitRecord> parse_fit_records(const std::string& text) {
    if (looks_like_json(text)) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed fit record JSON: ") + e.what());
        }
        return parse_fit_records_json(doc);
    }
    return parse_fit_records_csv(text);
}

std::string fit_records_csv(const std::vector<FitRecord>& records) {
    std::string s;
    for (const auto& c : kFitColumns) s += (s.empty() ? "" : ",") + c;
    s += '\n';
    for (const auto& r : records) {
        s += csv_field(r.label) + ',' + format_double(r.xi_p) + ',' + format_double(r.xi_a) + ',';
        if (r.xi_b) s += format_double(*r.xi_b);
        s += ',' + to_string(r.quantity) + ',' + format_double(r.measured) + '\n';
    }
    return s;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error while reading '" + path + "'");
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace spdc

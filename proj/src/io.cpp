#include "pht/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pht {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& cell : out) {
        const auto first = cell.find_first_not_of(" \t");
        const auto last = cell.find_last_not_of(" \t");
        cell = first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1);
    }
    return out;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line) + ", column '" + column +
                             "': expected a finite number, got '" + cell + "'",
                         line);
    }
    return v;
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_of_offset(text, e.byte));
    }
}

}  // namespace

DataTable read_table(std::istream& in) {
    DataTable table;
    std::string line;
    std::size_t lineNo = 0;
    bool haveHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        if (!haveHeader) {
            table.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
            table.header = split_line(line, table.delimiter);
            std::set<std::string> seen;
            for (const auto& name : table.header) {
                if (name.empty()) throw ParseError("line " + std::to_string(lineNo) + ": empty column name", lineNo);
                if (!seen.insert(name).second) {
                    throw ParseError("line " + std::to_string(lineNo) + ": duplicate column '" + name + "'",
                                     lineNo);
                }
            }
            haveHeader = true;
            continue;
        }
        auto cells = split_line(line, table.delimiter);
        if (cells.size() != table.header.size()) {
            throw ParseError("line " + std::to_string(lineNo) + ": expected " +
                                 std::to_string(table.header.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             lineNo);
        }
        table.rows.push_back(std::move(cells));
        table.lineNumbers.push_back(lineNo);
    }
    if (!haveHeader) throw ParseError("empty input: a header row is required", 1);
    return table;
}

DataTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path);
    return read_table(in);
}

SampleMatrix numeric_matrix(const DataTable& table) {
    if (table.rows.empty()) throw InvalidInput("no data rows");
    Matrix m(static_cast<Eigen::Index>(table.rows.size()),
             static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(table.rows[r][c], table.lineNumbers[r], table.header[c]);
        }
    }
    return SampleMatrix(std::move(m));
}

GroupedData split_groups(const DataTable& table, std::string_view groupColumn) {
    const auto it = std::find(table.header.begin(), table.header.end(), groupColumn);
    if (it == table.header.end()) {
        throw InvalidInput("group column '" + std::string(groupColumn) + "' not found in header");
    }
    const auto g = static_cast<std::size_t>(it - table.header.begin());
    std::set<std::string> labels;
    for (const auto& row : table.rows) labels.insert(row[g]);
    if (labels.size() != 2) {
        std::string list;
        for (const auto& l : labels) list += (list.empty() ? "" : ", ") + l;
        throw InvalidInput("group column '" + std::string(groupColumn) + "' must hold exactly 2 labels, found " +
                           std::to_string(labels.size()) + (list.empty() ? "" : " (" + list + ")"));
    }
    GroupedData out;
    out.labelX = *labels.begin();
    out.labelY = *std::next(labels.begin());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c != g) out.columns.push_back(table.header[c]);
    }
    if (out.columns.empty()) throw InvalidInput("no covariate columns besides the group column");

    std::vector<std::vector<double>> xs, ys;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        std::vector<double> values;
        values.reserve(out.columns.size());
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == g) continue;
            values.push_back(parse_cell(table.rows[r][c], table.lineNumbers[r], table.header[c]));
        }
        (table.rows[r][g] == out.labelX ? xs : ys).push_back(std::move(values));
    }
    auto to_matrix = [&](const std::vector<std::vector<double>>& rows) {
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.columns.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < rows[r].size(); ++c) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
        return SampleMatrix(std::move(m));
    };
    out.x = to_matrix(xs);
    out.y = to_matrix(ys);
    return out;
}

Vector read_mu0(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    const DataTable t = read_table(path);
    if (t.header != columns) {
        throw InvalidInput("mu0 header does not match the data header (" + std::to_string(t.header.size()) +
                           " vs " + std::to_string(columns.size()) + " columns)");
    }
    if (t.rows.size() != 1) {
        throw InvalidInput("mu0 file must hold exactly one data row, found " + std::to_string(t.rows.size()));
    }
    const SampleMatrix m = numeric_matrix(t);
    return m.row(0).transpose();
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- simulation configs -------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "preset", "n1",    "n2",    "p",     "model", "rho",     "block_size",  "scale",
        "dist",   "pareto_a", "pareto_b", "kappa", "beta", "alpha", "reps",  "tau0",
        "methods", "seed", "n_resamples", "weighting", "centering", "kappa_grid"};
    return keys;
}

std::size_t get_count(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    if (v.is_number_integer()) throw ConfigError(key, "must be non-negative");
    throw ConfigError(key, "expected a non-negative integer");
}

double get_number(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

std::string_view weighting_name(PooledWeighting w) {
    return w == PooledWeighting::Verbatim ? "verbatim" : "dof";
}

std::string_view centering_name(Centering c) { return c == Centering::None ? "none" : "pooled"; }

json config_to_json(const SimConfig& c) {
    json j = json::object();
    j["n1"] = c.n1;
    j["n2"] = c.n2;
    j["p"] = c.p;
    j["model"] = to_string(c.model.kind);
    j["rho"] = c.model.rho;
    j["block_size"] = c.model.blockSize;
    j["scale"] = c.model.scale == ScaleMode::Uniform ? "uniform" : "unit";
    j["dist"] = to_string(c.dist.kind);
    j["pareto_a"] = c.dist.a;
    j["pareto_b"] = c.dist.b;
    j["kappa"] = c.mean.kappa;
    j["beta"] = c.mean.beta;
    j["alpha"] = c.alpha;
    j["reps"] = c.reps;
    if (c.tau0.fixed) {
        j["tau0"] = *c.tau0.fixed;
    } else {
        j["tau0"] = "auto";
    }
    json methods = json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    j["methods"] = methods;
    j["seed"] = c.seed;
    j["n_resamples"] = c.nResamples;
    j["weighting"] = weighting_name(c.weighting);
    j["centering"] = centering_name(c.centering);
    return j;
}

void apply_config(const json& doc, SimConfig& c) {
    for (const auto& [key, _] : doc.items()) {
        if (!known_keys().contains(key)) throw ConfigError(key, "unknown key");
    }
    if (doc.contains("n1")) c.n1 = get_count(doc, "n1");
    if (doc.contains("n2")) c.n2 = get_count(doc, "n2");
    if (doc.contains("p")) c.p = get_count(doc, "p");
    if (doc.contains("model")) c.model.kind = cov_kind_from_string(get_string(doc, "model"));
    if (doc.contains("rho")) c.model.rho = get_number(doc, "rho");
    if (doc.contains("block_size")) c.model.blockSize = get_count(doc, "block_size");
    if (doc.contains("scale")) {
        const std::string s = get_string(doc, "scale");
        if (s == "uniform") {
            c.model.scale = ScaleMode::Uniform;
        } else if (s == "unit") {
            c.model.scale = ScaleMode::Unit;
        } else {
            throw ConfigError("scale", "expected \"uniform\" or \"unit\"");
        }
    }
    if (doc.contains("dist")) c.dist.kind = innovation_from_string(get_string(doc, "dist"));
    if (doc.contains("pareto_a")) c.dist.a = get_number(doc, "pareto_a");
    if (doc.contains("pareto_b")) c.dist.b = get_number(doc, "pareto_b");
    if (doc.contains("kappa")) c.mean.kappa = get_number(doc, "kappa");
    if (doc.contains("beta")) c.mean.beta = get_number(doc, "beta");
    if (doc.contains("alpha")) c.alpha = get_number(doc, "alpha");
    if (doc.contains("reps")) c.reps = get_count(doc, "reps");
    if (doc.contains("tau0")) {
        const json& v = doc.at("tau0");
        if (v.is_string() && v.get<std::string>() == "auto") {
            c.tau0 = Tau0Choice::automatic();
        } else if (v.is_number()) {
            c.tau0 = Tau0Choice::value(v.get<double>());
        } else {
            throw ConfigError("tau0", "expected a number or \"auto\"");
        }
    }
    if (doc.contains("methods")) {
        const json& v = doc.at("methods");
        if (!v.is_array()) throw ConfigError("methods", "expected a list of method names");
        c.methods.clear();
        for (const json& m : v) {
            if (!m.is_string()) throw ConfigError("methods", "expected a list of method names");
            c.methods.push_back(method_from_string(m.get<std::string>()));
        }
    }
    if (doc.contains("seed")) c.seed = get_count(doc, "seed");
    if (doc.contains("n_resamples")) c.nResamples = get_count(doc, "n_resamples");
    if (doc.contains("weighting")) {
        const std::string s = get_string(doc, "weighting");
        if (s == "verbatim") {
            c.weighting = PooledWeighting::Verbatim;
        } else if (s == "dof") {
            c.weighting = PooledWeighting::DegreesOfFreedom;
        } else {
            throw ConfigError("weighting", "expected \"verbatim\" or \"dof\"");
        }
    }
    if (doc.contains("centering")) {
        const std::string s = get_string(doc, "centering");
        if (s == "none") {
            c.centering = Centering::None;
        } else if (s == "pooled") {
            c.centering = Centering::Pooled;
        } else {
            throw ConfigError("centering", "expected \"none\" or \"pooled\"");
        }
    }
    c.model.p = c.p;
}

json summary_to_json(const MethodSummary& s) {
    json j = json::object();
    j["method"] = to_string(s.method);
    j["reps"] = s.reps;
    j["rejections"] = s.rejections;
    j["failures"] = s.failures;
    j["rate"] = s.rate;
    j["mc_se"] = s.mcSe;
    j["rejected"] = s.rejected;
    j["p_values"] = s.pValues;
    j["z"] = s.z;
    j["tau0_used"] = s.tau0Used;
    return j;
}

MethodSummary summary_from_json(const json& j) {
    MethodSummary s;
    s.method = method_from_string(j.at("method").get<std::string>());
    s.reps = j.at("reps").get<std::size_t>();
    s.rejections = j.at("rejections").get<std::size_t>();
    s.failures = j.at("failures").get<std::size_t>();
    s.rate = j.at("rate").get<double>();
    s.mcSe = j.at("mc_se").get<double>();
    s.rejected = j.at("rejected").get<std::vector<std::uint8_t>>();
    s.pValues = j.at("p_values").get<std::vector<double>>();
    s.z = j.at("z").get<std::vector<double>>();
    s.tau0Used = j.at("tau0_used").get<std::vector<double>>();
    return s;
}

json report_to_json(const SimReport& r) {
    json j = json::object();
    j["schema"] = "pht.sim-report";
    j["version"] = kSchemaVersion;
    j["config"] = config_to_json(r.config);
    json methods = json::array();
    for (const auto& s : r.methods) methods.push_back(summary_to_json(s));
    j["methods"] = methods;
    return j;
}

SimReport report_from_json(const json& j) {
    if (j.value("schema", std::string{}) != "pht.sim-report") throw InvalidInput("not a simulation report");
    SimReport r;
    apply_config(j.at("config"), r.config);
    for (const json& m : j.at("methods")) r.methods.push_back(summary_from_json(m));
    return r;
}

json outcome_to_json(const TestOutcome& o) {
    json j = json::object();
    j["statistic"] = o.statistic;
    j["trace_hat"] = o.traceHat;
    j["z"] = o.z;
    j["p_value"] = o.pValue;
    j["tau0_used"] = o.tau0Used;
    j["n_pairs"] = o.nPairs;
    j["n_singles"] = o.nSingles;
    return j;
}

TestOutcome outcome_from_json(const json& j) {
    TestOutcome o;
    o.statistic = j.at("statistic").get<double>();
    o.traceHat = j.at("trace_hat").get<double>();
    o.z = j.at("z").get<double>();
    o.pValue = j.at("p_value").get<double>();
    o.tau0Used = j.at("tau0_used").get<double>();
    o.nPairs = j.at("n_pairs").get<std::size_t>();
    o.nSingles = j.at("n_singles").get<std::size_t>();
    return o;
}

}  // namespace

SimulationSpec parse_simulation_spec(std::string_view text) {
    const json doc = parse_json(text);
    if (!doc.is_object()) throw ConfigError("(document)", "expected a JSON object");
    SimulationSpec spec;
    if (doc.contains("preset")) spec = preset(get_string(doc, "preset"));
    apply_config(doc, spec.config);
    if (doc.contains("kappa_grid")) {
        const json& v = doc.at("kappa_grid");
        if (!v.is_array() || v.empty()) throw ConfigError("kappa_grid", "expected a non-empty list of numbers");
        std::vector<double> grid;
        for (const json& k : v) {
            if (!k.is_number()) throw ConfigError("kappa_grid", "expected a non-empty list of numbers");
            grid.push_back(k.get<double>());
        }
        spec.kappaGrid = std::move(grid);
    }
    spec.config.validate();
    return spec;
}

SimulationSpec load_simulation_spec(const std::filesystem::path& path) {
    return parse_simulation_spec(read_text_file(path));
}

std::string simulation_spec_json(const SimulationSpec& spec) {
    json j = config_to_json(spec.config);
    if (spec.kappaGrid) j["kappa_grid"] = *spec.kappaGrid;
    return j.dump(2) + "\n";
}

namespace {

struct PresetShape {
    CovKind kind;
    std::size_t p;
    bool heavy;
    bool power;
};

std::map<std::string, PresetShape> preset_table() {
    std::map<std::string, PresetShape> out;
    const CovKind kinds[] = {CovKind::AR, CovKind::AlternatingAR, CovKind::BlockCS, CovKind::Diagonal};
    for (int k = 0; k < 4; ++k) {
        for (std::size_t p : {std::size_t{100}, std::size_t{500}}) {
            for (bool heavy : {false, true}) {
                for (bool power : {false, true}) {
                    std::string name = std::string(power ? "power-" : "") + "sigma" + std::to_string(k + 1) +
                                       "-p" + std::to_string(p) + (heavy ? "-heavy" : "");
                    out.emplace(std::move(name), PresetShape{kinds[k], p, heavy, power});
                }
            }
        }
    }
    return out;
}

}  // namespace

SimulationSpec preset(std::string_view name) {
    const auto table = preset_table();
    const auto it = table.find(std::string(name));
    if (it == table.end()) throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
    const PresetShape& s = it->second;
    SimulationSpec spec;
    SimConfig& c = spec.config;
    c.n1 = 30;
    c.n2 = 25;
    c.p = s.p;
    c.model.kind = s.kind;
    c.model.p = s.p;
    c.dist.kind = s.heavy ? InnovationKind::DoublePareto : InnovationKind::StandardNormal;
    c.tau0 = Tau0Choice::value(0.8);
    c.reps = 1000;
    if (s.power) {
        const double kappa = s.p == 100 ? 0.1 : 0.075;
        c.mean.beta = 0.4;
        c.methods = {Method::PHT, Method::UHT, Method::DHT};
        spec.kappaGrid = std::vector<double>{0.0, 0.5 * kappa, kappa, 1.5 * kappa, 2.0 * kappa};
    }
    return spec;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : preset_table()) out.push_back(name);
    return out;
}

std::string sim_report_json(const SimReport& report) { return report_to_json(report).dump(2) + "\n"; }

SimReport parse_sim_report(std::string_view text) { return report_from_json(parse_json(text)); }

std::string power_report_json(const std::vector<SimReport>& reports) {
    json j = json::object();
    j["schema"] = "pht.sim-power";
    j["version"] = kSchemaVersion;
    json list = json::array();
    for (const auto& r : reports) list.push_back(report_to_json(r));
    j["reports"] = list;
    return j.dump(2) + "\n";
}

// ---- run records ---------------------------------------------------------

std::string run_record_json(const RunRecord& record) {
    json j = json::object();
    j["schema"] = "pht.run-record";
    j["version"] = record.schemaVersion;
    j["tool_version"] = record.toolVersion;
    j["command"] = record.command;
    j["argv"] = record.argv;
    j["config_hash"] = record.configHash;
    j["seed"] = record.seed;
    j["started_at"] = record.startedAt;
    j["finished_at"] = record.finishedAt;
    if (const auto* o = std::get_if<TestOutcome>(&record.result)) {
        j["outcome"] = outcome_to_json(*o);
    } else if (const auto* r = std::get_if<SimReport>(&record.result)) {
        j["report"] = report_to_json(*r);
        j["wall_seconds"] = r->wallSeconds;
    }
    return j.dump(2) + "\n";
}

RunRecord parse_run_record(std::string_view text) {
    const json j = parse_json(text);
    try {
        if (j.at("schema").get<std::string>() != "pht.run-record") throw InvalidInput("not a run record");
        RunRecord r;
        r.schemaVersion = j.at("version").get<int>();
        if (r.schemaVersion > kSchemaVersion) {
            throw InvalidInput("run record version " + std::to_string(r.schemaVersion) + " is newer than supported");
        }
        r.toolVersion = j.at("tool_version").get<std::string>();
        r.command = j.at("command").get<std::string>();
        r.argv = j.at("argv").get<std::vector<std::string>>();
        r.configHash = j.at("config_hash").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.startedAt = j.at("started_at").get<std::string>();
        r.finishedAt = j.at("finished_at").get<std::string>();
        if (j.contains("outcome")) {
            r.result = outcome_from_json(j.at("outcome"));
        } else if (j.contains("report")) {
            SimReport rep = report_from_json(j.at("report"));
            rep.wallSeconds = j.at("wall_seconds").get<double>();
            r.result = std::move(rep);
        }
        return r;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed run record: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InvalidInput("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pht

#include "disorder/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "disorder/errors.hpp"

namespace disorder {

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) throw InputError(fmt::format("model file is missing field '{}'", name));
    return *it;
}

double number_field(const json& doc, const char* name) {
    const auto& v = field(doc, name);
    if (!v.is_number()) throw InputError(fmt::format("model field '{}' must be a number", name));
    return v.get<double>();
}

int integer_field(const json& doc, const char* name) {
    const auto& v = field(doc, name);
    if (!v.is_number_integer()) throw InputError(fmt::format("model field '{}' must be an integer", name));
    return v.get<int>();
}

MarkovKernel matrix_field(const json& doc, const char* name) {
    const auto& v = field(doc, name);
    if (!v.is_array()) throw InputError(fmt::format("model field '{}' must be a matrix", name));
    std::vector<std::vector<double>> rows;
    for (const auto& row : v) {
        if (!row.is_array()) throw InputError(fmt::format("model field '{}' must be a matrix", name));
        auto& out = rows.emplace_back();
        for (const auto& x : row) {
            if (!x.is_number()) throw InputError(fmt::format("model field '{}' has a non-numeric entry", name));
            out.push_back(x.get<double>());
        }
    }
    try {
        return MarkovKernel(rows);
    } catch (const InputError& e) {
        throw InputError(fmt::format("{}: {}", name, e.what()));
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string quoted(const std::string& s) { return json(s).dump(); }

std::string optional_number(const std::optional<double>& v) { return v ? json_number(*v) : "null"; }

}  // namespace

std::string json_number(double v) {
    if (!std::isfinite(v)) return "null";
    return fmt::format("{:.16e}", v);
}

std::string json_string(const std::string& s) { return quoted(s); }

DisorderModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(fmt::format("model file is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw InputError("model file must hold a JSON object");

    DisorderModel model;
    model.prior.pi = number_field(doc, "pi");
    model.prior.p = number_field(doc, "p");
    model.window.d1 = integer_field(doc, "d1");
    model.window.d2 = integer_field(doc, "d2");
    const auto& states = field(doc, "states");
    if (!states.is_array()) throw InputError("model field 'states' must be an array of labels");
    for (const auto& s : states) {
        if (!s.is_string()) throw InputError("state labels must be strings");
        model.states.push_back(s.get<std::string>());
    }
    model.kernel0 = matrix_field(doc, "P0");
    model.kernel1 = matrix_field(doc, "P1");
    const auto& x0 = field(doc, "x0");
    if (!x0.is_string()) throw InputError("model field 'x0' must be a state label");
    const auto label = x0.get<std::string>();
    const auto it = std::find(model.states.begin(), model.states.end(), label);
    model.x0 = static_cast<State>(it - model.states.begin());
    return model;
}

DisorderModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read model file '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

void write_model(std::ostream& out, const DisorderModel& model) {
    auto matrix = [&](const MarkovKernel& k) {
        std::string s = "[";
        for (std::size_t x = 0; x < k.size(); ++x) {
            s += x ? ",\n    [" : "\n    [";
            auto row = k.row(static_cast<State>(x));
            for (std::size_t y = 0; y < row.size(); ++y) s += (y ? ", " : "") + json_number(row[y]);
            s += "]";
        }
        return s + "\n  ]";
    };
    std::string labels;
    for (std::size_t i = 0; i < model.states.size(); ++i) labels += (i ? ", " : "") + quoted(model.states[i]);
    out << "{\n"
        << "  \"pi\": " << json_number(model.prior.pi) << ",\n"
        << "  \"p\": " << json_number(model.prior.p) << ",\n"
        << "  \"d1\": " << model.window.d1 << ",\n"
        << "  \"d2\": " << model.window.d2 << ",\n"
        << "  \"states\": [" << labels << "],\n"
        << "  \"P0\": " << matrix(model.kernel0) << ",\n"
        << "  \"P1\": " << matrix(model.kernel1) << ",\n"
        << "  \"x0\": " << quoted(model.label(model.x0)) << "\n"
        << "}\n";
}

void write_threshold_table(std::ostream& out, const ThresholdTable& table, const DisorderModel& model) {
    out << "# disorder threshold table v1\n"
        << fmt::format("model_hash {:016x}\n", table.model_hash)
        << fmt::format("d1 {}\nd2 {}\nnum_states {}\n", table.d1, table.d2, table.num_states)
        << fmt::format("tolerance {:.17g}\n", table.tolerance)
        << fmt::format("iterations {}\n", table.iteration)
        << fmt::format("converged {}\n", table.converged ? "true" : "false")
        << fmt::format("sup_delta {:.17g}\n", table.sup_delta)
        << fmt::format("records {}\n", table.values.size());
    for (std::size_t i = 0; i < table.values.size(); ++i) {
        for (State s : table.tuple(i)) out << model.label(s) << ' ';
        out << fmt::format("{:.17g}\n", table.values[i]);
    }
}

ThresholdTable read_threshold_table(std::istream& in, const DisorderModel& model) {
    ThresholdTable table;
    std::size_t records = 0;
    std::map<std::string, std::string> header;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key, value;
        ls >> key >> value;
        header[key] = value;
        if (key == "records") break;
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = header.find(key);
        if (it == header.end()) throw InputError(fmt::format("threshold table is missing '{}'", key));
        return it->second;
    };
    try {
        table.model_hash = std::stoull(need("model_hash"), nullptr, 16);
        table.d1 = std::stoi(need("d1"));
        table.d2 = std::stoi(need("d2"));
        table.num_states = std::stoull(need("num_states"));
        table.tolerance = std::stod(need("tolerance"));
        table.iteration = std::stoll(need("iterations"));
        table.sup_delta = std::stod(need("sup_delta"));
        records = std::stoull(need("records"));
    } catch (const std::logic_error&) {
        throw InputError("threshold table header has a malformed value");
    }
    table.converged = need("converged") == "true";
    if (table.d1 != model.window.d1 || table.num_states != model.num_states()) {
        throw ConfigError("threshold table does not fit the model");
    }
    std::size_t expected = 1;
    for (std::size_t i = 0; i < table.tuple_length(); ++i) expected *= table.num_states;
    if (records != expected) {
        throw ConfigError(fmt::format("threshold table has {} records, expected {}", records, expected));
    }
    table.values.assign(records, std::numeric_limits<double>::quiet_NaN());
    std::vector<State> tuple(table.tuple_length());
    for (std::size_t r = 0; r < records; ++r) {
        if (!std::getline(in, line)) throw InputError("threshold table ends early");
        ++line_no;
        std::istringstream ls(line);
        for (auto& s : tuple) {
            std::string label;
            if (!(ls >> label)) throw InputError(fmt::format("threshold table line {} is truncated", line_no));
            s = model.state_index(label);
        }
        std::string value;
        if (!(ls >> value)) throw InputError(fmt::format("threshold table line {} has no value", line_no));
        const auto idx = table.index(tuple);
        if (!std::isnan(table.values[idx])) {
            throw InputError(fmt::format("threshold table line {} repeats a tuple", line_no));
        }
        try {
            table.values[idx] = std::stod(value);
        } catch (const std::logic_error&) {
            throw InputError(fmt::format("threshold table line {} has a malformed value", line_no));
        }
    }
    return table;
}

ThresholdTable load_threshold_table(const std::filesystem::path& path, const DisorderModel& model) {
    std::ifstream in(path);
    if (!in) throw InputError(fmt::format("cannot read threshold table '{}'", path.string()));
    return read_threshold_table(in, model);
}

std::vector<State> read_observations(std::istream& in, const DisorderModel& model) {
    std::vector<State> out;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    const bool header_possible =
        std::find(model.states.begin(), model.states.end(), "x") == model.states.end();
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (first && header_possible && line == "x") {
            first = false;
            continue;
        }
        first = false;
        const auto it = std::find(model.states.begin(), model.states.end(), line);
        if (it == model.states.end()) {
            throw InputError(fmt::format("line {}: '{}' is not a state of the model", line_no, line));
        }
        out.push_back(static_cast<State>(it - model.states.begin()));
    }
    return out;
}

void write_detection_report(std::ostream& out, const DetectionReport& report, const DisorderModel& model) {
    out << "{\n"
        << fmt::format("  \"model_hash\": \"{:016x}\",\n", model_hash(model))
        << "  \"stop_time\": " << (report.stop_time ? std::to_string(*report.stop_time) : "null") << ",\n"
        << "  \"undecided\": " << (report.undecided ? "true" : "false") << ",\n"
        << "  \"success\": " << (report.success ? (*report.success ? "true" : "false") : "null") << ",\n"
        << "  \"theta\": " << (report.theta ? std::to_string(*report.theta) : "null") << ",\n"
        << "  \"observations\": " << report.observations << ",\n"
        << "  \"trace\": [";
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
        const auto& t = report.trace[i];
        const bool saturated = t.g && std::isinf(*t.g);
        out << (i ? ",\n    " : "\n    ")
            << fmt::format("{{\"n\": {}, \"g\": {}, \"r_star\": {}, \"pi_n\": {}, \"saturated\": {}}}", t.n,
                           optional_number(t.g), optional_number(t.r_star), json_number(t.pi_n),
                           saturated ? "true" : "false");
    }
    out << (report.trace.empty() ? "]\n" : "\n  ]\n") << "}\n";
}

void write_experiment_summary(std::ostream& out, const ExperimentResult& result, const DisorderModel& model) {
    out << "{\n"
        << fmt::format("  \"model_hash\": \"{:016x}\",\n", model_hash(model))
        << "  \"replications\": " << result.replications << ",\n"
        << "  \"seed\": " << result.seed << ",\n"
        << "  \"horizon\": " << result.horizon << ",\n"
        << "  \"success_rate\": " << json_number(result.success_rate) << ",\n"
        << "  \"standard_error\": " << optional_number(result.standard_error) << ",\n"
        << "  \"undecided_count\": " << result.undecided_count << ",\n"
        << "  \"theoretical_value\": " << json_number(result.theoretical_value) << ",\n"
        << "  \"z_score\": " << optional_number(result.z_score) << ",\n"
        << "  \"rounded\": "
        << fmt::format("{{\"success_rate\": {:.4f}, \"theoretical_value\": {:.4f}, \"z_score\": {}}}\n",
                       result.success_rate, result.theoretical_value,
                       result.z_score ? fmt::format("{:.2f}", *result.z_score) : "null")
        << "}\n";
}

}  // namespace disorder

#include "fscil/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fscil::io {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kHeaderKeys = {"format_version", "dim",  "total_classes", "base_classes",
                                                         "sessions",       "way",  "shot"};

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    return ec == std::errc{} && ptr == end;
}

std::string row_error(std::size_t line, const std::string& what) {
    return "row " + std::to_string(line) + ": " + what;
}

ProtocolConfig parse_header(std::string_view line) {
    const auto tokens = split_ws(line);
    std::array<int, kHeaderKeys.size()> values{};
    std::array<bool, kHeaderKeys.size()> seen{};
    for (auto token : tokens) {
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("malformed header: expected key=value, got '" + std::string(token) + "'");
        }
        const auto key = token.substr(0, eq);
        const auto raw = token.substr(eq + 1);
        std::size_t idx = kHeaderKeys.size();
        for (std::size_t k = 0; k < kHeaderKeys.size(); ++k)
            if (kHeaderKeys[k] == key) idx = k;
        if (idx == kHeaderKeys.size()) throw ParseError("malformed header: unknown field '" + std::string(key) + "'");
        if (seen[idx]) throw ParseError("malformed header: duplicate field '" + std::string(key) + "'");
        if (!parse_number(raw, values[idx])) {
            throw ParseError("malformed header: field '" + std::string(key) + "' is not an integer");
        }
        seen[idx] = true;
    }
    for (std::size_t k = 0; k < kHeaderKeys.size(); ++k) {
        if (!seen[k]) throw ParseError("malformed header: missing field '" + std::string(kHeaderKeys[k]) + "'");
    }
    if (values[0] != kFormatVersion) {
        throw ParseError("malformed header: unsupported format_version " + std::to_string(values[0]));
    }
    ProtocolConfig cfg{values[2], values[3], values[4], values[5], values[6], values[1]};
    if (auto msg = cfg.check(); !msg.empty()) throw ParseError("malformed header: " + msg);
    return cfg;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("invalid hex value '" + s + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_dataset(const SessionDataset& dataset, std::ostream& out) {
    const auto& c = dataset.config;
    // Integers go through std::to_string so a grouping locale on `out` cannot leak in.
    using std::to_string;
    out << "format_version=" << to_string(kFormatVersion) << " dim=" << to_string(c.dim)
        << " total_classes=" << to_string(c.total_classes) << " base_classes=" << to_string(c.base_classes)
        << " sessions=" << to_string(c.sessions) << " way=" << to_string(c.way) << " shot=" << to_string(c.shot)
        << '\n';
    auto emit = [&](const char* split, const std::vector<std::vector<LabeledSample>>& sessions) {
        for (std::size_t t = 0; t < sessions.size(); ++t) {
            for (const auto& s : sessions[t]) {
                out << split << ' ' << to_string(t) << ' ' << to_string(s.label);
                for (double v : s.feature) out << ' ' << format_double(v);
                out << '\n';
            }
        }
    };
    emit("train", dataset.train);
    emit("test", dataset.test);
}

void write_dataset(const SessionDataset& dataset, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_dataset(dataset, out);
    check_written(out, path);
}

SessionDataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("malformed header: empty file");

    SessionDataset ds;
    ds.config = parse_header(line);
    const auto& cfg = ds.config;
    ds.train.assign(static_cast<std::size_t>(cfg.sessions) + 1, {});
    ds.test.assign(static_cast<std::size_t>(cfg.sessions) + 1, {});

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty()) continue;
        if (tokens.size() < 3) throw ParseError(row_error(line_no, "expected split, session and class_id"));

        const bool is_train = tokens[0] == "train";
        if (!is_train && tokens[0] != "test") {
            throw ParseError(row_error(line_no, "unknown split '" + std::string(tokens[0]) + "'"));
        }
        int session = 0;
        int label = 0;
        if (!parse_number(tokens[1], session) || session < 0 || session > cfg.sessions) {
            throw ParseError(row_error(line_no, "session '" + std::string(tokens[1]) + "' out of range"));
        }
        if (!parse_number(tokens[2], label) || label < 0 || label >= cfg.total_classes) {
            throw ParseError(row_error(line_no, "class_id '" + std::string(tokens[2]) + "' out of range"));
        }
        if (is_train && cfg.session_of(label) != session) {
            throw ParseError(row_error(line_no, "class " + std::to_string(label) + " belongs to session " +
                                                    std::to_string(cfg.session_of(label)) + ", not " +
                                                    std::to_string(session)));
        }
        if (!is_train && label >= cfg.seen_classes(session)) {
            throw ParseError(row_error(line_no, "class " + std::to_string(label) + " not seen by session " +
                                                    std::to_string(session)));
        }
        const std::size_t n_values = tokens.size() - 3;
        if (n_values != static_cast<std::size_t>(cfg.dim)) {
            throw ParseError(row_error(line_no, "expected " + std::to_string(cfg.dim) + " values, got " +
                                                    std::to_string(n_values)));
        }
        LabeledSample sample;
        sample.label = label;
        sample.feature.resize(n_values);
        for (std::size_t j = 0; j < n_values; ++j) {
            if (!parse_number(tokens[3 + j], sample.feature[j])) {
                throw ParseError(row_error(line_no, "invalid number '" + std::string(tokens[3 + j]) + "'"));
            }
            if (!std::isfinite(sample.feature[j])) {
                throw ParseError(row_error(line_no, "non-finite value '" + std::string(tokens[3 + j]) + "'"));
            }
        }
        auto& split = is_train ? ds.train : ds.test;
        split[static_cast<std::size_t>(session)].push_back(std::move(sample));
    }

    if (auto report = validate(ds); !report.ok) throw ValidationError(std::move(report));
    return ds;
}

SessionDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return read_dataset(in);
}

ReportFormat parse_report_format(const std::string& name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw ParseError("unknown report format '" + name + "'");
}

std::string report_to_json(const ProtocolReport& report) {
    json j;
    const auto& s = report.strategy;
    j["strategy"] = {{"variant", to_string(s.variant)},
                     {"R", s.R},
                     {"tau", s.tau},
                     {"beta_base", s.beta_base},
                     {"beta_inc", s.beta_inc},
                     {"chunk", s.chunk},
                     {"update_base_session", s.update_base_session}};
    j["dataset_fingerprint"] = hex64(report.dataset_fingerprint);
    j["final_bank_fingerprint"] = hex64(report.final_bank_fingerprint);
    j["seed"] = report.seed;
    json sessions = json::array();
    for (const auto& sr : report.sessions) {
        json drift = json::array();
        for (const auto& [c, d] : sr.drift) drift.push_back({{"class", c}, {"drift", d}});
        sessions.push_back({{"session", sr.session},
                            {"overall", sr.overall_accuracy},
                            {"incremental", sr.incremental_accuracy ? json(*sr.incremental_accuracy) : json(nullptr)},
                            {"n_test", sr.n_test},
                            {"n_test_incremental", sr.n_test_incremental},
                            {"n_correct", sr.n_correct},
                            {"n_correct_incremental", sr.n_correct_incremental},
                            {"drift", std::move(drift)}});
    }
    j["sessions"] = std::move(sessions);
    return j.dump(2) + "\n";
}

ProtocolReport report_from_json(const std::string& text) {
    ProtocolReport r;
    try {
        const auto j = json::parse(text);
        const auto& s = j.at("strategy");
        r.strategy.variant = parse_variant(s.at("variant").get<std::string>());
        r.strategy.R = s.at("R").get<int>();
        r.strategy.tau = s.at("tau").get<double>();
        r.strategy.beta_base = s.at("beta_base").get<double>();
        r.strategy.beta_inc = s.at("beta_inc").get<double>();
        r.strategy.chunk = s.at("chunk").get<std::size_t>();
        r.strategy.update_base_session = s.at("update_base_session").get<bool>();
        r.dataset_fingerprint = parse_hex64(j.at("dataset_fingerprint").get<std::string>());
        r.final_bank_fingerprint = parse_hex64(j.at("final_bank_fingerprint").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& js : j.at("sessions")) {
            SessionReport sr;
            sr.session = js.at("session").get<int>();
            sr.overall_accuracy = js.at("overall").get<double>();
            if (!js.at("incremental").is_null()) sr.incremental_accuracy = js.at("incremental").get<double>();
            sr.n_test = js.at("n_test").get<std::size_t>();
            sr.n_test_incremental = js.at("n_test_incremental").get<std::size_t>();
            sr.n_correct = js.at("n_correct").get<std::size_t>();
            sr.n_correct_incremental = js.at("n_correct_incremental").get<std::size_t>();
            for (const auto& d : js.at("drift")) sr.drift[d.at("class").get<ClassId>()] = d.at("drift").get<double>();
            r.sessions.push_back(std::move(sr));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
    return r;
}

void write_report(const ProtocolReport& report, std::ostream& out, ReportFormat format) {
    if (format == ReportFormat::Json) {
        out << report_to_json(report);
        return;
    }
    out << "session,overall,incremental,n_test,n_test_inc\n";
    for (const auto& s : report.sessions) {
        out << std::to_string(s.session) << ',' << format_double(s.overall_accuracy) << ','
            << (s.incremental_accuracy ? format_double(*s.incremental_accuracy) : std::string()) << ','
            << std::to_string(s.n_test) << ',' << std::to_string(s.n_test_incremental) << '\n';
    }
}

void write_report(const ProtocolReport& report, const std::filesystem::path& path, ReportFormat format) {
    auto out = open_for_write(path);
    write_report(report, out, format);
    check_written(out, path);
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    const auto& p = spec.protocol;
    json j = {{"classes", p.total_classes},
              {"base", p.base_classes},
              {"sessions", p.sessions},
              {"way", p.way},
              {"shot", p.shot},
              {"dim", p.dim},
              {"sigma", spec.sigma_intra},
              {"delta", spec.target_delta_inter},
              {"test_per_class", spec.test_per_class},
              {"base_train_per_class", spec.base_train_per_class},
              {"placement", spec.placement ? to_string(*spec.placement) : "auto"},
              {"center_offset", spec.center_offset},
              {"seed", spec.seed}};
    return j.dump(2) + "\n";
}

SynthSpec synth_spec_from_json(const std::string& text) {
    SynthSpec spec;
    try {
        const auto j = json::parse(text);
        auto& p = spec.protocol;
        p.total_classes = j.at("classes").get<int>();
        p.base_classes = j.at("base").get<int>();
        p.sessions = j.at("sessions").get<int>();
        p.way = j.at("way").get<int>();
        p.shot = j.at("shot").get<int>();
        p.dim = j.at("dim").get<int>();
        spec.sigma_intra = j.at("sigma").get<double>();
        spec.target_delta_inter = j.at("delta").get<double>();
        spec.test_per_class = j.value("test_per_class", spec.test_per_class);
        spec.base_train_per_class = j.value("base_train_per_class", spec.base_train_per_class);
        if (const auto placement = j.value("placement", std::string("auto")); placement != "auto") {
            spec.placement = parse_placement(placement);
        }
        spec.center_offset = j.value("center_offset", spec.center_offset);
        spec.seed = j.value("seed", spec.seed);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed synth spec: ") + e.what());
    }
    if (auto msg = spec.check(); !msg.empty()) throw ParseError("invalid synth spec: " + msg);
    return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) { return synth_spec_from_json(read_file(path)); }

}  // namespace fscil::io

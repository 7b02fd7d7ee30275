#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "fscil/io.hpp"
#include "fscil/protocol.hpp"
#include "fscil/rng.hpp"
#include "fscil/synth.hpp"

namespace fscil::cli {

namespace {

struct SynthFlags {
    int classes = 0;
    int base = 0;
    int sessions = 0;
    int way = 1;
    int shot = 5;
    int dim = 16;
    double sigma = 1.0;
    double delta = 3.0;
    int test_per_class = 50;
    int base_train_per_class = 20;
    std::string placement = "auto";
    double offset = 0.0;
    std::uint64_t seed = 0;

    SynthSpec to_spec() const {
        SynthSpec spec;
        spec.protocol = {classes, base, sessions, way, shot, dim};
        spec.sigma_intra = sigma;
        spec.target_delta_inter = delta;
        spec.test_per_class = test_per_class;
        spec.base_train_per_class = base_train_per_class;
        if (placement != "auto") spec.placement = parse_placement(placement);
        spec.center_offset = offset;
        spec.seed = seed;
        if (auto msg = spec.check(); !msg.empty()) throw ParseError("invalid synth spec: " + msg);
        return spec;
    }
};

struct RunFlags {
    std::string dataset;
    std::string synth;
    std::string strategy = "exp2";
    int R = 40;
    double tau = 0.8;
    double beta_base = 0.05;
    double beta_inc = 0.3;
    std::size_t chunk = 0;
    bool no_base_update = false;
    std::uint64_t seed = 0;
    bool seed_given = false;

    StrategyConfig to_strategy() const {
        StrategyConfig s;
        s.variant = parse_variant(strategy);
        s.R = R;
        s.tau = tau;
        s.beta_base = beta_base;
        s.beta_inc = beta_inc;
        s.chunk = chunk;
        s.update_base_session = !no_base_update;
        if (auto msg = s.check(); !msg.empty()) throw ParseError(msg);
        return s;
    }
};

void add_run_options(CLI::App& cmd, RunFlags& f) {
    auto* ds = cmd.add_option("--dataset", f.dataset, "Embedding file");
    auto* sy = cmd.add_option("--synth", f.synth, "Synthetic spec JSON file");
    ds->excludes(sy);
    cmd.add_option("--strategy", f.strategy, "baseline | exp2 | average | weight")
        ->check(CLI::IsMember({"baseline", "exp2", "average", "weight"}));
    cmd.add_option("--R", f.R, "Exploration top-R")->capture_default_str();
    cmd.add_option("--tau", f.tau, "Confidence threshold")->capture_default_str();
    cmd.add_option("--beta-base", f.beta_base, "Update degree for base classes")->capture_default_str();
    cmd.add_option("--beta-inc", f.beta_inc, "Update degree for incremental classes")->capture_default_str();
    cmd.add_option("--chunk", f.chunk, "Streaming chunk size (0 = whole batch)")->capture_default_str();
    cmd.add_flag("--no-base-update", f.no_base_update, "Skip prototype updates in session 0");
    cmd.add_option("--seed", f.seed, "Seed (overrides the synth spec seed; echoed in reports)")
        ->each([&f](const std::string&) { f.seed_given = true; });
}

struct LoadedData {
    SessionDataset dataset;
    std::uint64_t seed = 0;
};

LoadedData load_input(const RunFlags& f, std::uint64_t seed_override, bool override_seed) {
    if (f.dataset.empty() == f.synth.empty()) throw ParseError("exactly one of --dataset or --synth is required");
    if (!f.dataset.empty()) return {io::load_dataset(f.dataset), seed_override};
    auto spec = io::load_synth_spec(f.synth);
    if (override_seed) spec.seed = seed_override;
    return {generate_dataset(spec), spec.seed};
}

std::ostream* open_output(const std::string& path, std::ofstream& file, std::ostream& fallback) {
    if (path.empty() || path == "-") return &fallback;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    return &file;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    if (items.empty()) throw ParseError("--values must list at least one value");
    return items;
}

void apply_param(RunFlags& f, const std::string& param, const std::string& value) {
    try {
        std::size_t used = 0;
        if (param == "R") {
            f.R = std::stoi(value, &used);
        } else if (param == "tau") {
            f.tau = std::stod(value, &used);
        } else if (param == "beta-base") {
            f.beta_base = std::stod(value, &used);
        } else if (param == "beta-inc") {
            f.beta_inc = std::stod(value, &used);
        }
        if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
        throw ParseError("invalid value '" + value + "' for --param " + param);
    }
}

int cmd_gen_synth(const SynthFlags& flags, const std::string& out_path, const std::string& spec_out,
                  std::ostream& out) {
    const auto spec = flags.to_spec();
    const auto dataset = generate_dataset(spec);
    std::ofstream file;
    io::write_dataset(dataset, *open_output(out_path, file, out));
    if (!spec_out.empty()) {
        std::ofstream sf(spec_out, std::ios::binary);
        if (!sf) throw std::runtime_error("cannot open '" + spec_out + "' for writing");
        sf << io::synth_spec_to_json(spec);
    }
    return kOk;
}

int cmd_run(const RunFlags& flags, const std::string& report_path, const std::string& format,
            std::ostream& out) {
    const auto strategy = flags.to_strategy();
    const auto input = load_input(flags, flags.seed, flags.seed_given);
    ProtocolOptions options;
    options.seed = input.seed;
    const auto result = run_protocol(input.dataset, strategy, options);
    std::ofstream file;
    io::write_report(result.report, *open_output(report_path, file, out), io::parse_report_format(format));
    return kOk;
}

int cmd_sweep(const RunFlags& flags, const std::string& param, const std::string& values, int repeat,
              const std::string& out_path, std::ostream& out) {
    if (repeat < 1) throw ParseError("--repeat must be >= 1");
    const auto items = split_list(values);

    struct Job {
        std::string value;
        int repeat;
        std::uint64_t seed;
        std::future<ProtocolReport> report;
    };
    std::vector<Job> jobs;
    for (const auto& v : items) {
        RunFlags f = flags;
        apply_param(f, param, v);
        const auto strategy = f.to_strategy();
        for (int r = 0; r < repeat; ++r) {
            const std::uint64_t seed = derive_seed(flags.seed, static_cast<std::uint64_t>(r));
            jobs.push_back({v, r, seed, std::async(std::launch::async, [f, strategy, seed] {
                                const auto input = load_input(f, seed, true);
                                ProtocolOptions options;
                                options.seed = input.seed;
                                return run_protocol(input.dataset, strategy, options).report;
                            })});
        }
    }

    std::ofstream file;
    auto& os = *open_output(out_path, file, out);
    os << "param,value,repeat,seed,session,metric,score\n";
    for (auto& job : jobs) {
        const auto report = job.report.get();
        for (const auto& s : report.sessions) {
            auto row = [&](const char* metric, double score) {
                os << param << ',' << job.value << ',' << job.repeat << ',' << job.seed << ',' << s.session << ','
                   << metric << ',' << io::format_double(score) << '\n';
            };
            row("overall", s.overall_accuracy);
            if (s.incremental_accuracy) row("incremental", *s.incremental_accuracy);
        }
    }
    return kOk;
}

int cmd_lemma(const OverlapQuery& q, std::ostream& out) {
    const double bound = overlap_bound(q.delta, q.sigma, q.epsilon);
    const auto mc = monte_carlo_overlap(q);
    const double tol = lemma_tolerance(q.delta, q.epsilon, mc.stderr_);
    const bool pass = std::abs(mc.probability - bound) <= tol;
    out << std::setprecision(10) << "analytic_bound " << bound << '\n'
        << "empirical " << mc.probability << '\n'
        << "stderr " << mc.stderr_ << '\n'
        << "tolerance " << tol << '\n'
        << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kOk : kInternalError;
}

int cmd_validate(const std::string& path, std::ostream& out) {
    try {
        const auto ds = io::load_dataset(path);
        out << "ok\n";
        return kOk;
    } catch (const ValidationError& e) {
        out << e.report().to_string();
        return kInputError;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Few-shot class-incremental protocol simulator"};
    app.require_subcommand(1);

    SynthFlags synth;
    std::string gen_out = "-";
    std::string spec_out;
    auto* gen = app.add_subcommand("gen-synth", "Generate a synthetic Gaussian embedding dataset");
    gen->add_option("--classes", synth.classes, "Total classes")->required();
    gen->add_option("--base", synth.base, "Base classes")->required();
    gen->add_option("--sessions", synth.sessions, "Incremental sessions T")->required();
    gen->add_option("--way", synth.way, "Classes per incremental session")->required();
    gen->add_option("--shot", synth.shot, "Train samples per incremental class")->required();
    gen->add_option("--dim", synth.dim, "Feature dimension")->required();
    gen->add_option("--sigma", synth.sigma, "Per-coordinate intra-class std")->capture_default_str();
    gen->add_option("--delta", synth.delta, "Minimum distance between class means")->capture_default_str();
    gen->add_option("--test-per-class", synth.test_per_class)->capture_default_str();
    gen->add_option("--base-train-per-class", synth.base_train_per_class)->capture_default_str();
    gen->add_option("--placement", synth.placement, "auto | simplex | sphere")
        ->check(CLI::IsMember({"auto", "simplex", "sphere"}))
        ->capture_default_str();
    gen->add_option("--offset", synth.offset, "Distance of the class-mean centre from the origin")
        ->capture_default_str();
    gen->add_option("--seed", synth.seed)->capture_default_str();
    gen->add_option("--out", gen_out, "Output embedding file ('-' = stdout)");
    gen->add_option("--spec-out", spec_out, "Also write the spec as JSON (usable with run --synth)");

    RunFlags run_flags;
    std::string report_path = "-";
    std::string format = "csv";
    auto* runc = app.add_subcommand("run", "Run the session protocol with one strategy");
    add_run_options(*runc, run_flags);
    runc->add_option("--report", report_path, "Report path ('-' = stdout)");
    runc->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    RunFlags sweep_flags;
    std::string sweep_param;
    std::string sweep_values;
    int sweep_repeat = 1;
    std::string sweep_out = "-";
    auto* sweep = app.add_subcommand("sweep", "Grid over one hyperparameter, several seeds each");
    add_run_options(*sweep, sweep_flags);
    sweep->add_option("--param", sweep_param, "R | tau | beta-base | beta-inc")
        ->required()
        ->check(CLI::IsMember({"R", "tau", "beta-base", "beta-inc"}));
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    sweep->add_option("--repeat", sweep_repeat, "Seeds per value")->capture_default_str();
    sweep->add_option("--out", sweep_out, "Long-format CSV path ('-' = stdout)");

    OverlapQuery query;
    auto* lemma = app.add_subcommand("lemma", "Check the overlap lower bound by Monte Carlo");
    lemma->add_option("--delta", query.delta)->capture_default_str();
    lemma->add_option("--sigma", query.sigma)->capture_default_str();
    lemma->add_option("--eps", query.epsilon)->capture_default_str();
    lemma->add_option("--dim", query.dim)->capture_default_str();
    lemma->add_option("--trials", query.trials)->capture_default_str();
    lemma->add_option("--seed", query.seed)->capture_default_str();
    lemma->add_option("--shards", query.shards)->capture_default_str();

    std::string validate_path;
    auto* val = app.add_subcommand("validate", "Validate an embedding file");
    val->add_option("--dataset", validate_path)->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*gen) return cmd_gen_synth(synth, gen_out, spec_out, out);
        if (*runc) return cmd_run(run_flags, report_path, format, out);
        if (*sweep) return cmd_sweep(sweep_flags, sweep_param, sweep_values, sweep_repeat, sweep_out, out);
        if (*lemma) return cmd_lemma(query, out);
        if (*val) return cmd_validate(validate_path, out);
    } catch (const ValidationError& e) {
        err << e.report().to_string();
        return kInputError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kInternalError;
}

}  // namespace fscil::cli

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "kgc/error.hpp"
#include "kgc/experiment.hpp"
#include "kgc/simd/kernels.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;
constexpr int kAcceptance = 3;

struct Common {
    std::string config;
    std::vector<std::string> overrides;
    std::string out;
    int workers = 1;
};

void add_common(CLI::App* cmd, Common& c, const std::string& out_help) {
    cmd->add_option("-c,--config", c.config, "configuration file")->check(CLI::ExistingFile);
    cmd->add_option("-s,--set", c.overrides, "override, key=value (repeatable)");
    cmd->add_option("-o,--out", c.out, out_help);
    cmd->add_option("-j,--workers", c.workers, "worker threads")->check(CLI::Range(1, 256));
}

kgc::ExperimentConfig load(const Common& c) {
    kgc::Config cfg = c.config.empty() ? kgc::Config{} : kgc::Config::load(c.config);
    for (const auto& o : c.overrides) cfg.set(o);
    return kgc::load_experiment(cfg);
}

// Writes to the file when a path is given, otherwise to stdout.
template <class Writer>
void emit(const std::string& path, Writer&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw kgc::Error(kgc::ErrorKind::ConfigError, "cli", "cannot write '" + path + "'");
    write(out);
}

int analyze_map_cmd(const Common& c) {
    const auto x = load(c);
    const kgc::BoundaryMotion motion = kgc::build_motion(x);
    const kgc::CharacteristicMaps maps(motion);
    const kgc::MapAnalysis an = kgc::analyze(maps, x.analysis);
    emit(c.out, [&](std::ostream& os) { kgc::write_analysis_json(os, an, motion.describe()); });
    return kPass;
}

int simulate_cmd(const Common& c) {
    auto x = load(c);
    if (!c.out.empty()) x.output_dir = c.out;
    const kgc::ExperimentReport rep = kgc::run_experiment(x, c.workers);
    const std::filesystem::path dir(x.output_dir);
    std::filesystem::create_directories(dir);
    emit((dir / "report.json").string(), [&](std::ostream& os) { kgc::write_report_json(os, rep); });
    bool failed = false;
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const auto& run = rep.runs[i];
        const std::string stem = "mass_" + std::to_string(i);
        if (!run.error.empty()) {
            std::cerr << "mass " << run.mass << ": " << run.error << '\n';
            failed = true;
        }
        if (!run.series.t.empty()) {
            emit((dir / (stem + "_energy.csv")).string(),
                 [&](std::ostream& os) { kgc::write_energy_csv(os, run.series); });
        }
        if (run.grid && x.field_export == "text") {
            emit((dir / (stem + "_field.txt")).string(), [&](std::ostream& os) { run.grid->export_text(os); });
        } else if (run.grid && x.field_export == "binary") {
            emit((dir / (stem + "_field.bin")).string(), [&](std::ostream& os) { run.grid->export_binary(os); });
        }
    }
    return failed ? kNumerical : kPass;
}

int scan_cmd(const Common& c) {
    const auto x = load(c);
    const auto rows = kgc::scan(x, c.workers);
    emit(c.out, [&](std::ostream& os) { kgc::write_scan_csv(os, rows); });
    return kPass;
}

int verify_cmd(const Common& c) {
    const auto x = load(c);
    const kgc::VerifyReport rep = kgc::verify(x, c.workers);
    emit(c.out, [&](std::ostream& os) { kgc::write_verify_json(os, rep); });
    for (const auto& check : rep.checks) {
        std::cerr << (check.pass ? "PASS " : "FAIL ") << check.name << '\n';
    }
    return rep.all_pass() ? kPass : kAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Klein-Gordon field in a cavity with a periodically moving wall"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kgcavity 0.1.0");
    bool show_isa = false;
    app.add_flag("--isa", show_isa, "print the selected SIMD kernel variant to stderr");

    Common common;
    auto* analyze = app.add_subcommand("analyze-map", "rotation number, resonance, periodic points, growth exponent");
    add_common(analyze, common, "JSON output file (default stdout)");
    auto* simulate = app.add_subcommand("simulate", "solve the field and fit the energy growth");
    add_common(simulate, common, "output directory (overrides output.dir)");
    auto* scan = app.add_subcommand("scan", "sweep one motion parameter");
    add_common(scan, common, "CSV output file (default stdout)");
    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    add_common(verify, common, "JSON output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kUsage;
    }
    if (show_isa) std::cerr << "simd: " << kgc::simd::to_string(kgc::simd::active().isa) << '\n';

    try {
        if (*analyze) return analyze_map_cmd(common);
        if (*simulate) return simulate_cmd(common);
        if (*scan) return scan_cmd(common);
        if (*verify) return verify_cmd(common);
    } catch (const kgc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        const bool usage = e.kind() == kgc::ErrorKind::ConfigError || e.kind() == kgc::ErrorKind::InvalidArgument ||
                           e.kind() == kgc::ErrorKind::RejectedMotion || e.kind() == kgc::ErrorKind::BumpOutOfRange ||
                           e.kind() == kgc::ErrorKind::IncompatibleData;
        return usage ? kUsage : kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

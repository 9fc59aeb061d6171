#pragma once

// Orchestration: configuration, energy series with period-averaged exponent
// fits, parameter scans and the invariant suite behind `verify`.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgc/boundary.hpp"
#include "kgc/cauchy.hpp"
#include "kgc/circle_dynamics.hpp"
#include "kgc/kleingordon.hpp"
#include "kgc/oracle_fdm.hpp"

namespace kgc {

/// Flat `section.key = value` text. Blank lines and text after '#' are ignored.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::string& path);

    /// Applies a "key=value" override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    long integer(const std::string& key, long fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

struct DataSpec {
    std::string kind = "bump";  ///< bump | mode | zero | table
    double center = 0.5;        ///< absolute position in [0, a(0)]
    double width = 0.2;         ///< absolute
    double amplitude = 1.0;
    Direction direction = Direction::Right;
    int mode = 1;
    std::string phi0_table;
    std::string phi1_table;
    EndpointDerivatives endpoints;
};

struct FitSettings {
    int skip_windows = 2;       ///< leading windows left out of the fit
    double confidence = 0.95;
    int samples_per_window = 32;
};

struct ScanSpec {
    std::string param = "alpha";  ///< alpha | beta | period | mean
    double from = 0.0;
    double to = 0.0;
    int points = 0;
    double fit_periods = 0.0;     ///< > 0 adds a massless gamma_fit over this many windows
};

struct VerifySpec {
    int geometry_samples = 10000;
    int identity_samples = 2000;
    double oracle_tolerance = 1e-3;
    double oracle_periods = 1.0;
    double field_bound = 1.1;
};

struct ExperimentConfig {
    MotionSpec motion;
    AnalysisOptions analysis;
    DataSpec data;
    std::vector<double> masses{0.0};
    std::vector<double> mass_factors;  ///< multiples of sqrt(gamma / a_max)
    int half_nodes = 256;
    double periods = 4.0;              ///< horizon in units of the fit window
    PicardOptions picard;
    OracleOptions oracle;              ///< ny = 0 disables the oracle comparison
    FitSettings fit;
    ScanSpec scan;
    VerifySpec verify;
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    std::string field_export = "none";  ///< none | text | binary
};

/// Throws ConfigError on unknown keys or malformed values.
ExperimentConfig load_experiment(const Config& config);
BoundaryMotion build_motion(const ExperimentConfig& config);
CauchyData build_data(const ExperimentConfig& config, double length);

struct ExponentFit {
    double gamma = 0.0;
    double half_width = 0.0;
    double intercept = 0.0;
    int windows = 0;
    std::vector<double> mid;      ///< window midpoints (all windows)
    std::vector<double> average;  ///< window averages (all windows)
};

/// Least-squares slope of log(window average) against window midpoint, skipping
/// the first `skip` windows. Averages come from the piecewise-linear integral of
/// the samples. Throws TooFewWindows, NonpositiveEnergy.
ExponentFit fit_exponent(const std::vector<double>& t, const std::vector<double>& E, double window, int skip = 0,
                         double confidence = 0.95);

struct EnergySeries {
    std::vector<double> t;
    std::vector<double> E;
    std::vector<double> mass_share;
    std::vector<double> window_avg;  ///< NaN outside complete windows
    double window = 0.0;
    std::optional<ExponentFit> fit;
    std::optional<double> gamma;     ///< predicted
    double residual_slope = 0.0;     ///< slope of log(window avg) - gamma t
    double residual_min = 0.0;       ///< min over samples of log E - gamma t
    double residual_max = 0.0;
    std::string fit_error;
};

struct MassRun {
    double mass = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> changes;
    bool picard_bound_holds = true;
    double field_bound_ratio = 0.0;
    EnergySeries series;
    std::string error;
    std::shared_ptr<const FieldGrid> grid;
};

struct ExperimentReport {
    std::string motion;
    std::optional<MapAnalysis> analysis;
    std::string analysis_error;
    CompatibilityReport compatibility;
    std::optional<double> hypothesis_J;
    std::vector<MassRun> runs;
    std::optional<OracleComparison> oracle;
    std::string oracle_error;
};

/// Map analysis with gamma filled in when an attractor exists.
MapAnalysis analyze(const CharacteristicMaps& maps, const AnalysisOptions& options);

/// Fit window pT from the resonance, or T without one.
double fit_window(const MapAnalysis* analysis, double period);

ExperimentReport run_experiment(const ExperimentConfig& config, int workers = 1);

struct ScanRow {
    double param = 0.0;
    std::optional<double> rho;
    std::optional<double> rho_err;
    std::optional<Resonance> resonance;
    std::optional<double> gamma;
    std::optional<double> gamma_fit;
    std::optional<double> min_multiplier;
    std::string status;
};

std::vector<ScanRow> scan(const ExperimentConfig& config, int workers = 1);

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<Check> checks;
    bool all_pass() const;
};

VerifyReport verify(const ExperimentConfig& config, int workers = 1);

void write_analysis_json(std::ostream& out, const MapAnalysis& analysis, const std::string& motion);
void write_energy_csv(std::ostream& out, const EnergySeries& series);
void write_report_json(std::ostream& out, const ExperimentReport& report);
void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);
void write_verify_json(std::ostream& out, const VerifyReport& report);

}  // namespace kgc

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "istn/analytics.hpp"
#include "istn/simulator.hpp"
#include "istn/tier.hpp"
#include "istn/walker.hpp"

namespace istn {

/// One tier as written in a config, before density resolution.
struct TierSpec {
    LinkBudget budget;
    FadingLaw fading = FadingLaw::rayleigh();
    std::optional<double> mean_visible;
    std::optional<double> density_per_km2;
    std::optional<double> theta_deg;
    bool enabled = true;

    TierConfig build() const;
};

struct ScenarioSpec {
    std::string name;  // empty for the implicit single scenario
    std::vector<TierSpec> tiers;
    //! Overrides ExperimentConfig::epsilon for this scenario.
    std::optional<std::array<double, 2>> epsilon;
};

enum class SweepVariable { ThresholdDb, BiasRatio, DensityRatio, TerrestrialBias };
enum class Metric { Coverage, Association };

std::string to_string(SweepVariable v);
std::string to_string(Metric m);

struct SweepSpec {
    SweepVariable variable = SweepVariable::ThresholdDb;
    std::vector<double> values;
    //! Threshold used when the sweep variable is not the threshold.
    double threshold_db = 0;
};

struct KappaSpec {
    enum class Mode { LowerBound, Minimax, Scalar, Fit };
    Mode mode = Mode::Minimax;
    double value = 1.0;
    //! Thresholds used by Mode::Fit.
    std::vector<double> fit_thresholds_db{-10, -5, 0, 5, 10, 15, 20, 25, 30};

    std::string describe() const;
};

struct ExperimentConfig {
    std::string name;
    std::string description;
    std::string source;  // file path or recipe name, for messages
    std::vector<ScenarioSpec> scenarios;
    SweepSpec sweep;
    Metric metric = Metric::Coverage;
    std::vector<CoverageMethod> methods;
    McOptions mc;
    KappaSpec kappa;
    std::optional<std::array<double, 2>> epsilon;
    bool interference_limited = false;
    bool void_aware_tail = false;
    std::optional<WalkerStarConfig> walker;
    bool match_densities = false;
    std::uint64_t match_probes = 2000;
    std::string output_dir;

    //! Throws ValidationError with every violated rule.
    void validate() const;
};

//! Reads a YAML config. Throws IoError, ParseError (syntax or type errors,
//! with line and field) or ValidationError (all semantic problems).
ExperimentConfig load_config(std::string const& path);
ExperimentConfig parse_config(std::string const& text,
                              std::string const& source = "<config>");

/// Long-format result rows; tier is "total", a tier name or "none".
struct ResultRow {
    double sweep_value = 0;
    std::string method;
    std::string tier;
    double value = 0;
    std::optional<double> ci95;

    bool operator==(ResultRow const&) const = default;
};

struct ResultTable {
    std::string scenario;
    std::vector<std::string> tier_names;
    std::vector<ResultRow> rows;
};

struct ExperimentResult {
    std::string name;
    std::vector<ResultTable> tables;
    std::vector<std::string> failures;
    //! JSON text describing the run (kappa used, densities, seeds).
    std::string metadata_json;

    bool ok() const { return failures.empty(); }
};

//! Tiers of a scenario after density resolution and noise handling.
std::vector<TierConfig> scenario_tiers(ExperimentConfig const& cfg,
                                       ScenarioSpec const& scenario);

ExperimentResult run_experiment(ExperimentConfig const& cfg);

std::string format_csv(ResultTable const& table);
ResultTable parse_csv(std::string const& text);
//! One whitespace-separated series per method: sweep_value, total (or the
//! first tier for association), one column per tier, ci95.
std::string format_plotdata(ResultTable const& table, std::string const& method);

//! Writes CSV, plot data and metadata under `dir`; returns written paths.
//! Throws IoError.
std::vector<std::string> emit(ExperimentResult const& result,
                              std::string const& dir);

//! 9 significant digits, "nan" for NaN.
std::string format_number(double x);

}  // namespace istn

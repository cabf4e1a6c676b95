#include "istn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "istn/errors.hpp"

namespace istn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Json = nlohmann::ordered_json;

// Tier list for one sweep point; present[k] is false for a tier the sweep
// removed (a ratio of zero), whose outputs are reported as 0.
struct SweepPoint {
    std::vector<TierConfig> tiers;
    std::vector<bool> present;

    std::vector<TierConfig> active() const
    {
        std::vector<TierConfig> out;
        for (std::size_t k = 0; k < tiers.size(); ++k) {
            if (present[k]) out.push_back(tiers[k]);
        }
        return out;
    }

    // Spreads values computed on active() back onto all tiers.
    std::vector<double> expand(std::vector<double> const& values) const
    {
        std::vector<double> out(tiers.size(), 0.0);
        std::size_t i = 0;
        for (std::size_t k = 0; k < tiers.size(); ++k) {
            if (present[k]) out[k] = values.at(i++);
        }
        return out;
    }
};

SweepPoint apply_sweep(std::vector<TierConfig> tiers, SweepVariable variable,
                       double value)
{
    SweepPoint p{std::move(tiers), {}};
    p.present.assign(p.tiers.size(), true);
    switch (variable) {
        case SweepVariable::ThresholdDb:
            break;
        case SweepVariable::BiasRatio:
            if (value == 0) {
                p.present[1] = false;
            } else {
                p.tiers[1].bias = p.tiers[0].bias * value;
            }
            break;
        case SweepVariable::DensityRatio:
            if (value == 0) {
                p.present[1] = false;
            } else {
                p.tiers[1].density_per_km2 = density_for_mean_count(
                    p.tiers[1], value * mean_visible_count(p.tiers[0]));
            }
            break;
        case SweepVariable::TerrestrialBias:
            p.tiers[0].bias = value;
            break;
    }
    return p;
}

double half_width(double p, std::uint64_t n)
{
    return 1.96 * std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

class Runner {
  public:
    Runner(ExperimentConfig const& cfg, ExperimentResult& result)
        : cfg_(cfg), result_(result) {}

    void run_scenario(ScenarioSpec const& scenario, Json& meta)
    {
        auto tiers = scenario_tiers(cfg_, scenario);
        if (cfg_.match_densities) {
            auto const md = matched_density(*cfg_.walker, cfg_.match_probes, cfg_.mc.seed);
            tiers = matched_ppp_tiers(*cfg_.walker, tiers, md);
            meta["matched_density"] = {
                {"probes", cfg_.match_probes},
                {"mean_visible_terrestrial", md.mean_visible_terrestrial},
                {"mean_visible_satellites", md.mean_visible_satellites},
                {"terrestrial_density_per_km2", md.terrestrial_density_per_km2},
                {"satellite_density_per_km2", md.satellite_density_per_km2}};
        }
        scenario_ = scenario.name;
        table_ = ResultTable{scenario.name, {}, {}};
        for (auto const& t : tiers) {
            table_.tier_names.push_back(t.name);
        }

        curve_.analytic.void_aware_tail = cfg_.void_aware_tail;
        curve_.epsilon = {0.0, 0.0};
        if (cfg_.epsilon) curve_.epsilon = *cfg_.epsilon;
        if (scenario.epsilon) curve_.epsilon = *scenario.epsilon;
        meta["closed_form_epsilon"] = curve_.epsilon;
        curve_.kappa = resolve_kappa(tiers, meta);

        Json tier_meta = Json::array();
        for (auto const& t : tiers) {
            auto const ring = t.annulus();
            tier_meta.push_back({{"name", t.name},
                                 {"fading", t.fading.describe()},
                                 {"path_loss_exp", t.path_loss_exp},
                                 {"bias", t.bias},
                                 {"density_per_km2", t.density_per_km2},
                                 {"mean_visible", mean_visible_count(t)},
                                 {"r_min_km", ring.r_min_km},
                                 {"r_max_km", ring.r_max_km},
                                 {"displaced_density_per_km2", ring.density_per_km2},
                                 {"noise_normalized", t.normalized_noise()}});
        }
        meta["tiers"] = tier_meta;

        for (auto method : cfg_.methods) {
            if (cfg_.metric == Metric::Association) {
                run_association(tiers, method);
            } else if (cfg_.sweep.variable == SweepVariable::ThresholdDb) {
                run_threshold_sweep(tiers, method);
            } else {
                run_ratio_sweep(tiers, method);
            }
        }
        result_.tables.push_back(std::move(table_));
    }

  private:
    KappaPolicy resolve_kappa(std::vector<TierConfig> const& tiers, Json& meta)
    {
        KappaPolicy policy = KappaPolicy::minimax();
        switch (cfg_.kappa.mode) {
            case KappaSpec::Mode::LowerBound: policy = KappaPolicy::lower_bound(); break;
            case KappaSpec::Mode::Minimax: policy = KappaPolicy::minimax(); break;
            case KappaSpec::Mode::Scalar: policy = KappaPolicy::scalar(cfg_.kappa.value); break;
            case KappaSpec::Mode::Fit:
                policy = KappaPolicy::scalar(fit_scalar_kappa(
                    tiers, cfg_.kappa.fit_thresholds_db, curve_.analytic));
                break;
        }
        int max_shape = 1;
        for (auto const& t : tiers) {
            max_shape = std::max(max_shape, t.fading.mixture().last_shape());
        }
        meta["kappa"] = {{"policy", cfg_.kappa.describe()},
                         {"resolved", policy.describe()},
                         {"per_shape_index", policy.kappas(max_shape)}};
        return policy;
    }

    void add_rows(double sweep, CoverageMethod method, double total,
                  std::vector<double> const& per_tier, std::optional<std::uint64_t> n)
    {
        auto const name = to_string(method);
        auto ci = [&](double p) -> std::optional<double> {
            if (!n || std::isnan(p)) return std::nullopt;
            return half_width(p, *n);
        };
        table_.rows.push_back({sweep, name, "total", total, ci(total)});
        for (std::size_t k = 0; k < per_tier.size(); ++k) {
            table_.rows.push_back({sweep, name, table_.tier_names[k], per_tier[k], ci(per_tier[k])});
        }
    }

    void add_failure(double sweep, CoverageMethod method, std::string const& what,
                     std::size_t n_series)
    {
        std::string where = cfg_.name;
        if (!scenario_.empty()) where += "/" + scenario_;
        result_.failures.push_back(where + " " + to_string(method) + " at " +
                                   to_string(cfg_.sweep.variable) + "=" +
                                   format_number(sweep) + ": " + what);
        auto const name = to_string(method);
        if (cfg_.metric == Metric::Coverage) {
            table_.rows.push_back({sweep, name, "total", kNaN, std::nullopt});
        }
        for (std::size_t k = 0; k < n_series; ++k) {
            table_.rows.push_back({sweep, name, table_.tier_names[k], kNaN, std::nullopt});
        }
        if (cfg_.metric == Metric::Association) {
            table_.rows.push_back({sweep, name, "none", kNaN, std::nullopt});
        }
    }

    void add_coverage_point(double sweep, CoverageMethod method, SweepPoint const& sp,
                            CoveragePoint const& point, std::optional<std::uint64_t> n)
    {
        if (!point.ok()) {
            add_failure(sweep, method, point.error, sp.tiers.size());
            return;
        }
        add_rows(sweep, method, point.total, sp.expand(point.per_tier), n);
    }

    void run_threshold_sweep(std::vector<TierConfig> const& tiers, CoverageMethod method)
    {
        auto const& values = cfg_.sweep.values;
        SweepPoint const sp = apply_sweep(tiers, SweepVariable::ThresholdDb, 0);
        try {
            if (method == CoverageMethod::MonteCarlo || method == CoverageMethod::GridBaseline) {
                auto const mc = method == CoverageMethod::MonteCarlo
                                    ? estimate_coverage(tiers, values, cfg_.mc)
                                    : estimate_grid_coverage(*cfg_.walker, tiers, values, cfg_.mc);
                for (std::size_t i = 0; i < values.size(); ++i) {
                    add_coverage_point(values[i], method, sp, mc.curve.points[i], cfg_.mc.n_snapshots);
                }
                return;
            }
            auto const curve = coverage_curve(tiers, values, method, curve_);
            for (std::size_t i = 0; i < values.size(); ++i) {
                add_coverage_point(values[i], method, sp, curve.points[i], std::nullopt);
            }
        } catch (Error const& e) {
            for (double v : values) {
                add_failure(v, method, e.what(), tiers.size());
            }
        }
    }

    void run_ratio_sweep(std::vector<TierConfig> const& tiers, CoverageMethod method)
    {
        std::vector<double> const threshold{cfg_.sweep.threshold_db};
        for (double v : cfg_.sweep.values) {
            try {
                auto const sp = apply_sweep(tiers, cfg_.sweep.variable, v);
                auto const active = sp.active();
                if (method == CoverageMethod::MonteCarlo) {
                    auto const mc = estimate_coverage(active, threshold, cfg_.mc);
                    add_coverage_point(v, method, sp, mc.curve.points[0], cfg_.mc.n_snapshots);
                } else {
                    auto const curve = coverage_curve(active, threshold, method, curve_);
                    add_coverage_point(v, method, sp, curve.points[0], std::nullopt);
                }
            } catch (Error const& e) {
                add_failure(v, method, e.what(), tiers.size());
            }
        }
    }

    void run_association(std::vector<TierConfig> const& tiers, CoverageMethod method)
    {
        auto const name = to_string(method);
        for (double v : cfg_.sweep.values) {
            try {
                auto const sp = apply_sweep(tiers, cfg_.sweep.variable, v);
                auto const active = sp.active();
                std::vector<double> mass;
                double none = 0;
                std::optional<std::uint64_t> n;
                if (method == CoverageMethod::MonteCarlo) {
                    auto const counts = estimate_association_proportions(active, cfg_.mc);
                    for (std::size_t k = 0; k < active.size(); ++k) {
                        mass.push_back(counts.tier(k).value);
                    }
                    none = counts.unserved().value;
                    n = counts.n_snapshots;
                } else {
                    double sum = 0;
                    for (std::size_t k = 0; k < active.size(); ++k) {
                        mass.push_back(association_mass(active, k, curve_.analytic));
                        sum += mass.back();
                    }
                    none = std::max(0.0, 1.0 - sum);
                }
                auto const per_tier = sp.expand(mass);
                for (std::size_t k = 0; k < per_tier.size(); ++k) {
                    table_.rows.push_back({v, name, table_.tier_names[k], per_tier[k],
                                           n ? std::optional(half_width(per_tier[k], *n))
                                             : std::nullopt});
                }
                table_.rows.push_back(
                    {v, name, "none", none,
                     n ? std::optional(half_width(none, *n)) : std::nullopt});
            } catch (Error const& e) {
                add_failure(v, method, e.what(), tiers.size());
            }
        }
    }

    ExperimentConfig const& cfg_;
    ExperimentResult& result_;
    std::string scenario_;
    ResultTable table_;
    CurveOptions curve_;
};

void write_file(std::filesystem::path const& path, std::string const& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
    out << content;
    out.close();
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

std::vector<std::string> split(std::string const& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_number(std::string const& s, int line)
{
    if (s == "nan") return kNaN;
    try {
        std::size_t used = 0;
        double const v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (std::exception const&) {
    }
    throw ParseError("<csv>", line, "", "bad number '" + s + "'");
}

}  // namespace

std::vector<TierConfig> scenario_tiers(ExperimentConfig const& cfg,
                                       ScenarioSpec const& scenario)
{
    std::vector<TierConfig> tiers;
    for (auto const& spec : scenario.tiers) {
        if (spec.enabled) {
            tiers.push_back(spec.build());
        }
    }
    if (cfg.interference_limited) {
        tiers = interference_limited(std::move(tiers));
    }
    return tiers;
}

ExperimentResult run_experiment(ExperimentConfig const& cfg)
{
    cfg.validate();
    ExperimentResult result;
    result.name = cfg.name;

    Json meta;
    meta["name"] = cfg.name;
    meta["description"] = cfg.description;
    meta["metric"] = to_string(cfg.metric);
    meta["sweep"] = {{"variable", to_string(cfg.sweep.variable)},
                     {"values", cfg.sweep.values}};
    if (cfg.sweep.variable != SweepVariable::ThresholdDb) {
        meta["sweep"]["threshold_db"] = cfg.sweep.threshold_db;
    }
    Json methods = Json::array();
    for (auto m : cfg.methods) {
        methods.push_back(to_string(m));
    }
    meta["methods"] = methods;
    meta["mc"] = {{"snapshots", cfg.mc.n_snapshots},
                  {"seed", cfg.mc.seed},
                  {"representation",
                   cfg.mc.representation == Representation::Annulus ? "annulus" : "sphere"}};
    meta["interference_limited"] = cfg.interference_limited;
    meta["void_aware_tail"] = cfg.void_aware_tail;
    if (cfg.epsilon) meta["closed_form_epsilon"] = *cfg.epsilon;
    if (cfg.walker) {
        auto const& w = *cfg.walker;
        meta["walker"] = {{"n_sats", w.n_sats},
                          {"n_orbits", w.n_orbits},
                          {"altitude_km", w.altitude_km},
                          {"phasing_factor", w.phasing_factor},
                          {"terrestrial_spacing_km", w.spacing_km()},
                          {"user_search_radius_deg", w.user_search_radius_deg}};
    }

    Runner runner(cfg, result);
    Json scenarios = Json::array();
    for (auto const& sc : cfg.scenarios) {
        Json sm;
        sm["name"] = sc.name;
        try {
            runner.run_scenario(sc, sm);
        } catch (Error const& e) {
            result.failures.push_back(cfg.name + "/" + sc.name + ": " + e.what());
        }
        scenarios.push_back(sm);
    }
    meta["scenarios"] = scenarios;
    meta["failures"] = result.failures;
    result.metadata_json = meta.dump(2) + "\n";
    return result;
}

std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string format_csv(ResultTable const& table)
{
    std::string out = "sweep_value,method,tier,value,ci95\n";
    for (auto const& r : table.rows) {
        out += format_number(r.sweep_value) + "," + r.method + "," + r.tier + "," +
               format_number(r.value) + "," + (r.ci95 ? format_number(*r.ci95) : "") + "\n";
    }
    return out;
}

ResultTable parse_csv(std::string const& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "sweep_value,method,tier,value,ci95") {
        throw ParseError("<csv>", 1, "", "missing or unexpected header");
    }
    ResultTable table;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        auto const f = split(line, ',');
        if (f.size() != 5) {
            throw ParseError("<csv>", n, "", "expected 5 fields");
        }
        ResultRow row{parse_number(f[0], n), f[1], f[2], parse_number(f[3], n), std::nullopt};
        if (!f[4].empty()) row.ci95 = parse_number(f[4], n);
        if (row.tier != "total" && row.tier != "none" &&
            std::find(table.tier_names.begin(), table.tier_names.end(), row.tier) ==
                table.tier_names.end()) {
            table.tier_names.push_back(row.tier);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string format_plotdata(ResultTable const& table, std::string const& method)
{
    std::vector<std::string> series;
    std::vector<double> sweeps;
    std::map<std::pair<double, std::string>, ResultRow const*> cells;
    for (auto const& r : table.rows) {
        if (r.method != method) continue;
        if (std::find(series.begin(), series.end(), r.tier) == series.end()) {
            series.push_back(r.tier);
        }
        if (std::find(sweeps.begin(), sweeps.end(), r.sweep_value) == sweeps.end()) {
            sweeps.push_back(r.sweep_value);
        }
        cells[{r.sweep_value, r.tier}] = &r;
    }
    std::string out = "# sweep_value";
    for (auto const& s : series) out += " " + s;
    out += " ci95\n";
    for (double v : sweeps) {
        out += format_number(v);
        std::optional<double> ci;
        for (auto const& s : series) {
            auto it = cells.find({v, s});
            out += " " + (it == cells.end() ? std::string("nan") : format_number(it->second->value));
            if (it != cells.end() && s == series.front()) ci = it->second->ci95;
        }
        out += " " + (ci ? format_number(*ci) : std::string("nan")) + "\n";
    }
    return out;
}

std::vector<std::string> emit(ExperimentResult const& result, std::string const& dir)
{
    namespace fs = std::filesystem;
    fs::path const root(dir.empty() ? "." : dir);
    try {
        fs::create_directories(root);
    } catch (fs::filesystem_error const& e) {
        throw IoError("cannot create '" + root.string() + "': " + e.what());
    }
    std::vector<std::string> written;
    for (auto const& table : result.tables) {
        std::string const stem =
            result.name + (table.scenario.empty() ? "" : "_" + table.scenario);
        auto const csv = root / (stem + ".csv");
        write_file(csv, format_csv(table));
        written.push_back(csv.string());
        std::vector<std::string> methods;
        for (auto const& r : table.rows) {
            if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
                methods.push_back(r.method);
            }
        }
        for (auto const& m : methods) {
            auto const dat = root / (stem + "_" + m + ".dat");
            write_file(dat, format_plotdata(table, m));
            written.push_back(dat.string());
        }
    }
    auto const meta = root / (result.name + ".meta.json");
    write_file(meta, result.metadata_json);
    written.push_back(meta.string());
    return written;
}

}  // namespace istn

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "istn/errors.hpp"
#include "istn/experiments.hpp"

namespace istn {

namespace {

using FieldMap = std::map<std::string, YAML::Node>;

int line_of(YAML::Node const& node) { return node.Mark().line + 1; }

class Reader {
  public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    std::vector<std::string>& problems() { return problems_; }

    void problem(YAML::Node const& node, std::string const& what)
    {
        problems_.push_back("line " + std::to_string(line_of(node)) + ": " + what);
    }

    [[noreturn]] void type_error(YAML::Node const& node, std::string const& field,
                                 std::string const& expected)
    {
        throw ParseError(source_, line_of(node), field, "expected " + expected);
    }

    double number(YAML::Node const& node, std::string const& field)
    {
        if (!node.IsScalar()) {
            type_error(node, field, "a number");
        }
        try {
            double const v = node.as<double>();
            if (!std::isfinite(v)) {
                type_error(node, field, "a finite number");
            }
            return v;
        } catch (YAML::BadConversion const&) {
            type_error(node, field, "a number");
        }
    }

    std::int64_t integer(YAML::Node const& node, std::string const& field)
    {
        if (!node.IsScalar()) {
            type_error(node, field, "an integer");
        }
        try {
            return node.as<std::int64_t>();
        } catch (YAML::BadConversion const&) {
            type_error(node, field, "an integer");
        }
    }

    bool boolean(YAML::Node const& node, std::string const& field)
    {
        if (!node.IsScalar()) {
            type_error(node, field, "true or false");
        }
        try {
            return node.as<bool>();
        } catch (YAML::BadConversion const&) {
            type_error(node, field, "true or false");
        }
    }

    std::string text(YAML::Node const& node, std::string const& field)
    {
        if (!node.IsScalar()) {
            type_error(node, field, "a string");
        }
        return node.as<std::string>();
    }

    void require_map(YAML::Node const& node, std::string const& field)
    {
        if (!node.IsMap()) {
            type_error(node, field, "a mapping");
        }
    }

    void check_keys(YAML::Node const& node, std::set<std::string> const& allowed,
                    std::string const& context)
    {
        for (auto const& kv : node) {
            auto const key = kv.first.as<std::string>();
            if (!allowed.count(key)) {
                problem(kv.first, "unknown field '" + key + "' in " + context);
            }
        }
    }

    std::string const& source() const { return source_; }

  private:
    std::string source_;
    std::vector<std::string> problems_;
};

LinkBudget link_preset(std::string const& name)
{
    if (name == "terrestrial") return presets::terrestrial();
    if (name == "satellite") return presets::satellite();
    throw InvalidParameter("unknown link preset '" + name + "'");
}

FadingLaw parse_fading(Reader& rd, YAML::Node const& node)
{
    std::string const field = "fading";
    if (node.IsScalar()) {
        auto const name = rd.text(node, field);
        if (name == "rayleigh") {
            return FadingLaw::rayleigh();
        }
        try {
            return FadingLaw(presets::shadowing(name));
        } catch (InvalidParameter const&) {
            rd.problem(node, "unknown fading '" + name + "'");
            return FadingLaw::rayleigh();
        }
    }
    rd.require_map(node, field);
    rd.check_keys(node, {"type", "preset", "m", "b", "omega", "mean"}, "fading");
    std::string type = "shadowed_rician";
    if (node["type"]) {
        type = rd.text(node["type"], "fading.type");
    } else if (!node["preset"]) {
        rd.problem(node, "fading needs a 'type' or a 'preset'");
        return FadingLaw::rayleigh();
    }
    try {
        if (type == "rayleigh") {
            double const mean = node["mean"] ? rd.number(node["mean"], "fading.mean") : 1.0;
            return FadingLaw::rayleigh(mean);
        }
        if (type == "nakagami") {
            if (!node["m"]) {
                rd.problem(node, "nakagami fading needs 'm'");
                return FadingLaw::rayleigh();
            }
            int const m = static_cast<int>(rd.integer(node["m"], "fading.m"));
            double const mean = node["mean"] ? rd.number(node["mean"], "fading.mean") : 1.0;
            return FadingLaw(NakagamiParams::make(m, mean));
        }
        if (type == "shadowed_rician") {
            if (node["preset"]) {
                auto const name = rd.text(node["preset"], "fading.preset");
                return FadingLaw(presets::shadowing(name));
            }
            if (!node["m"] || !node["b"] || !node["omega"]) {
                rd.problem(node, "shadowed_rician fading needs 'preset' or all of m, b, omega");
                return FadingLaw::rayleigh();
            }
            int const m = static_cast<int>(rd.integer(node["m"], "fading.m"));
            return FadingLaw(ShadowedRicianParams::make(
                m, rd.number(node["b"], "fading.b"), rd.number(node["omega"], "fading.omega")));
        }
        rd.problem(node, "unknown fading type '" + type + "'");
    } catch (InvalidParameter const& e) {
        rd.problem(node, e.what());
    }
    return FadingLaw::rayleigh();
}

std::set<std::string> const kTierKeys{
    "name", "link", "altitude_km", "earth_radius_km", "carrier_ghz", "bandwidth_mhz",
    "tx_power_dbm", "tx_main_gain_dbi", "tx_side_gain_dbi", "user_main_gain_dbi",
    "user_side_gain_dbi", "path_loss_exp", "bias", "noise_psd_dbm_per_hz",
    "theta_deg", "mean_visible", "density_per_km2", "fading", "enabled"};

TierSpec parse_tier(Reader& rd, FieldMap const& fields, YAML::Node const& anchor)
{
    TierSpec spec;
    auto has = [&](char const* key) { return fields.count(key) > 0; };
    auto at = [&](char const* key) -> YAML::Node const& { return fields.at(key); };
    if (has("link")) {
        auto const name = rd.text(at("link"), "link");
        try {
            spec.budget = link_preset(name);
        } catch (InvalidParameter const& e) {
            rd.problem(at("link"), e.what());
        }
    }
    if (has("name")) {
        spec.budget.name = rd.text(at("name"), "name");
    }
    auto set = [&](char const* key, double& target) {
        if (has(key)) {
            target = rd.number(at(key), key);
        }
    };
    set("altitude_km", spec.budget.altitude_km);
    set("earth_radius_km", spec.budget.earth_radius_km);
    set("carrier_ghz", spec.budget.carrier_ghz);
    set("bandwidth_mhz", spec.budget.bandwidth_mhz);
    set("tx_power_dbm", spec.budget.tx_power_dbm);
    set("tx_main_gain_dbi", spec.budget.tx_main_gain_dbi);
    set("tx_side_gain_dbi", spec.budget.tx_side_gain_dbi);
    set("user_main_gain_dbi", spec.budget.user_main_gain_dbi);
    set("user_side_gain_dbi", spec.budget.user_side_gain_dbi);
    set("path_loss_exp", spec.budget.path_loss_exp);
    set("bias", spec.budget.bias);
    set("noise_psd_dbm_per_hz", spec.budget.noise_psd_dbm_per_hz);
    if (has("theta_deg")) spec.theta_deg = rd.number(at("theta_deg"), "theta_deg");
    if (has("mean_visible")) spec.mean_visible = rd.number(at("mean_visible"), "mean_visible");
    if (has("density_per_km2")) {
        spec.density_per_km2 = rd.number(at("density_per_km2"), "density_per_km2");
    }
    if (has("fading")) spec.fading = parse_fading(rd, at("fading"));
    if (has("enabled")) spec.enabled = rd.boolean(at("enabled"), "enabled");

    std::string const who = "tier '" + spec.budget.name + "'";
    if (spec.budget.name.empty()) {
        rd.problem(anchor, "every tier needs a 'name'");
    } else if (spec.budget.name.find_first_of(", \t\n\"") != std::string::npos ||
               spec.budget.name == "total" || spec.budget.name == "none") {
        rd.problem(anchor, who + ": name must not contain separators or be 'total'/'none'");
    }
    if (spec.mean_visible && spec.density_per_km2) {
        rd.problem(anchor, who + ": give either mean_visible or density_per_km2, not both");
    } else if (!spec.mean_visible && !spec.density_per_km2) {
        rd.problem(anchor, who + ": needs mean_visible or density_per_km2");
    }
    if (spec.mean_visible && *spec.mean_visible < 0) {
        rd.problem(anchor, who + ": mean_visible must be nonnegative");
    }
    if (spec.density_per_km2 && *spec.density_per_km2 < 0) {
        rd.problem(anchor, who + ": density_per_km2 must be nonnegative");
    }
    if (!(spec.budget.altitude_km > 0)) {
        rd.problem(anchor, who + ": altitude_km must be positive");
    } else {
        try {
            (void)spec.build();
        } catch (Error const& e) {
            rd.problem(anchor, who + ": " + e.what());
        }
    }
    return spec;
}

FieldMap fields_of(YAML::Node const& node)
{
    FieldMap out;
    for (auto const& kv : node) {
        out[kv.first.as<std::string>()] = kv.second;
    }
    return out;
}

std::vector<double> parse_values(Reader& rd, YAML::Node const& sweep)
{
    std::vector<double> values;
    if (sweep["values"]) {
        auto const& node = sweep["values"];
        if (!node.IsSequence()) {
            rd.type_error(node, "sweep.values", "a list of numbers");
        }
        for (auto const& v : node) {
            values.push_back(rd.number(v, "sweep.values"));
        }
    }
    if (sweep["range"]) {
        auto const& node = sweep["range"];
        rd.require_map(node, "sweep.range");
        rd.check_keys(node, {"from", "to", "step"}, "sweep.range");
        if (!node["from"] || !node["to"] || !node["step"]) {
            rd.problem(node, "sweep.range needs from, to and step");
            return values;
        }
        double const from = rd.number(node["from"], "sweep.range.from");
        double const to = rd.number(node["to"], "sweep.range.to");
        double const step = rd.number(node["step"], "sweep.range.step");
        if (!(step > 0) || to < from) {
            rd.problem(node, "sweep.range needs step > 0 and to >= from");
            return values;
        }
        auto const n = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
        for (long i = 0; i < n; ++i) {
            double const v = from + static_cast<double>(i) * step;
            values.push_back(std::round(v * 1e12) / 1e12);
        }
    }
    return values;
}

std::array<double, 2> parse_epsilon(Reader& rd, YAML::Node const& e)
{
    if (!e.IsSequence() || e.size() != 2) {
        rd.type_error(e, "closed_form_epsilon", "a list of two numbers");
    }
    return {rd.number(e[0], "closed_form_epsilon"), rd.number(e[1], "closed_form_epsilon")};
}

}  // namespace

std::string to_string(SweepVariable v)
{
    switch (v) {
        case SweepVariable::ThresholdDb: return "threshold_db";
        case SweepVariable::BiasRatio: return "bias_ratio";
        case SweepVariable::DensityRatio: return "density_ratio";
        case SweepVariable::TerrestrialBias: return "terrestrial_bias";
    }
    return "unknown";
}

std::string to_string(Metric m)
{
    return m == Metric::Coverage ? "coverage" : "association";
}

std::string KappaSpec::describe() const
{
    switch (mode) {
        case Mode::LowerBound: return "lower_bound";
        case Mode::Minimax: return "minimax";
        case Mode::Scalar: return KappaPolicy::scalar(value).describe();
        case Mode::Fit: return "fit";
    }
    return "unknown";
}

TierConfig TierSpec::build() const
{
    double const theta = theta_deg ? *theta_deg * std::acos(-1.0) / 180.0 : 0.0;
    auto tier = make_tier(budget, fading, 0.0, theta);
    if (density_per_km2) {
        tier.density_per_km2 = *density_per_km2;
    } else if (mean_visible) {
        tier.density_per_km2 = density_for_mean_count(tier, *mean_visible);
    }
    return tier;
}

void ExperimentConfig::validate() const
{
    std::vector<std::string> problems;
    if (name.empty()) problems.push_back("'name' is required");
    if (scenarios.empty()) problems.push_back("at least one scenario is required");
    if (methods.empty()) problems.push_back("at least one method is required");
    if (sweep.values.empty()) problems.push_back("sweep grid is empty");
    if (!std::is_sorted(sweep.values.begin(), sweep.values.end())) {
        problems.push_back("sweep values must be sorted");
    }
    if (mc.n_snapshots < 1) problems.push_back("mc.snapshots must be at least 1");
    bool const ratio_sweep = sweep.variable != SweepVariable::ThresholdDb;
    for (auto const& sc : scenarios) {
        std::string const who = sc.name.empty() ? "config" : "scenario '" + sc.name + "'";
        std::size_t enabled = 0;
        std::set<std::string> names;
        for (auto const& t : sc.tiers) {
            enabled += t.enabled ? 1 : 0;
            if (!names.insert(t.budget.name).second) {
                problems.push_back(who + ": duplicate tier name '" + t.budget.name + "'");
            }
        }
        if (enabled == 0) problems.push_back(who + ": no enabled tier");
        if (ratio_sweep && enabled != 2) {
            problems.push_back(who + ": " + to_string(sweep.variable) +
                               " sweeps need exactly two enabled tiers");
        }
    }
    if (ratio_sweep) {
        for (double v : sweep.values) {
            if (v < 0) {
                problems.push_back("sweep values must be nonnegative for " +
                                   to_string(sweep.variable));
                break;
            }
            if (v == 0 && sweep.variable == SweepVariable::TerrestrialBias) {
                problems.push_back("terrestrial_bias must be positive");
                break;
            }
        }
    }
    for (auto m : methods) {
        if (metric == Metric::Association &&
            !(m == CoverageMethod::Exact || m == CoverageMethod::MonteCarlo)) {
            problems.push_back("association metric supports methods exact and mc only");
        }
        if (m == CoverageMethod::ClosedForm && !epsilon) {
            for (auto const& sc : scenarios) {
                if (!sc.epsilon) {
                    problems.push_back("closed_form needs closed_form.epsilon");
                    break;
                }
            }
        }
        if (m == CoverageMethod::GridBaseline) {
            if (!walker) problems.push_back("grid_baseline needs a 'walker' section");
            if (ratio_sweep) problems.push_back("grid_baseline supports threshold sweeps only");
        }
    }
    if (match_densities && !walker) {
        problems.push_back("walker.match_densities needs a 'walker' section");
    }
    if (walker) {
        try {
            walker->validate();
        } catch (ConfigError const& e) {
            problems.push_back(e.what());
        }
    }
    if (kappa.mode == KappaSpec::Mode::Scalar) {
        try {
            (void)KappaPolicy::scalar(kappa.value).kappas(2);
        } catch (KappaOutOfRange const& e) {
            problems.push_back(e.what());
        }
    }
    if (!problems.empty()) {
        throw ValidationError(problems);
    }
}

ExperimentConfig parse_config(std::string const& text, std::string const& source)
{
    Reader rd(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (YAML::ParserException const& e) {
        throw ParseError(source, e.mark.line + 1, "", e.msg);
    }
    if (!root.IsMap()) {
        throw ParseError(source, 1, "", "config must be a mapping");
    }
    rd.check_keys(root,
                  {"name", "description", "tiers", "scenarios", "interference_limited",
                   "sweep", "metric", "methods", "mc", "kappa", "closed_form",
                   "analytics", "walker", "output"},
                  "config");

    ExperimentConfig cfg;
    cfg.source = source;
    if (root["name"]) cfg.name = rd.text(root["name"], "name");
    if (root["description"]) cfg.description = rd.text(root["description"], "description");
    if (root["interference_limited"]) {
        cfg.interference_limited = rd.boolean(root["interference_limited"], "interference_limited");
    }

    // Base tiers, kept as raw field maps so scenarios can override fields.
    std::vector<std::pair<FieldMap, YAML::Node>> base;
    if (!root["tiers"] || !root["tiers"].IsSequence() || root["tiers"].size() == 0) {
        if (root["tiers"]) {
            rd.problem(root["tiers"], "'tiers' must be a nonempty list");
        } else {
            rd.problem(root, "'tiers' is required");
        }
    } else {
        for (auto const& t : root["tiers"]) {
            rd.require_map(t, "tiers");
            rd.check_keys(t, kTierKeys, "tier");
            base.emplace_back(fields_of(t), t);
        }
    }
    auto tier_name = [&](FieldMap const& f) {
        auto it = f.find("name");
        return it == f.end() ? std::string{} : rd.text(it->second, "name");
    };

    if (root["scenarios"]) {
        auto const& list = root["scenarios"];
        if (!list.IsSequence() || list.size() == 0) {
            rd.problem(list, "'scenarios' must be a nonempty list");
        } else {
            for (auto const& sc : list) {
                rd.require_map(sc, "scenarios");
                rd.check_keys(sc, {"name", "tiers", "closed_form_epsilon"}, "scenario");
                ScenarioSpec spec;
                if (sc["name"]) spec.name = rd.text(sc["name"], "scenarios.name");
                if (spec.name.empty() ||
                    spec.name.find_first_of("/\\ \t,") != std::string::npos) {
                    rd.problem(sc, "scenario needs a 'name' without separators");
                }
                if (sc["closed_form_epsilon"]) {
                    spec.epsilon = parse_epsilon(rd, sc["closed_form_epsilon"]);
                }
                FieldMap overrides;
                if (sc["tiers"]) {
                    rd.require_map(sc["tiers"], "scenarios.tiers");
                    overrides = fields_of(sc["tiers"]);
                }
                for (auto const& [name, node] : overrides) {
                    bool found = false;
                    for (auto const& b : base) {
                        found = found || tier_name(b.first) == name;
                    }
                    if (!found) {
                        rd.problem(node, "scenario '" + spec.name +
                                             "' overrides unknown tier '" + name + "'");
                    }
                }
                for (auto const& [fields, anchor] : base) {
                    FieldMap merged = fields;
                    auto it = overrides.find(tier_name(fields));
                    if (it != overrides.end()) {
                        rd.require_map(it->second, "scenarios.tiers");
                        rd.check_keys(it->second, kTierKeys, "tier override");
                        for (auto const& kv : it->second) {
                            merged[kv.first.as<std::string>()] = kv.second;
                        }
                    }
                    spec.tiers.push_back(parse_tier(rd, merged, anchor));
                }
                cfg.scenarios.push_back(std::move(spec));
            }
        }
    } else if (!base.empty()) {
        ScenarioSpec spec;
        for (auto const& [fields, anchor] : base) {
            spec.tiers.push_back(parse_tier(rd, fields, anchor));
        }
        cfg.scenarios.push_back(std::move(spec));
    }

    if (auto const& sw = root["sweep"]) {
        rd.require_map(sw, "sweep");
        rd.check_keys(sw, {"variable", "values", "range", "threshold_db"}, "sweep");
        if (sw["variable"]) {
            auto const v = rd.text(sw["variable"], "sweep.variable");
            bool found = false;
            for (auto var : {SweepVariable::ThresholdDb, SweepVariable::BiasRatio,
                             SweepVariable::DensityRatio, SweepVariable::TerrestrialBias}) {
                if (to_string(var) == v) {
                    cfg.sweep.variable = var;
                    found = true;
                }
            }
            if (!found) rd.problem(sw["variable"], "unknown sweep variable '" + v + "'");
        }
        cfg.sweep.values = parse_values(rd, sw);
        if (sw["threshold_db"]) {
            cfg.sweep.threshold_db = rd.number(sw["threshold_db"], "sweep.threshold_db");
        }
    } else {
        rd.problem(root, "'sweep' is required");
    }

    if (root["metric"]) {
        auto const m = rd.text(root["metric"], "metric");
        if (m == "coverage") {
            cfg.metric = Metric::Coverage;
        } else if (m == "association") {
            cfg.metric = Metric::Association;
        } else {
            rd.problem(root["metric"], "unknown metric '" + m + "'");
        }
    }

    if (auto const& ms = root["methods"]) {
        if (!ms.IsSequence()) {
            rd.type_error(ms, "methods", "a list of method names");
        }
        for (auto const& m : ms) {
            auto const name = rd.text(m, "methods");
            try {
                cfg.methods.push_back(parse_coverage_method(name));
            } catch (InvalidParameter const&) {
                rd.problem(m, "unknown method '" + name + "'");
            }
        }
    }

    if (auto const& mc = root["mc"]) {
        rd.require_map(mc, "mc");
        rd.check_keys(mc, {"snapshots", "seed", "workers", "representation"}, "mc");
        if (mc["snapshots"]) {
            auto const n = rd.integer(mc["snapshots"], "mc.snapshots");
            if (n < 1) rd.problem(mc["snapshots"], "mc.snapshots must be at least 1");
            cfg.mc.n_snapshots = static_cast<std::uint64_t>(std::max<std::int64_t>(n, 1));
        }
        if (mc["seed"]) {
            auto const s = rd.integer(mc["seed"], "mc.seed");
            if (s < 0) rd.problem(mc["seed"], "mc.seed must be nonnegative");
            cfg.mc.seed = static_cast<std::uint64_t>(s);
        }
        if (mc["workers"]) {
            auto const w = rd.integer(mc["workers"], "mc.workers");
            if (w < 0) rd.problem(mc["workers"], "mc.workers must be nonnegative");
            cfg.mc.workers = static_cast<unsigned>(std::max<std::int64_t>(w, 0));
        }
        if (mc["representation"]) {
            auto const r = rd.text(mc["representation"], "mc.representation");
            if (r == "annulus") {
                cfg.mc.representation = Representation::Annulus;
            } else if (r == "sphere") {
                cfg.mc.representation = Representation::Sphere;
            } else {
                rd.problem(mc["representation"], "representation must be annulus or sphere");
            }
        }
    }

    if (auto const& k = root["kappa"]) {
        if (k.IsMap()) {
            rd.check_keys(k, {"scalar", "fit_thresholds_db"}, "kappa");
            if (k["scalar"]) {
                cfg.kappa.mode = KappaSpec::Mode::Scalar;
                cfg.kappa.value = rd.number(k["scalar"], "kappa.scalar");
            } else if (k["fit_thresholds_db"]) {
                cfg.kappa.mode = KappaSpec::Mode::Fit;
                cfg.kappa.fit_thresholds_db.clear();
                for (auto const& v : k["fit_thresholds_db"]) {
                    cfg.kappa.fit_thresholds_db.push_back(rd.number(v, "kappa.fit_thresholds_db"));
                }
            }
        } else {
            auto const s = rd.text(k, "kappa");
            if (s == "lower_bound") {
                cfg.kappa.mode = KappaSpec::Mode::LowerBound;
            } else if (s == "minimax") {
                cfg.kappa.mode = KappaSpec::Mode::Minimax;
            } else if (s == "fit") {
                cfg.kappa.mode = KappaSpec::Mode::Fit;
            } else {
                cfg.kappa.mode = KappaSpec::Mode::Scalar;
                cfg.kappa.value = rd.number(k, "kappa");
            }
        }
    }

    if (auto const& cf = root["closed_form"]) {
        rd.require_map(cf, "closed_form");
        rd.check_keys(cf, {"epsilon"}, "closed_form");
        if (cf["epsilon"]) {
            cfg.epsilon = parse_epsilon(rd, cf["epsilon"]);
        }
    }

    if (auto const& an = root["analytics"]) {
        rd.require_map(an, "analytics");
        rd.check_keys(an, {"void_aware_tail"}, "analytics");
        if (an["void_aware_tail"]) {
            cfg.void_aware_tail = rd.boolean(an["void_aware_tail"], "analytics.void_aware_tail");
        }
    }

    if (auto const& w = root["walker"]) {
        rd.require_map(w, "walker");
        rd.check_keys(w,
                      {"n_sats", "n_orbits", "altitude_km", "phasing_factor",
                       "reference_lat_deg", "reference_lon_deg", "terrestrial_spacing_km",
                       "terrestrial_mean_count", "terrestrial_height_km",
                       "user_search_radius_deg", "match_densities", "match_probes"},
                      "walker");
        WalkerStarConfig wc;
        auto num = [&](char const* key, double& target) {
            if (w[key]) target = rd.number(w[key], std::string("walker.") + key);
        };
        auto integer = [&](char const* key, int& target) {
            if (w[key]) target = static_cast<int>(rd.integer(w[key], std::string("walker.") + key));
        };
        integer("n_sats", wc.n_sats);
        integer("n_orbits", wc.n_orbits);
        integer("phasing_factor", wc.phasing_factor);
        num("altitude_km", wc.altitude_km);
        num("reference_lat_deg", wc.reference_lat_deg);
        num("reference_lon_deg", wc.reference_lon_deg);
        num("terrestrial_spacing_km", wc.terrestrial_spacing_km);
        num("terrestrial_mean_count", wc.terrestrial_mean_count);
        num("terrestrial_height_km", wc.terrestrial_height_km);
        num("user_search_radius_deg", wc.user_search_radius_deg);
        if (w["match_densities"]) {
            cfg.match_densities = rd.boolean(w["match_densities"], "walker.match_densities");
        }
        if (w["match_probes"]) {
            auto const n = rd.integer(w["match_probes"], "walker.match_probes");
            if (n < 1) rd.problem(w["match_probes"], "walker.match_probes must be at least 1");
            cfg.match_probes = static_cast<std::uint64_t>(std::max<std::int64_t>(n, 1));
        }
        cfg.walker = wc;
    }

    if (auto const& out = root["output"]) {
        rd.require_map(out, "output");
        rd.check_keys(out, {"dir"}, "output");
        if (out["dir"]) cfg.output_dir = rd.text(out["dir"], "output.dir");
    }

    auto problems = rd.problems();
    try {
        cfg.validate();
    } catch (ValidationError const& e) {
        for (auto const& p : e.problems()) {
            problems.push_back(p);
        }
    }
    if (!problems.empty()) {
        throw ValidationError(problems);
    }
    return cfg;
}

ExperimentConfig load_config(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read config '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

}  // namespace istn

#include "phasetrack/serialization.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

namespace phasetrack::io {

namespace {

using spec::FilterKind;
using spec::FilterSpec;

const std::set<std::string> kSpecFields{"id", "kind", "M", "f_c", "K1", "K0", "K_phi",
                                        "q_policy", "basis", "laguerre_p", "bessel_norm"};
const std::set<std::string> kScenarioFields{"name", "triplet", "N", "alpha", "beta", "snr", "trials", "noise",
                                            "seed", "window_start", "unwrap", "filters"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, std::string_view what) {
    if (!j.is_object()) {
        throw SchemaError(fmt::format("{} must be a JSON object", what));
    }
    for (const auto& [key, _] : j.items()) {
        if (!allowed.contains(key)) {
            throw SchemaError(fmt::format("{}: unknown field '{}'", what, key));
        }
    }
}

template <typename T>
T get_field(const json& j, const char* key, std::string_view what) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("{}: field '{}': {}", what, key, e.what()));
    }
}

std::string basis_name(iir::BasisKind kind) {
    switch (kind) {
    case iir::BasisKind::Bessel:
        return "bessel";
    case iir::BasisKind::Origin:
        return "origin";
    case iir::BasisKind::Laguerre:
        return "laguerre";
    }
    return "bessel";
}

iir::BasisKind basis_from(const std::string& s) {
    if (s == "bessel") {
        return iir::BasisKind::Bessel;
    }
    if (s == "origin") {
        return iir::BasisKind::Origin;
    }
    if (s == "laguerre") {
        return iir::BasisKind::Laguerre;
    }
    throw SchemaError(fmt::format("unknown basis '{}'", s));
}

std::string norm_name(iir::BesselNorm n) {
    switch (n) {
    case iir::BesselNorm::PhaseMidpoint:
        return "phase";
    case iir::BesselNorm::Magnitude3dB:
        return "3db";
    case iir::BesselNorm::UnitDelay:
        return "delay";
    }
    return "phase";
}

iir::BesselNorm norm_from(const std::string& s) {
    if (s == "phase") {
        return iir::BesselNorm::PhaseMidpoint;
    }
    if (s == "3db") {
        return iir::BesselNorm::Magnitude3dB;
    }
    if (s == "delay") {
        return iir::BesselNorm::UnitDelay;
    }
    throw SchemaError(fmt::format("unknown bessel_norm '{}' (phase|3db|delay)", s));
}

json q_policy_json(const iir::QSelection& q) {
    switch (q.policy) {
    case iir::QPolicy::Optimal:
        return "optimal";
    case iir::QPolicy::MinCng:
        return "min-cng";
    case iir::QPolicy::MinQ:
        return "min-q";
    case iir::QPolicy::Explicit:
        return json{{"explicit", q.value}};
    }
    return "optimal";
}

iir::QSelection q_policy_from(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "optimal") {
            return {iir::QPolicy::Optimal, 0.0};
        }
        if (s == "min-cng") {
            return {iir::QPolicy::MinCng, 0.0};
        }
        if (s == "min-q") {
            return {iir::QPolicy::MinQ, 0.0};
        }
        throw SchemaError(fmt::format("unknown q_policy '{}'", s));
    }
    if (j.is_object() && j.size() == 1 && j.contains("explicit") && j["explicit"].is_number()) {
        return iir::QSelection::explicit_delay(j["explicit"].get<double>());
    }
    throw SchemaError("q_policy must be \"optimal\", \"min-cng\", \"min-q\" or {\"explicit\": number}");
}

json complex_array(std::span<const cplx> v) {
    json out = json::array();
    for (const cplx& c : v) {
        out.push_back({c.real(), c.imag()});
    }
    return out;
}

ComplexVec complex_from(const json& j) {
    ComplexVec out;
    for (const auto& e : j) {
        out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    }
    return out;
}

signal::NoiseMode noise_from(const std::string& s) {
    if (s == "complex-gaussian") {
        return signal::NoiseMode::ComplexGaussian;
    }
    if (s == "complex-uniform") {
        return signal::NoiseMode::ComplexUniform;
    }
    if (s == "angle-gaussian") {
        return signal::NoiseMode::AngleGaussian;
    }
    throw SchemaError(fmt::format("unknown noise mode '{}'", s));
}

} // namespace

std::string noise_mode_name(signal::NoiseMode mode) {
    switch (mode) {
    case signal::NoiseMode::ComplexGaussian:
        return "complex-gaussian";
    case signal::NoiseMode::ComplexUniform:
        return "complex-uniform";
    case signal::NoiseMode::AngleGaussian:
        return "angle-gaussian";
    }
    return "complex-gaussian";
}

FilterSpec filter_spec_from_json(const json& j) {
    constexpr std::string_view what = "filter spec";
    reject_unknown(j, kSpecFields, what);
    FilterSpec s;
    const auto kind = get_field<std::string>(j, "kind", what);
    if (kind == "fir") {
        s.kind = FilterKind::Fir;
    } else if (kind == "iir") {
        s.kind = FilterKind::Iir;
    } else {
        throw SchemaError(fmt::format("filter spec: kind must be \"fir\" or \"iir\", got '{}'", kind));
    }
    s.K1 = get_field<int>(j, "K1", what);
    s.K0 = get_field<int>(j, "K0", what);
    if (j.contains("id")) {
        s.id = get_field<std::string>(j, "id", what);
    }
    if (j.contains("M")) {
        const auto m = get_field<double>(j, "M", what);
        if (!(m >= 1.0) || m != std::floor(m)) {
            throw SchemaError("filter spec: M must be a positive integer");
        }
        s.M = static_cast<std::size_t>(m);
    }
    if (j.contains("f_c")) {
        s.f_c = get_field<double>(j, "f_c", what);
    }
    if (j.contains("K_phi")) {
        s.K_phi = get_field<int>(j, "K_phi", what);
    }
    if (j.contains("q_policy")) {
        s.q_policy = q_policy_from(j["q_policy"]);
    }
    if (j.contains("basis")) {
        s.basis = basis_from(get_field<std::string>(j, "basis", what));
    }
    if (j.contains("laguerre_p")) {
        s.laguerre_p = get_field<double>(j, "laguerre_p", what);
    }
    if (j.contains("bessel_norm")) {
        s.bessel_norm = norm_from(get_field<std::string>(j, "bessel_norm", what));
    }
    try {
        spec::validate(s);
    } catch (const DesignError& e) {
        throw SchemaError(fmt::format("filter spec: {}", e.what()));
    }
    return s;
}

json to_json(const FilterSpec& s) {
    json j;
    if (s.id) {
        j["id"] = *s.id;
    }
    j["kind"] = s.kind == FilterKind::Fir ? "fir" : "iir";
    if (s.M) {
        j["M"] = *s.M;
    }
    if (s.f_c) {
        j["f_c"] = *s.f_c;
    }
    j["K1"] = s.K1;
    j["K0"] = s.K0;
    if (s.K_phi) {
        j["K_phi"] = *s.K_phi;
    }
    if (s.q_policy) {
        j["q_policy"] = q_policy_json(*s.q_policy);
    }
    if (s.basis) {
        j["basis"] = basis_name(*s.basis);
    }
    if (s.laguerre_p) {
        j["laguerre_p"] = *s.laguerre_p;
    }
    if (s.bessel_norm) {
        j["bessel_norm"] = norm_name(*s.bessel_norm);
    }
    return j;
}

json designed_to_json(const DesignedFilter& d) {
    json j;
    j["spec"] = to_json(d.spec);
    j["q"] = analysis::design_delay(d.filter);
    j["dc_group_delay"] = analysis::dc_group_delay(d.filter);
    j["v_LPF"] = analysis::noise_gain(d.filter, 0);
    json v = json::object();
    for (int k0 = 0; k0 <= 3; ++k0) {
        v[std::to_string(k0)] = analysis::noise_gain(d.filter, k0);
    }
    j["v_BPF"] = v;
    if (const auto* fir_filter = std::get_if<fir::FirFilter>(&d.filter)) {
        j["kind"] = "fir";
        j["K1"] = fir_filter->k1;
        j["K0"] = fir_filter->k0;
        j["h"] = fir_filter->h;
        j["diagnostics"] = {{"interpolating", fir_filter->interpolating}};
    } else {
        const auto& f = std::get<iir::IirFilter>(d.filter);
        j["kind"] = "iir";
        j["K1"] = f.k1;
        j["K0"] = f.k0;
        j["b"] = f.b;
        j["a"] = f.a;
        j["weights"] = complex_array(f.weights);
        j["basis"] = {{"kind", basis_name(f.basis.kind)},
                      {"poles", complex_array(f.basis.poles)},
                      {"f_c", f.basis.cutoff},
                      {"laguerre_p", f.basis.laguerre_pole},
                      {"bessel_norm", norm_name(f.basis.norm)}};
        const auto& g = f.diagnostics;
        j["diagnostics"] = {{"cng", g.cng},
                            {"imag_residue", g.imag_residue},
                            {"impulse_imag_residue", g.impulse_imag_residue},
                            {"condition_S", g.condition_S},
                            {"condition_Q", g.condition_Q},
                            {"constraint_residual", g.constraint_residual}};
    }
    return j;
}

DesignedFilter designed_from_json(const json& j) {
    try {
        DesignedFilter d;
        d.spec = filter_spec_from_json(j.at("spec"));
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "fir") {
            fir::FirFilter f;
            f.h = j.at("h").get<RealVec>();
            f.length = f.h.size();
            f.k1 = j.at("K1").get<int>();
            f.k0 = j.at("K0").get<int>();
            f.q = j.at("q").get<double>();
            f.interpolating = j.at("diagnostics").value("interpolating", false);
            d.filter = std::move(f);
        } else if (kind == "iir") {
            iir::IirFilter f;
            f.b = j.at("b").get<RealVec>();
            f.a = j.at("a").get<RealVec>();
            f.weights = complex_from(j.at("weights"));
            f.k1 = j.at("K1").get<int>();
            f.k0 = j.at("K0").get<int>();
            f.q = j.at("q").get<double>();
            const auto& b = j.at("basis");
            f.basis.kind = basis_from(b.at("kind").get<std::string>());
            f.basis.poles = complex_from(b.at("poles"));
            f.basis.cutoff = b.at("f_c").get<double>();
            f.basis.laguerre_pole = b.at("laguerre_p").get<double>();
            f.basis.norm = norm_from(b.at("bessel_norm").get<std::string>());
            const auto& g = j.at("diagnostics");
            f.diagnostics.cng = g.at("cng").get<double>();
            f.diagnostics.imag_residue = g.at("imag_residue").get<double>();
            f.diagnostics.impulse_imag_residue = g.at("impulse_imag_residue").get<double>();
            f.diagnostics.condition_S = g.at("condition_S").get<double>();
            f.diagnostics.condition_Q = g.at("condition_Q").get<double>();
            f.diagnostics.constraint_residual = g.at("constraint_residual").get<double>();
            if (f.a.size() != f.b.size() + 1 || f.a.empty()) {
                throw SchemaError("designed filter: a must have one more entry than b");
            }
            d.filter = std::move(f);
        } else {
            throw SchemaError(fmt::format("designed filter: unknown kind '{}'", kind));
        }
        return d;
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("designed filter: {}", e.what()));
    }
}

json report_summary(const analysis::ResponseReport& r) {
    json v = json::object();
    for (const auto& [k0, value] : r.v_bpf) {
        v[std::to_string(k0)] = value;
    }
    return {{"q", r.q},
            {"dc_group_delay", r.dc_group_delay},
            {"v_LPF", r.v_lpf},
            {"v_BPF", v},
            {"f_c", r.f_c},
            {"max_deviation_deg", r.max_deviation_deg}};
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

DesignedFilter load_filter(const std::filesystem::path& path) {
    const json j = read_json(path);
    if (j.is_object() && j.contains("spec")) {
        return designed_from_json(j);
    }
    FilterSpec s = filter_spec_from_json(j);
    return {s, spec::design(s)};
}

mc::Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
    constexpr std::string_view what = "scenario";
    reject_unknown(j, kScenarioFields, what);
    mc::Scenario sc;
    sc.name = j.value("name", std::string{});
    const auto triplet = get_field<std::vector<double>>(j, "triplet", what);
    if (triplet.size() != 3) {
        throw SchemaError("scenario: triplet must have three entries");
    }
    sc.triplet = {triplet[0], triplet[1], triplet[2]};
    sc.length = j.contains("N") ? get_field<std::size_t>(j, "N", what) : 1000;
    sc.config.alpha = j.contains("alpha") ? get_field<int>(j, "alpha", what) : 0;
    sc.config.beta = j.contains("beta") ? get_field<int>(j, "beta", what) : 0;
    sc.trials = j.contains("trials") ? get_field<std::size_t>(j, "trials", what) : 1000;
    sc.seed = j.contains("seed") ? get_field<std::uint64_t>(j, "seed", what) : 0;
    sc.window_start = j.contains("window_start") ? get_field<double>(j, "window_start", what) : 0.125;
    if (j.contains("noise")) {
        sc.noise = noise_from(get_field<std::string>(j, "noise", what));
    }
    if (j.contains("unwrap")) {
        const auto u = get_field<std::string>(j, "unwrap", what);
        if (u == "predictor") {
            sc.unwrap = realization::UnwrapSource::Predictor;
        } else if (u == "estimator") {
            sc.unwrap = realization::UnwrapSource::Estimator;
        } else {
            throw SchemaError(fmt::format("scenario: unwrap must be predictor|estimator, got '{}'", u));
        }
    }
    if (!j.contains("snr")) {
        sc.snr_db = mc::snr_range(0.0, 20.0, 1.0);
    } else if (j["snr"].is_array()) {
        sc.snr_db = get_field<RealVec>(j, "snr", what);
    } else {
        const json& r = j["snr"];
        reject_unknown(r, {"start", "stop", "step"}, "scenario snr");
        sc.snr_db = mc::snr_range(r.value("start", 0.0), r.value("stop", 20.0), r.value("step", 1.0));
    }

    if (!j.contains("filters") || !j["filters"].is_array() || j["filters"].empty()) {
        throw SchemaError("scenario: filters must be a nonempty array");
    }
    auto resolve = [&](const json& ref) -> DesignedFilter {
        if (ref.is_string()) {
            std::filesystem::path p = ref.get<std::string>();
            if (p.is_relative()) {
                p = base_dir / p;
            }
            if (!std::filesystem::exists(p)) {
                throw SchemaError(fmt::format("scenario: filter file '{}' not found", p.string()));
            }
            return load_filter(p);
        }
        FilterSpec s = filter_spec_from_json(ref);
        return {s, spec::design(s)};
    };
    for (const auto& entry : j["filters"]) {
        reject_unknown(entry, {"id", "estimator", "predictor"}, "scenario filter entry");
        if (!entry.contains("estimator")) {
            throw SchemaError("scenario filter entry needs an estimator");
        }
        const DesignedFilter est = resolve(entry["estimator"]);
        DesignedFilter prd = entry.contains("predictor")
                                 ? resolve(entry["predictor"])
                                 : DesignedFilter{spec::predictor_of(est.spec), spec::design(spec::predictor_of(est.spec))};
        const std::string id = entry.value("id", est.spec.id.value_or(fmt::format("filter{}", sc.filters.size())));
        sc.filters.push_back({id, est.filter, prd.filter});
    }
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(fmt::format("scenario: {}", e.what()));
    }
    return sc;
}

mc::Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json(read_json(path), path.parent_path());
}

} // namespace phasetrack::io

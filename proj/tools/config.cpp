#include "config.hpp"

#include <agepde/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <toml.hpp>

namespace agepde::cli {

namespace {

KeySpec real_key(std::string s, std::string k, std::optional<double> fallback, std::string expect,
                 std::optional<double> lo, std::optional<double> hi, bool lo_open, bool hi_open, std::string doc,
                 bool required = false) {
    KeySpec r{std::move(s), std::move(k), Kind::Real, required, std::nullopt, std::move(expect), {}, lo, hi, lo_open,
              hi_open, std::move(doc)};
    if (fallback) r.fallback = *fallback;
    return r;
}

KeySpec positive(std::string s, std::string k, std::optional<double> fallback, std::string doc, bool required = false) {
    return real_key(std::move(s), std::move(k), fallback, "real > 0", 0.0, std::nullopt, true, false, std::move(doc),
                    required);
}

KeySpec nonneg(std::string s, std::string k, std::optional<double> fallback, std::string doc) {
    return real_key(std::move(s), std::move(k), fallback, "real >= 0", 0.0, std::nullopt, false, false, std::move(doc));
}

KeySpec any_real(std::string s, std::string k, std::optional<double> fallback, std::string doc) {
    return real_key(std::move(s), std::move(k), fallback, "real", std::nullopt, std::nullopt, false, false,
                    std::move(doc));
}

KeySpec int_key(std::string s, std::string k, std::optional<std::int64_t> fallback, std::int64_t lo, std::string doc,
                bool required = false) {
    KeySpec r{std::move(s), std::move(k), Kind::Int, required, std::nullopt,
              "integer >= " + std::to_string(lo), {}, double(lo), std::nullopt, false, false, std::move(doc)};
    if (fallback) r.fallback = *fallback;
    return r;
}

KeySpec str_key(std::string s, std::string k, std::optional<std::string> fallback, std::vector<std::string> choices,
                std::string doc, bool required = false) {
    std::string expect = "one of";
    for (std::size_t i = 0; i < choices.size(); ++i) expect += (i ? ", " : " ") + choices[i];
    if (choices.empty()) expect = "string";
    KeySpec r{std::move(s), std::move(k), Kind::Str, required, std::nullopt, expect, std::move(choices),
              std::nullopt, std::nullopt, false, false, std::move(doc)};
    if (fallback) r.fallback = *fallback;
    return r;
}

KeySpec bool_key(std::string s, std::string k, bool fallback, std::string doc) {
    return {std::move(s), std::move(k), Kind::Bool, false, Value{fallback}, "boolean", {}, std::nullopt, std::nullopt,
            false, false, std::move(doc)};
}

KeySpec list_key(std::string s, std::string k, Kind kind, std::optional<std::vector<double>> fallback,
                 std::string doc) {
    KeySpec r{std::move(s), std::move(k), kind, false, std::nullopt,
              kind == Kind::IntList ? "array of integers" : "array of reals", {}, std::nullopt, std::nullopt,
              false, false, std::move(doc)};
    if (fallback) r.fallback = *fallback;
    return r;
}

std::vector<KeySpec> build_schema() {
    std::vector<KeySpec> s;
    // [grid]
    s.push_back(positive("grid", "T", std::nullopt, "time horizon", true));
    s.push_back(positive("grid", "a_dagger", std::nullopt, "maximal age", true));
    s.push_back(int_key("grid", "steps", std::nullopt, 1, "(t,a) steps on [0,T]; ds = T/steps", true));
    s.push_back({"grid", "dim", Kind::Int, false, Value{std::int64_t(1)}, "integer 1 or 2", {}, 1.0, 2.0, false,
                 false, "spatial dimension"});
    s.push_back(int_key("grid", "nx", std::int64_t(32), 1, "cells per spatial axis"));
    s.push_back(positive("grid", "L", 1.0, "side length of the spatial box"));
    // [model]
    s.push_back(str_key("model", "diffusion", "identity", {"identity", "diagonal", "sinusoidal"}, "diffusion tensor"));
    s.push_back(positive("model", "d0", 1.0, "first diagonal entry (diagonal) or coefficient"));
    s.push_back(positive("model", "d1", 1.0, "second diagonal entry (diagonal)"));
    s.push_back(real_key("model", "d_amp", 0.1, "real in [0,0.5)", 0.0, 0.5, false, true,
                         "amplitude of d00 = 1 + d_amp sin(t+a)"));
    s.push_back(str_key("model", "source", "zero",
                        {"zero", "linear_death", "logistic", "von_bertalanffy", "arrhenius", "holder_power",
                         "lotka_von_foerster"},
                        "reaction term F"));
    s.push_back(any_real("model", "death", 0.0, "death rate d0 of linear_death"));
    s.push_back(any_real("model", "r", 1.0, "rate of logistic / von_bertalanffy"));
    s.push_back(positive("model", "cap", 1.0, "carrying capacity of logistic"));
    s.push_back(any_real("model", "theta", 1.0, "target size of von_bertalanffy"));
    s.push_back(any_real("model", "A0", 1.0, "prefactor of arrhenius"));
    s.push_back(any_real("model", "E", 1.0, "activation parameter of arrhenius"));
    s.push_back(any_real("model", "c", 1.0, "coefficient of holder_power"));
    s.push_back(real_key("model", "alpha", 1.0, "real in (0,1]", 0.0, 1.0, true, false,
                         "Hoelder exponent of F (the power of holder_power)"));
    s.push_back(positive("model", "L_F", std::nullopt, "declared Hoelder constant of F (default from the kind)"));
    s.push_back(str_key("model", "boundary", "dirichlet", {"dirichlet", "robin"}, "boundary condition"));
    s.push_back(str_key("model", "surface", "zero", {"zero", "linear", "power"}, "surface reaction S (robin)"));
    s.push_back(nonneg("model", "sigma", 0.0, "surface coefficient"));
    s.push_back(real_key("model", "beta", 1.0, "real in (0,1]", 0.0, 1.0, true, false, "Hoelder exponent of S"));
    s.push_back(nonneg("model", "L_S", std::nullopt, "declared Hoelder constant of S (default from the kind)"));
    s.push_back(nonneg("model", "m_bar", std::nullopt, "declared A4 constant (default from the kind)"));
    s.push_back(str_key("model", "inflow", "sine", {"sine", "constant"}, "inflow profile for solve"));
    s.push_back(any_real("model", "inflow_amplitude", 1.0, "inflow amplitude for solve"));
    // [weights]
    s.push_back(positive("weights", "m", 16.0, "weight exponent m"));
    s.push_back(positive("weights", "k", 1.0, "weight exponent k"));
    s.push_back(positive("weights", "eta", 0.05, "weight shift eta"));
    s.push_back(positive("weights", "m0", 8.0, "threshold m0"));
    s.push_back(positive("weights", "mu0", 0.2, "bound mu0 on T + a_dagger"));
    s.push_back(positive("weights", "eta0", 0.05, "bound eta0 on eta"));
    s.push_back(positive("weights", "C0", 2.0, "trace constant for the Robin constants"));
    s.push_back(list_key("weights", "m_sweep", Kind::RealList, std::nullopt, "m values of sweeps"));
    // [cutoff]
    for (const char* k : {"t1", "t2", "a1", "a2", "t3", "a3"})
        s.push_back(nonneg("cutoff", k, std::nullopt, std::string("cutoff breakpoint ") + k));
    s.push_back(int_key("cutoff", "p", std::int64_t(2), 1, "smoothness order of the cutoffs"));
    // [experiment]
    s.push_back(str_key("experiment", "id", std::nullopt,
                        {"mms", "uniqueness_decay", "backward_amp", "carleman_suite", "epidemic_demo", "trace_constant"},
                        "experiment", true));
    s.push_back(int_key("experiment", "seed", std::int64_t(20240611), 0, "seed of randomized corpora"));
    s.push_back(int_key("experiment", "corpus_size", std::int64_t(20), 1, "fields per corpus"));
    s.push_back(bool_key("experiment", "robin", true, "include the Robin family in the suite"));
    s.push_back(list_key("experiment", "sigmas", Kind::RealList, std::vector<double>{0.0, 0.5, 2.0},
                         "linear surface coefficients of the Robin family"));
    s.push_back(list_key("experiment", "robin_m_sweep", Kind::RealList, std::vector<double>{16, 32, 64},
                         "m values of the Robin family"));
    s.push_back(int_key("experiment", "elementary_samples", std::int64_t(100000), 0, "samples of the elementary inequality"));
    s.push_back(positive("experiment", "c_tol", 10.0, "tolerance factor c in c (ds + dx^2) |scale|"));
    s.push_back(bool_key("experiment", "corrupt", false, "negate every inequality LHS (fault injection)"));
    s.push_back(str_key("experiment", "solution", "product", {"product", "x_independent", "zero"},
                        "manufactured solution"));
    s.push_back(list_key("experiment", "nx_levels", Kind::IntList, std::vector<double>{6, 18, 54},
                         "spatial levels (mms: x3 refinements; trace: any)"));
    s.push_back(list_key("experiment", "nt_levels", Kind::IntList, std::vector<double>{16, 32, 64},
                         "characteristic levels (x2 refinements)"));
    s.push_back(int_key("experiment", "nt_fixed", std::int64_t(32), 1, "steps of the spatial study"));
    s.push_back(int_key("experiment", "nx_fixed", std::int64_t(18), 1, "cells of the characteristic study"));
    s.push_back(positive("experiment", "tau", 0.05, "backward march length"));
    s.push_back(nonneg("experiment", "epsilon", 1e-6, "perturbation amplitude"));
    s.push_back(list_key("experiment", "frequencies", Kind::IntList, std::vector<double>{1, 2, 4},
                         "perturbation frequencies"));
    s.push_back(nonneg("experiment", "delta", 1e-5, "inflow difference of the uniqueness scenarios"));
    s.push_back(nonneg("experiment", "delta_from", std::nullopt, "restrict the inflow difference to a >= delta_from"));
    s.push_back(nonneg("experiment", "contact", 1.0, "contact rate m of the epidemic demo"));
    s.push_back(nonneg("experiment", "chi", 1.0, "infectivity chi on [0.2, 0.8] a_dagger"));
    s.push_back(nonneg("experiment", "death_s", 0.1, "susceptible death rate"));
    s.push_back(nonneg("experiment", "death_i", 0.3, "infected death rate"));
    s.push_back(positive("experiment", "cg_tol", 1e-12, "relative CG tolerance"));
    s.push_back(int_key("experiment", "cg_max_iter", std::int64_t(5000), 1, "CG iteration cap"));
    // [output]
    s.push_back(str_key("output", "dir", "out", {}, "artifact directory"));
    s.push_back(bool_key("output", "field_csv", true, "solve: write the full field"));
    return s;
}

std::string show(const KeySpec& k) { return k.section + "." + k.key; }

[[noreturn]] void type_error(const KeySpec& k) { throw Error(ErrorCode::TypeError, show(k) + " expects " + k.expect); }

bool in_range(const KeySpec& k, double v) {
    if (!std::isfinite(v)) return false;
    if (k.lo && (k.lo_open ? !(v > *k.lo) : !(v >= *k.lo))) return false;
    if (k.hi && (k.hi_open ? !(v < *k.hi) : !(v <= *k.hi))) return false;
    return true;
}

std::optional<double> number(const toml::node& n) {
    if (auto i = n.as_integer()) return double(i->get());
    if (auto f = n.as_floating_point()) return f->get();
    return std::nullopt;
}

Value convert(const KeySpec& k, const toml::node& n) {
    switch (k.kind) {
        case Kind::Bool:
            if (auto b = n.as_boolean()) return b->get();
            type_error(k);
        case Kind::Int: {
            auto i = n.as_integer();
            if (!i || !in_range(k, double(i->get()))) type_error(k);
            return std::int64_t(i->get());
        }
        case Kind::Real: {
            auto v = number(n);
            if (!v || !in_range(k, *v)) type_error(k);
            return *v;
        }
        case Kind::Str: {
            auto s = n.as_string();
            if (!s) type_error(k);
            std::string v = s->get();
            if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), v) == k.choices.end()) type_error(k);
            return v;
        }
        case Kind::RealList:
        case Kind::IntList: {
            auto arr = n.as_array();
            if (!arr) type_error(k);
            std::vector<double> out;
            for (const auto& e : *arr) {
                if (k.kind == Kind::IntList && !e.is_integer()) type_error(k);
                auto v = number(e);
                if (!v || !std::isfinite(*v)) type_error(k);
                out.push_back(*v);
            }
            return out;
        }
    }
    type_error(k);
}

void apply_override(toml::table& root, const std::string& ov) {
    auto eq = ov.find('=');
    auto dot = ov.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw Error(ErrorCode::InvalidArgument, "override '" + ov + "' is not section.key=value");
    std::string section = ov.substr(0, dot);
    std::string key = ov.substr(dot + 1, eq - dot - 1);
    std::string value = ov.substr(eq + 1);
    if (!root.contains(section)) root.insert(section, toml::table{});
    auto* sec = root[section].as_table();
    if (!sec) throw Error(ErrorCode::TypeError, section + " must be a table");
    try {
        toml::table tmp = toml::parse("v = " + value);
        sec->insert_or_assign(key, *tmp.get("v"));
    } catch (const toml::parse_error&) {
        sec->insert_or_assign(key, value);
    }
}

RunConfig validate(const toml::table& root) {
    const auto& sch = schema();
    for (const auto& [sk, sn] : root) {
        std::string section(sk.str());
        bool known = std::any_of(sch.begin(), sch.end(), [&](const KeySpec& k) { return k.section == section; });
        if (!known) throw Error(ErrorCode::UnknownKey, section);
        const auto* tbl = sn.as_table();
        if (!tbl) throw Error(ErrorCode::TypeError, section + " expects a table");
        for (const auto& [kk, kn] : *tbl) {
            std::string key(kk.str());
            bool ok = std::any_of(sch.begin(), sch.end(),
                                  [&](const KeySpec& k) { return k.section == section && k.key == key; });
            if (!ok) throw Error(ErrorCode::UnknownKey, section + "." + key);
        }
    }
    RunConfig cfg;
    for (const auto& k : sch) {
        const toml::node* n = nullptr;
        if (const auto* tbl = root.get_as<toml::table>(k.section)) n = tbl->get(k.key);
        if (n) {
            cfg.values[show(k)] = convert(k, *n);
        } else if (k.required) {
            throw Error(ErrorCode::MissingKey, show(k));
        } else if (k.fallback) {
            cfg.values[show(k)] = *k.fallback;
        }
    }
    return cfg;
}

template <class T>
const T& get(const RunConfig& c, const std::string& key) {
    auto it = c.values.find(key);
    if (it == c.values.end()) throw Error(ErrorCode::MissingKey, key);
    if (const T* v = std::get_if<T>(&it->second)) return *v;
    throw Error(ErrorCode::TypeError, key + " has an unexpected type");
}

}  // namespace

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> s = build_schema();
    return s;
}

double RunConfig::real(const std::string& key) const {
    auto it = values.find(key);
    if (it != values.end())
        if (const auto* i = std::get_if<std::int64_t>(&it->second)) return double(*i);
    return get<double>(*this, key);
}

std::int64_t RunConfig::integer(const std::string& key) const { return get<std::int64_t>(*this, key); }
const std::string& RunConfig::str(const std::string& key) const { return get<std::string>(*this, key); }
bool RunConfig::flag(const std::string& key) const { return get<bool>(*this, key); }
const std::vector<double>& RunConfig::reals(const std::string& key) const { return get<std::vector<double>>(*this, key); }

std::optional<double> RunConfig::maybe_real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return real(key);
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                            const std::string& source) {
    toml::table root;
    try {
        root = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << source << ":" << e.source().begin.line << ": " << e.description();
        throw Error(ErrorCode::InvalidArgument, os.str());
    }
    for (const auto& ov : overrides) apply_override(root, ov);
    return validate(root);
}

RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides, path);
}

}  // namespace agepde::cli

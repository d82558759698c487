// Copyright 2026 The PODR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "podr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "podr/binary_io.hpp"
#include "podr/cavity.hpp"
#include "podr/error.hpp"
#include "podr/snapshot_io.hpp"
#include "podr/stream.hpp"
#include "podr/transient.hpp"

namespace podr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

void reject_unknown(const json &obj, std::initializer_list<const char *> allowed, const std::string &where) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto &item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k) { return item.key() == k; })) {
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
        }
    }
}

long long as_int(const json &j, const std::string &where) {
    if (!j.is_number_integer()) {
        throw ConfigError(where + ": expected an integer");
    }
    return j.get<long long>();
}

double as_double(const json &j, const std::string &where) {
    if (!j.is_number()) {
        throw ConfigError(where + ": expected a number");
    }
    return j.get<double>();
}

bool as_bool(const json &j, const std::string &where) {
    if (!j.is_boolean()) {
        throw ConfigError(where + ": expected true or false");
    }
    return j.get<bool>();
}

std::string as_string(const json &j, const std::string &where) {
    if (!j.is_string()) {
        throw ConfigError(where + ": expected a string");
    }
    return j.get<std::string>();
}

const json &as_array(const json &j, const std::string &where) {
    if (!j.is_array()) {
        throw ConfigError(where + ": expected a list");
    }
    return j;
}

std::vector<double> double_list(const json &j, const std::string &where) {
    std::vector<double> out;
    for (const json &v : as_array(j, where)) {
        out.push_back(as_double(v, where));
    }
    return out;
}

std::vector<long long> int_list(const json &j, const std::string &where) {
    std::vector<long long> out;
    for (const json &v : as_array(j, where)) {
        out.push_back(as_int(v, where));
    }
    return out;
}

std::string problem_name(Problem p) {
    switch (p) {
        case Problem::Cavity:
            return "cavity";
        case Problem::Transient:
            return "transient";
        case Problem::Ingested:
            return "ingested";
    }
    return "?";
}

std::string method_key(Method m) {
    switch (m) {
        case Method::PODR:
            return "PODR";
        case Method::RSR:
            return "RSR";
        case Method::FSR:
            return "FSR";
    }
    return "?";
}

std::vector<double> arithmetic(double first, double last, double step) {
    std::vector<double> out;
    for (int k = 0; first + k * step <= last + 1e-9; ++k) {
        out.push_back(first + k * step);
    }
    return out;
}

void apply_problem_defaults(ExperimentConfig &c) {
    switch (c.problem) {
        case Problem::Cavity:
            c.nx = 64;
            c.ny = 64;
            c.ensemble_re = arithmetic(100, 1000, 100);
            c.study_re = arithmetic(50, 1050, 50);
            break;
        case Problem::Transient:
            c.nx = 64;
            c.ny = 32;
            c.align_shots = true;
            for (long long s = 600; s <= 1200; s += 20) {
                c.study_steps.push_back(s);
            }
            break;
        case Problem::Ingested:
            break;
    }
}

void validate(const ExperimentConfig &c) {
    auto pow2 = [](long long v) { return is_power_of_two(v); };
    if (!pow2(c.nx) || !pow2(c.ny) || c.nx < 4 || c.ny < 4) {
        throw ConfigError("config: grid " + std::to_string(c.nx) + "x" + std::to_string(c.ny) +
                          " must have power-of-two sides of at least 4");
    }
    if (c.problem == Problem::Cavity) {
        if (c.nx < 16 || c.ny < 16) {
            throw ConfigError("config: cavity grids need at least 16 points per side");
        }
        if (c.ensemble_re.empty()) {
            throw ConfigError("config: cavity ensemble is empty");
        }
        for (double re : c.ensemble_re) {
            if (!(re >= 1.0 && re <= 5000.0)) {
                throw ConfigError("config: ensemble Re " + std::to_string(re) + " outside [1, 5000]");
            }
        }
        if (!(c.target_re >= 1.0 && c.target_re <= 5000.0)) {
            throw ConfigError("config: target Re outside [1, 5000]");
        }
        if (std::find(c.ensemble_re.begin(), c.ensemble_re.end(), c.target_re) != c.ensemble_re.end()) {
            throw ConfigError("config: target Re " + io::format_double(c.target_re) + " is part of the ensemble");
        }
        if (static_cast<long long>(c.ensemble_re.size()) >= static_cast<long long>(c.nx) * c.ny) {
            throw ConfigError("config: ensemble must be smaller than the grid size");
        }
        for (double re : c.study_re) {
            if (!(re >= 1.0 && re <= 5000.0)) {
                throw ConfigError("config: param_study Re " + std::to_string(re) + " outside [1, 5000]");
            }
        }
    }
    if (c.problem == Problem::Transient) {
        if (c.period < 2) {
            throw ConfigError("config: transient period must be at least 2");
        }
        if (c.window_begin < 0 || c.window_end < c.window_begin) {
            throw ConfigError("config: transient window is empty");
        }
        if (c.window_end - c.window_begin + 1 >= static_cast<long long>(c.nx) * c.ny) {
            throw ConfigError("config: transient window must be smaller than the grid size");
        }
        if (c.target_step < 0 || (c.target_step >= c.window_begin && c.target_step <= c.window_end)) {
            throw ConfigError("config: target step " + std::to_string(c.target_step) + " lies inside the window");
        }
        for (long long s : c.study_steps) {
            if (s < 0) {
                throw ConfigError("config: param_study steps must be non-negative");
            }
        }
    }
    if (c.problem == Problem::Ingested) {
        if (c.ensemble_ux_file.empty() || c.ensemble_uy_file.empty() || c.target_ux_file.empty() ||
            c.target_uy_file.empty()) {
            throw ConfigError("config: ingested problems need ensemble and target ux_file/uy_file");
        }
    }
    if (c.components.empty()) {
        throw ConfigError("config: no components selected");
    }
    std::set<std::string> seen;
    for (const std::string &comp : c.components) {
        if ((comp != "ux" && comp != "uy") || !seen.insert(comp).second) {
            throw ConfigError("config: components must be distinct entries of {ux, uy}");
        }
    }
    if (c.methods.empty()) {
        throw ConfigError("config: no methods selected");
    }
    if (c.shots.empty()) {
        throw ConfigError("config: shot grid is empty");
    }
    for (long long s : c.shots) {
        if (s < 1) {
            throw ConfigError("config: shot budgets must be positive");
        }
    }
    if (c.seeds.empty()) {
        throw ConfigError("config: seed list is empty");
    }
    if (!(c.beta >= 2.0)) {
        throw ConfigError("config: beta must be at least 2");
    }
    if (c.chi_cap < 1 || !is_power_of_two(c.chi_cap)) {
        throw ConfigError("config: chi_cap must be a power of two");
    }
    if (!(c.fsr_cutoff > 0.0 && c.fsr_cutoff < 1.0)) {
        throw ConfigError("config: fsr_cutoff must lie in (0, 1)");
    }
    if (!(c.solver_tol > 0.0) || c.solver_max_iters < 1) {
        throw ConfigError("config: solver tol and max_iters must be positive");
    }
    for (int g : c.depth_grids) {
        if (!is_power_of_two(g) || g < 16) {
            throw ConfigError("config: depth_study grids must be powers of two >= 16");
        }
    }
    if (c.visual_shots < 1) {
        throw ConfigError("config: visual shots must be positive");
    }
}

// ---------------------------------------------------------------------------
// Stage context and small helpers

template <typename F>
auto stage(const std::string &name, F &&f) -> decltype(f()) {
    const std::string pre = "stage '" + name + "': ";
    try {
        return f();
    } catch (const ConvergenceError &e) {
        throw ConvergenceError(pre + e.what(), e.final_residual(), e.iterations());
    } catch (const UnreachableThreshold &e) {
        throw UnreachableThreshold(pre + e.what(), e.best_achieved());
    } catch (const NumericalError &e) {
        throw NumericalError(pre + e.what());
    } catch (const ConfigError &e) {
        throw ConfigError(pre + e.what());
    } catch (const FormatError &e) {
        throw FormatError(e.kind(), pre + e.what());
    }
}

const Field2D &pick(const VelocityField &v, const std::string &component) {
    return component == "ux" ? v.ux : v.uy;
}

std::vector<Field2D> read_fields(const std::string &path) {
    if (fs::path(path).extension() == ".csv") {
        return {read_field_csv(path)};
    }
    return read_snapshot_file(path);
}

long long lcm_of(const std::vector<ComponentOffline> &comps) {
    long long unit = 1;
    for (const auto &c : comps) {
        unit = std::lcm(unit, static_cast<long long>(c.basis.n_b));
    }
    return unit;
}

std::pair<Eigen::VectorXd, double> normalized(const Field2D &f, const std::string &what) {
    const double norm = f.values().norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw NumericalError(what + " has zero or non-finite norm");
    }
    return {f.values() / norm, norm};
}

std::string join_ints(const std::vector<int> &v, char sep) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0) {
            s.push_back(sep);
        }
        s += std::to_string(v[k]);
    }
    return s;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------
// Offline artifacts

struct Ensemble {
    std::vector<double> labels;
    std::vector<VelocityField> fields;
    VelocityField target;
};

Ensemble build_ensemble(const ExperimentConfig &cfg, int threads) {
    Ensemble e;
    if (cfg.problem == Problem::Ingested) {
        std::vector<Field2D> ux = read_fields(cfg.ensemble_ux_file);
        std::vector<Field2D> uy = read_fields(cfg.ensemble_uy_file);
        if (ux.size() != uy.size() || ux.empty()) {
            throw ConfigError("ingested ensemble: " + std::to_string(ux.size()) + " ux and " +
                              std::to_string(uy.size()) + " uy snapshots");
        }
        e.labels = cfg.ensemble_labels;
        if (e.labels.empty()) {
            for (std::size_t k = 0; k < ux.size(); ++k) {
                e.labels.push_back(static_cast<double>(k));
            }
        }
        if (e.labels.size() != ux.size()) {
            throw ConfigError("ingested ensemble: label count does not match snapshot count");
        }
        for (std::size_t k = 0; k < ux.size(); ++k) {
            e.fields.push_back({std::move(ux[k]), std::move(uy[k])});
        }
        std::vector<Field2D> tx = read_fields(cfg.target_ux_file);
        std::vector<Field2D> ty = read_fields(cfg.target_uy_file);
        if (tx.size() != 1 || ty.size() != 1) {
            throw ConfigError("ingested target files must hold exactly one snapshot each");
        }
        e.target = {std::move(tx[0]), std::move(ty[0])};
        for (const VelocityField &v : e.fields) {
            for (const Field2D *f : {&v.ux, &v.uy}) {
                if (f->nx() != cfg.nx || f->ny() != cfg.ny) {
                    throw ConfigError("ingested snapshot grid " + std::to_string(f->nx()) + "x" +
                                      std::to_string(f->ny()) + " does not match the configured grid");
                }
            }
        }
        if (e.target.ux.nx() != cfg.nx || e.target.ux.ny() != cfg.ny || e.target.uy.nx() != cfg.nx ||
            e.target.uy.ny() != cfg.ny) {
            throw ConfigError("ingested target grid does not match the configured grid");
        }
        return e;
    }
    if (cfg.problem == Problem::Cavity) {
        e.labels = cfg.ensemble_re;
    } else {
        for (long long s = cfg.window_begin; s <= cfg.window_end; ++s) {
            e.labels.push_back(static_cast<double>(s));
        }
    }
    std::vector<double> all = e.labels;
    all.push_back(cfg.problem == Problem::Cavity ? cfg.target_re : static_cast<double>(cfg.target_step));
    std::vector<VelocityField> out(all.size());
    parallel_for(all.size(), threads, [&](std::size_t k) { out[k] = flow_state(cfg, all[k]); });
    e.target = std::move(out.back());
    out.pop_back();
    e.fields = std::move(out);
    return e;
}

struct ArtifactSet {
    json hashes = json::object();
    fs::path dir;

    void add(const fs::path &file) { hashes[file.lexically_relative(dir).generic_string()] = io::sha256_file(file); }
};

std::optional<OfflineResult> try_reuse(const ExperimentConfig &cfg, const std::string &hash, const fs::path &dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        return std::nullopt;
    }
    try {
        const std::vector<char> bytes = io::read_file(manifest_path);
        const json m = json::parse(bytes.begin(), bytes.end());
        if (m.at("config_hash").get<std::string>() != hash) {
            return std::nullopt;
        }
        for (const auto &item : m.at("artifacts").items()) {
            const fs::path file = dir / item.key();
            if (!fs::exists(file) || io::sha256_file(file) != item.value().get<std::string>()) {
                return std::nullopt;
            }
        }
        OfflineResult r;
        r.config_hash = hash;
        r.manifest = manifest_path;
        r.reused = true;
        r.labels = m.at("labels").get<std::vector<double>>();
        std::vector<Field2D> target = read_snapshot_file(dir / "target.pods");
        if (target.size() != 2) {
            return std::nullopt;
        }
        r.target = {std::move(target[0]), std::move(target[1])};
        for (const std::string &name : cfg.components) {
            const json &cm = m.at("components").at(name);
            ComponentOffline c;
            c.name = name;
            c.basis = read_pod_basis(dir / ("basis_" + name + ".podb"));
            c.plan.chis = cm.at("chis").get<std::vector<int>>();
            c.plan.estimated_error = cm.at("e_enc_est").get<double>();
            c.e_proj_est = cm.at("e_proj_est").get<double>();
            if (static_cast<int>(c.plan.chis.size()) != c.basis.n_b) {
                return std::nullopt;
            }
            for (int i = 0; i < c.basis.n_b; ++i) {
                c.approximants.push_back(read_mps(dir / ("mps_" + name + "_" + std::to_string(i) + ".podm")));
            }
            c.dense = dense_columns(c.approximants);
            std::tie(c.target, c.target_norm) = normalized(pick(r.target, name), "target " + name);
            r.components.push_back(std::move(c));
        }
        r.shot_unit = lcm_of(r.components);
        return r;
    } catch (const std::exception &) {
        return std::nullopt;
    }
}

// ---------------------------------------------------------------------------
// CSV emission

std::string fmt(double v) { return io::format_double(v); }

void write_text(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    io::atomic_write(path, std::string_view(text));
}

long long podr_budget(long long shots, int n_b, std::vector<std::string> *notes, const std::string &context) {
    const long long rounded = shots / n_b * n_b;
    if (rounded < n_b) {
        throw ConfigError(context + ": budget " + std::to_string(shots) + " is smaller than n_b = " +
                          std::to_string(n_b));
    }
    if (rounded != shots && notes) {
        notes->push_back(context + ": PODR budget " + std::to_string(shots) + " rounded down to " +
                         std::to_string(rounded) + " (multiple of n_b = " + std::to_string(n_b) + ")");
    }
    return rounded;
}

struct Rgb {
    int r, g, b;
};

Rgb diverging(double t) {
    // t in [-1, 1]: blue through white to red.
    t = std::clamp(t, -1.0, 1.0);
    const auto mix = [](int a, int b, double s) { return static_cast<int>(std::lround(a + (b - a) * s)); };
    if (t < 0) {
        const double s = -t;
        return {mix(255, 33, s), mix(255, 102, s), mix(255, 172, s)};
    }
    return {mix(255, 178, t), mix(255, 24, t), mix(255, 43, t)};
}

}  // namespace

// ---------------------------------------------------------------------------

Thresholds thresholds_for(CaseId c) { return c == CaseId::Case1 ? Thresholds{5e-3, 5e-3} : Thresholds{1e-3, 1e-3}; }

ExperimentConfig parse_config(const std::string &json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    reject_unknown(doc,
                   {"problem", "grid", "ensemble", "target", "case", "components", "methods", "shots", "seeds",
                    "beta", "output", "chi_cap", "fsr_cutoff", "sign_oracle", "align_shots", "solver", "transient",
                    "param_study", "depth_study", "visual", "record_timing"},
                   "config");
    ExperimentConfig c;
    if (doc.contains("problem")) {
        const std::string p = as_string(doc["problem"], "problem");
        if (p == "cavity") {
            c.problem = Problem::Cavity;
        } else if (p == "transient") {
            c.problem = Problem::Transient;
        } else if (p == "ingested") {
            c.problem = Problem::Ingested;
        } else {
            throw ConfigError("problem: unknown value \"" + p + "\"");
        }
    }
    apply_problem_defaults(c);

    if (doc.contains("grid")) {
        const json &g = doc["grid"];
        reject_unknown(g, {"nx", "ny"}, "grid");
        if (g.contains("nx")) c.nx = static_cast<int>(as_int(g["nx"], "grid.nx"));
        if (g.contains("ny")) c.ny = static_cast<int>(as_int(g["ny"], "grid.ny"));
    }
    if (doc.contains("ensemble")) {
        const json &e = doc["ensemble"];
        switch (c.problem) {
            case Problem::Cavity:
                reject_unknown(e, {"re"}, "ensemble");
                if (e.contains("re")) c.ensemble_re = double_list(e["re"], "ensemble.re");
                break;
            case Problem::Transient:
                reject_unknown(e, {"window"}, "ensemble");
                if (e.contains("window")) {
                    const std::vector<long long> w = int_list(e["window"], "ensemble.window");
                    if (w.size() != 2) {
                        throw ConfigError("ensemble.window: expected [first, last]");
                    }
                    c.window_begin = w[0];
                    c.window_end = w[1];
                }
                break;
            case Problem::Ingested:
                reject_unknown(e, {"ux_file", "uy_file", "labels"}, "ensemble");
                if (e.contains("ux_file")) c.ensemble_ux_file = as_string(e["ux_file"], "ensemble.ux_file");
                if (e.contains("uy_file")) c.ensemble_uy_file = as_string(e["uy_file"], "ensemble.uy_file");
                if (e.contains("labels")) c.ensemble_labels = double_list(e["labels"], "ensemble.labels");
                break;
        }
    }
    if (doc.contains("target")) {
        const json &t = doc["target"];
        switch (c.problem) {
            case Problem::Cavity:
                reject_unknown(t, {"re"}, "target");
                if (t.contains("re")) c.target_re = as_double(t["re"], "target.re");
                break;
            case Problem::Transient:
                reject_unknown(t, {"step"}, "target");
                if (t.contains("step")) c.target_step = as_int(t["step"], "target.step");
                break;
            case Problem::Ingested:
                reject_unknown(t, {"ux_file", "uy_file"}, "target");
                if (t.contains("ux_file")) c.target_ux_file = as_string(t["ux_file"], "target.ux_file");
                if (t.contains("uy_file")) c.target_uy_file = as_string(t["uy_file"], "target.uy_file");
                break;
        }
    }
    if (doc.contains("case")) {
        const std::string k = as_string(doc["case"], "case");
        if (k == "case1") {
            c.case_id = CaseId::Case1;
        } else if (k == "case2") {
            c.case_id = CaseId::Case2;
        } else {
            throw ConfigError("case: expected \"case1\" or \"case2\"");
        }
    }
    if (doc.contains("components")) {
        c.components.clear();
        for (const json &v : as_array(doc["components"], "components")) {
            c.components.push_back(as_string(v, "components"));
        }
    }
    if (doc.contains("methods")) {
        c.methods.clear();
        for (const json &v : as_array(doc["methods"], "methods")) {
            c.methods.push_back(parse_method(as_string(v, "methods")));
        }
    }
    if (doc.contains("shots")) c.shots = int_list(doc["shots"], "shots");
    if (doc.contains("seeds")) {
        c.seeds.clear();
        for (long long s : int_list(doc["seeds"], "seeds")) {
            if (s < 0) {
                throw ConfigError("seeds: must be non-negative");
            }
            c.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    if (doc.contains("beta")) c.beta = as_double(doc["beta"], "beta");
    if (doc.contains("output")) c.output = as_string(doc["output"], "output");
    if (doc.contains("chi_cap")) c.chi_cap = static_cast<int>(as_int(doc["chi_cap"], "chi_cap"));
    if (doc.contains("fsr_cutoff")) c.fsr_cutoff = as_double(doc["fsr_cutoff"], "fsr_cutoff");
    if (doc.contains("sign_oracle")) c.sign_oracle = as_bool(doc["sign_oracle"], "sign_oracle");
    if (doc.contains("align_shots")) c.align_shots = as_bool(doc["align_shots"], "align_shots");
    if (doc.contains("record_timing")) c.record_timing = as_bool(doc["record_timing"], "record_timing");
    if (doc.contains("solver")) {
        const json &s = doc["solver"];
        reject_unknown(s, {"tol", "max_iters"}, "solver");
        if (s.contains("tol")) c.solver_tol = as_double(s["tol"], "solver.tol");
        if (s.contains("max_iters")) c.solver_max_iters = static_cast<int>(as_int(s["max_iters"], "solver.max_iters"));
    }
    if (doc.contains("transient")) {
        const json &t = doc["transient"];
        reject_unknown(t, {"period", "seed"}, "transient");
        if (t.contains("period")) c.period = static_cast<int>(as_int(t["period"], "transient.period"));
        if (t.contains("seed")) c.transient_seed = static_cast<std::uint64_t>(as_int(t["seed"], "transient.seed"));
    }
    if (doc.contains("param_study")) {
        const json &p = doc["param_study"];
        reject_unknown(p, {"re", "steps"}, "param_study");
        if (p.contains("re")) c.study_re = double_list(p["re"], "param_study.re");
        if (p.contains("steps")) c.study_steps = int_list(p["steps"], "param_study.steps");
    }
    if (doc.contains("depth_study")) {
        const json &d = doc["depth_study"];
        reject_unknown(d, {"grids"}, "depth_study");
        if (d.contains("grids")) {
            c.depth_grids.clear();
            for (long long g : int_list(d["grids"], "depth_study.grids")) {
                c.depth_grids.push_back(static_cast<int>(g));
            }
        }
    }
    if (doc.contains("visual")) {
        const json &v = doc["visual"];
        reject_unknown(v, {"shots"}, "visual");
        if (v.contains("shots")) c.visual_shots = as_int(v["shots"], "visual.shots");
    }
    validate(c);
    return c;
}

ExperimentConfig load_config(const fs::path &path) {
    std::vector<char> bytes;
    try {
        bytes = io::read_file(path);
    } catch (const FormatError &e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_config(std::string(bytes.begin(), bytes.end()));
}

namespace {

json config_json(const ExperimentConfig &c) {
    json j;
    j["problem"] = problem_name(c.problem);
    j["grid"] = {{"nx", c.nx}, {"ny", c.ny}};
    switch (c.problem) {
        case Problem::Cavity:
            j["ensemble"] = {{"re", c.ensemble_re}};
            j["target"] = {{"re", c.target_re}};
            j["param_study"] = {{"re", c.study_re}};
            break;
        case Problem::Transient:
            j["ensemble"] = {{"window", {c.window_begin, c.window_end}}};
            j["target"] = {{"step", c.target_step}};
            j["param_study"] = {{"steps", c.study_steps}};
            break;
        case Problem::Ingested:
            j["ensemble"] = {{"ux_file", c.ensemble_ux_file},
                             {"uy_file", c.ensemble_uy_file},
                             {"labels", c.ensemble_labels}};
            j["target"] = {{"ux_file", c.target_ux_file}, {"uy_file", c.target_uy_file}};
            break;
    }
    j["case"] = c.case_id == CaseId::Case1 ? "case1" : "case2";
    j["components"] = c.components;
    json methods = json::array();
    for (Method m : c.methods) {
        methods.push_back(method_key(m));
    }
    j["methods"] = methods;
    j["shots"] = c.shots;
    j["seeds"] = c.seeds;
    j["beta"] = c.beta;
    j["output"] = c.output.generic_string();
    j["chi_cap"] = c.chi_cap;
    j["fsr_cutoff"] = c.fsr_cutoff;
    j["sign_oracle"] = c.sign_oracle;
    j["align_shots"] = c.align_shots;
    j["record_timing"] = c.record_timing;
    j["solver"] = {{"tol", c.solver_tol}, {"max_iters", c.solver_max_iters}};
    j["transient"] = {{"period", c.period}, {"seed", c.transient_seed}};
    j["depth_study"] = {{"grids", c.depth_grids}};
    j["visual"] = {{"shots", c.visual_shots}};
    return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig &cfg) { return config_json(cfg).dump(2); }

std::string config_hash(const ExperimentConfig &cfg) {
    json j = config_json(cfg);
    j.erase("output");
    return io::sha256_hex(j.dump());
}

VelocityField flow_state(const ExperimentConfig &cfg, double label) {
    switch (cfg.problem) {
        case Problem::Cavity: {
            const fs::path cache = cfg.output / "cache" /
                                   ("cavity_" + std::to_string(cfg.nx) + "x" + std::to_string(cfg.ny) + "_re" +
                                    fmt(label) + "_tol" + fmt(cfg.solver_tol) + "_it" +
                                    std::to_string(cfg.solver_max_iters) + ".pods");
            if (fs::exists(cache)) {
                try {
                    std::vector<Field2D> f = read_snapshot_file(cache);
                    if (f.size() == 2 && f[0].nx() == cfg.nx && f[0].ny() == cfg.ny) {
                        return {std::move(f[0]), std::move(f[1])};
                    }
                } catch (const FormatError &) {
                }
            }
            CavityOptions o;
            o.reynolds = label;
            o.nx = cfg.nx;
            o.ny = cfg.ny;
            o.tol = cfg.solver_tol;
            o.max_iters = cfg.solver_max_iters;
            CavitySolution s = stage("solve Re=" + fmt(label), [&] { return solve_cavity(o); });
            fs::create_directories(cache.parent_path());
            const std::vector<Field2D> pair{s.ux, s.uy};
            write_snapshot_file(pair, cache);
            return {std::move(s.ux), std::move(s.uy)};
        }
        case Problem::Transient:
            return transient_step(transient_modes(cfg.transient_seed), std::llround(label), cfg.period, cfg.nx,
                                  cfg.ny);
        case Problem::Ingested:
            break;
    }
    throw ConfigError("flow_state: ingested problems have no generator");
}

const ComponentOffline &OfflineResult::component(const std::string &name) const {
    for (const ComponentOffline &c : components) {
        if (c.name == name) {
            return c;
        }
    }
    throw ConfigError("component " + name + " is not part of the offline artifacts");
}

OfflineResult run_offline(const ExperimentConfig &cfg, int threads) {
    validate(cfg);
    const std::string hash = config_hash(cfg);
    const fs::path dir = cfg.output / "offline";
    if (std::optional<OfflineResult> reused = try_reuse(cfg, hash, dir)) {
        return std::move(*reused);
    }
    fs::create_directories(dir);

    Ensemble ens = stage("ensemble", [&] { return build_ensemble(cfg, threads); });
    stage("ensemble", [&] {
        for (const VelocityField &v : ens.fields) {
            const std::vector<Field2D> pair{v.ux, v.uy};
            require_finite(pair);
        }
        return 0;
    });

    OfflineResult r;
    r.config_hash = hash;
    r.labels = ens.labels;
    r.target = ens.target;
    r.manifest = dir / "manifest.json";

    ArtifactSet artifacts;
    artifacts.dir = dir;
    for (const std::string name : {"ux", "uy"}) {
        std::vector<Field2D> col;
        for (const VelocityField &v : ens.fields) {
            col.push_back(pick(v, name));
        }
        const fs::path file = dir / ("ensemble_" + name + ".pods");
        write_snapshot_file(col, file);
        artifacts.add(file);
    }
    {
        const std::vector<Field2D> pair{ens.target.ux, ens.target.uy};
        write_snapshot_file(pair, dir / "target.pods");
        artifacts.add(dir / "target.pods");
    }

    const Thresholds th = thresholds_for(cfg.case_id);
    json comps = json::object();
    for (const std::string &name : cfg.components) {
        ComponentOffline c;
        c.name = name;
        std::vector<Field2D> col;
        for (const VelocityField &v : ens.fields) {
            col.push_back(pick(v, name));
        }
        const SnapshotMatrixd s = stage("snapshot matrix (" + name + ")",
                                        [&] { return build_snapshot_matrix<double>(col, ens.labels); });
        c.basis = stage("pod (" + name + ")", [&] { return pod_decompose(s); });
        c.basis.n_b = select_nb(c.basis.sigma, c.basis.m(), th.proj);
        c.e_proj_est = proj_error_estimator(c.basis.sigma, c.basis.m(), c.basis.n_b);
        BondSearchResult<double> found =
            stage("bond search (" + name + ")", [&] { return search_bond_plan(c.basis, th.enc, cfg.chi_cap); });
        c.plan = found.plan;
        c.approximants = std::move(found.approximants);
        c.dense = dense_columns(c.approximants);
        std::tie(c.target, c.target_norm) = normalized(pick(ens.target, name), "target " + name);

        const fs::path bfile = dir / ("basis_" + name + ".podb");
        write_pod_basis(c.basis, bfile);
        artifacts.add(bfile);
        for (int i = 0; i < c.basis.n_b; ++i) {
            const fs::path mfile = dir / ("mps_" + name + "_" + std::to_string(i) + ".podm");
            write_mps(c.approximants[i], mfile);
            artifacts.add(mfile);
        }
        std::vector<double> sigma(c.basis.sigma.data(), c.basis.sigma.data() + c.basis.sigma.size());
        comps[name] = {{"n_b", c.basis.n_b},
                       {"chis", c.plan.chis},
                       {"e_proj_est", c.e_proj_est},
                       {"e_enc_est", c.plan.estimated_error},
                       {"sigma", sigma},
                       {"warnings", s.warnings}};
        r.components.push_back(std::move(c));
    }
    r.shot_unit = lcm_of(r.components);

    json manifest;
    manifest["config_hash"] = hash;
    manifest["problem"] = problem_name(cfg.problem);
    manifest["grid"] = {{"nx", cfg.nx}, {"ny", cfg.ny}};
    manifest["labels"] = r.labels;
    manifest["case"] = cfg.case_id == CaseId::Case1 ? "case1" : "case2";
    manifest["thresholds"] = {{"proj", th.proj}, {"enc", th.enc}};
    manifest["chi_cap"] = cfg.chi_cap;
    manifest["shot_unit"] = r.shot_unit;
    manifest["components"] = comps;
    manifest["artifacts"] = artifacts.hashes;
    write_text(r.manifest, manifest.dump(2) + "\n");
    return r;
}

ReadoutReport readout_component(const ExperimentConfig &cfg, const ComponentOffline &comp, Method method,
                                long long n_shot, std::uint64_t seed) {
    switch (method) {
        case Method::PODR: {
            PodrOptions o;
            o.beta = cfg.beta;
            return podr_readout(comp.target, comp.basis, comp.dense, n_shot, seed, o);
        }
        case Method::RSR:
            return rsr_readout(comp.target, n_shot, seed, cfg.sign_oracle);
        case Method::FSR:
            return fsr_readout(comp.target, cfg.nx, cfg.ny, n_shot, cfg.fsr_cutoff, seed);
    }
    throw ConfigError("unknown method");
}

SweepResult run_shot_sweep(const ExperimentConfig &cfg, const OfflineResult &offline, int threads) {
    struct Cell {
        std::size_t comp;
        Method method;
        long long shots;
        std::uint64_t seed;
    };
    SweepResult result;
    std::vector<Cell> cells;
    for (std::size_t ci = 0; ci < cfg.components.size(); ++ci) {
        const ComponentOffline &comp = offline.component(cfg.components[ci]);
        for (Method m : cfg.methods) {
            for (long long shots : cfg.shots) {
                long long budget = shots;
                if (cfg.align_shots) {
                    budget = shots / offline.shot_unit * offline.shot_unit;
                    if (budget < 1) {
                        throw ConfigError("shot budget " + std::to_string(shots) + " is below the common unit " +
                                          std::to_string(offline.shot_unit));
                    }
                }
                if (m == Method::PODR) {
                    budget = podr_budget(budget, comp.basis.n_b, &result.notes, comp.name);
                }
                for (std::uint64_t seed : cfg.seeds) {
                    cells.push_back({ci, m, budget, seed});
                }
            }
        }
    }
    result.rows.resize(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t k) {
        const Cell &cell = cells[k];
        const ComponentOffline &comp = offline.component(cfg.components[cell.comp]);
        const std::uint64_t s =
            stream_seed(stream_seed(stream_seed(cell.seed, cell.comp), static_cast<std::uint64_t>(cell.method)),
                        static_cast<std::uint64_t>(cell.shots));
        const auto t0 = std::chrono::steady_clock::now();
        const ReadoutReport rep = readout_component(cfg, comp, cell.method, cell.shots, s);
        const auto t1 = std::chrono::steady_clock::now();
        SweepRow &row = result.rows[k];
        row.method = cell.method;
        row.component = comp.name;
        row.grid_size = comp.basis.n();
        row.n_shot_total = cell.shots;
        row.n_b = cell.method == Method::PODR ? rep.n_b : 0;
        row.seed = cell.seed;
        row.epsilon = rep.epsilon;
        row.e_proj = rep.e_proj;
        row.e_enc = rep.e_enc;
        row.e_sam_bound = rep.e_sam_bound;
        row.kept_modes = rep.kept_modes;
        row.wall_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    });

    for (std::size_t ci = 0; ci < cfg.components.size(); ++ci) {
        for (Method m : cfg.methods) {
            std::vector<long long> budgets;
            for (const Cell &c : cells) {
                if (c.comp == ci && c.method == m &&
                    std::find(budgets.begin(), budgets.end(), c.shots) == budgets.end()) {
                    budgets.push_back(c.shots);
                }
            }
            for (long long b : budgets) {
                std::vector<double> eps;
                for (std::size_t k = 0; k < cells.size(); ++k) {
                    if (cells[k].comp == ci && cells[k].method == m && cells[k].shots == b) {
                        eps.push_back(result.rows[k].epsilon);
                    }
                }
                result.medians.push_back({m, cfg.components[ci], b, median_of(eps)});
            }
        }
    }

    write_text(cfg.output / "sweep.csv", format_sweep_csv(result.rows, offline.config_hash));
    write_text(cfg.output / "sweep_medians.csv", format_median_csv(result.medians, offline.config_hash));
    return result;
}

std::vector<ParamRow> run_param_study(const ExperimentConfig &cfg, const OfflineResult &offline, int threads) {
    std::vector<double> labels;
    if (cfg.problem == Problem::Cavity) {
        labels = cfg.study_re;
    } else if (cfg.problem == Problem::Transient) {
        for (long long s : cfg.study_steps) {
            labels.push_back(static_cast<double>(s));
        }
    } else {
        throw ConfigError("param-study needs a cavity or transient problem");
    }
    if (labels.empty()) {
        throw ConfigError("param-study list is empty");
    }
    std::vector<VelocityField> states(labels.size());
    parallel_for(labels.size(), threads, [&](std::size_t k) { states[k] = flow_state(cfg, labels[k]); });

    std::vector<ParamRow> rows;
    for (const std::string &name : cfg.components) {
        const PodBasisd &b = offline.component(name).basis;
        const int nb1 = select_nb(b.sigma, b.m(), thresholds_for(CaseId::Case1).proj);
        const int nb2 = select_nb(b.sigma, b.m(), thresholds_for(CaseId::Case2).proj);
        for (std::size_t k = 0; k < labels.size(); ++k) {
            const Eigen::VectorXd x = normalized(pick(states[k], name), "study field").first;
            ParamRow row;
            row.component = name;
            row.label = labels[k];
            row.in_ensemble = std::find(offline.labels.begin(), offline.labels.end(), labels[k]) != offline.labels.end();
            row.n_b_case1 = nb1;
            row.e_proj_case1 = exact_projection_error(x, b, nb1);
            row.n_b_case2 = nb2;
            row.e_proj_case2 = exact_projection_error(x, b, nb2);
            rows.push_back(row);
        }
    }
    write_text(cfg.output / "param_study.csv", format_param_csv(rows, config_hash(cfg)));
    return rows;
}

std::vector<DepthRow> run_depth_study(const ExperimentConfig &cfg, int threads) {
    if (cfg.problem == Problem::Ingested) {
        throw ConfigError("depth-study needs a cavity or transient problem");
    }
    std::vector<DepthRow> rows;
    for (int g : cfg.depth_grids) {
        ExperimentConfig sub = cfg;
        sub.case_id = CaseId::Case2;
        sub.nx = g;
        sub.ny = cfg.problem == Problem::Transient ? g / 2 : g;
        sub.output = cfg.output / "depth" / (std::to_string(sub.nx) + "x" + std::to_string(sub.ny));
        const int n = log2_exact(static_cast<long long>(sub.nx) * sub.ny);
        sub.chi_cap = 1 << (n / 2);
        const OfflineResult off = stage("depth study " + std::to_string(sub.nx) + "x" + std::to_string(sub.ny),
                                        [&] { return run_offline(sub, threads); });
        for (const ComponentOffline &c : off.components) {
            const CircuitCost cost = cost_model(staircase_layout(c.approximants.back()));
            DepthRow row;
            row.grid_size = c.basis.n();
            row.component = c.name;
            row.n_b = c.basis.n_b;
            row.chis = c.plan.chis;
            row.two_qubit_gates = cost.two_qubit_gate_count;
            row.depth = cost.depth;
            rows.push_back(row);
        }
    }
    write_text(cfg.output / "depth_study.csv", format_depth_csv(rows, config_hash(cfg)));
    return rows;
}

std::vector<VisualPanel> emit_visual_comparison(const ExperimentConfig &cfg, const OfflineResult &offline) {
    const ComponentOffline &cx = offline.component("ux");
    const ComponentOffline &cy = offline.component("uy");
    const fs::path dir = cfg.output / "visual";
    fs::create_directories(dir);

    std::vector<VisualPanel> panels;
    VisualPanel truth;
    truth.label = "truth";
    truth.velocity = offline.target;
    truth.psi = stream_function(truth.velocity.ux);
    panels.push_back(truth);

    for (Method m : cfg.methods) {
        VisualPanel p;
        p.label = method_key(m);
        Field2D *outs[2] = {&p.velocity.ux, &p.velocity.uy};
        double *eps[2] = {&p.epsilon_ux, &p.epsilon_uy};
        const ComponentOffline *comps[2] = {&cx, &cy};
        for (int k = 0; k < 2; ++k) {
            const ComponentOffline &c = *comps[k];
            long long shots = cfg.visual_shots;
            if (m == Method::PODR) {
                shots = podr_budget(shots, c.basis.n_b, nullptr, c.name);
            }
            const std::uint64_t s =
                stream_seed(stream_seed(cfg.seeds.front(), 1000 + k), static_cast<std::uint64_t>(m));
            const ReadoutReport rep = readout_component(cfg, c, m, shots, s);
            *outs[k] = Field2D(cfg.nx, cfg.ny, rep.reconstruction * c.target_norm);
            *eps[k] = rep.epsilon;
        }
        p.psi = stream_function(p.velocity.ux);
        panels.push_back(std::move(p));
    }

    std::string summary = "panel,epsilon_ux,epsilon_uy,max_abs_dpsi,max_abs_u,config_hash\n";
    const double umax = std::max(truth.velocity.ux.values().cwiseAbs().maxCoeff(),
                                 truth.velocity.uy.values().cwiseAbs().maxCoeff());
    for (const VisualPanel &p : panels) {
        write_field_csv(p.velocity.ux, dir / (p.label + "_ux.csv"));
        write_field_csv(p.velocity.uy, dir / (p.label + "_uy.csv"));
        write_field_csv(p.psi, dir / (p.label + "_psi.csv"));
        write_text(dir / (p.label + ".svg"),
                   render_heatmaps_svg({{p.label + " u_x", &p.velocity.ux},
                                        {p.label + " u_y", &p.velocity.uy},
                                        {p.label + " psi", &p.psi}}));
        const double dpsi = (p.psi.values() - truth.psi.values()).cwiseAbs().maxCoeff();
        summary += p.label + "," + fmt(p.epsilon_ux) + "," + fmt(p.epsilon_uy) + "," + fmt(dpsi) + "," + fmt(umax) +
                   "," + offline.config_hash + "\n";
    }
    write_text(dir / "summary.csv", summary);
    return panels;
}

std::string format_sweep_csv(const std::vector<SweepRow> &rows, const std::string &hash) {
    std::string s =
        "method,component,N,n_shot_total,n_b,seed,epsilon,e_proj,e_enc,e_sam_bound,kept_modes,wall_ms,config_hash\n";
    for (const SweepRow &r : rows) {
        s += method_label(r.method) + "," + r.component + "," + std::to_string(r.grid_size) + "," +
             std::to_string(r.n_shot_total) + "," + std::to_string(r.n_b) + "," + std::to_string(r.seed) + "," +
             fmt(r.epsilon) + "," + fmt(r.e_proj) + "," + fmt(r.e_enc) + "," + fmt(r.e_sam_bound) + "," +
             std::to_string(r.kept_modes) + "," + fmt(r.wall_ms) + "," + hash + "\n";
    }
    return s;
}

std::string format_median_csv(const std::vector<MedianRow> &rows, const std::string &hash) {
    std::string s = "method,component,n_shot_total,median_epsilon,config_hash\n";
    for (const MedianRow &r : rows) {
        s += method_label(r.method) + "," + r.component + "," + std::to_string(r.n_shot_total) + "," +
             fmt(r.median_epsilon) + "," + hash + "\n";
    }
    return s;
}

std::string format_param_csv(const std::vector<ParamRow> &rows, const std::string &hash) {
    std::string s = "component,label,in_ensemble,n_b_case1,e_proj_case1,n_b_case2,e_proj_case2,config_hash\n";
    for (const ParamRow &r : rows) {
        s += r.component + "," + fmt(r.label) + "," + (r.in_ensemble ? "1" : "0") + "," +
             std::to_string(r.n_b_case1) + "," + fmt(r.e_proj_case1) + "," + std::to_string(r.n_b_case2) + "," +
             fmt(r.e_proj_case2) + "," + hash + "\n";
    }
    return s;
}

std::string format_depth_csv(const std::vector<DepthRow> &rows, const std::string &hash) {
    std::string s = "N,component,n_b,chi_list,two_qubit_gates,depth,config_hash\n";
    for (const DepthRow &r : rows) {
        s += std::to_string(r.grid_size) + "," + r.component + "," + std::to_string(r.n_b) + "," +
             join_ints(r.chis, ';') + "," + std::to_string(r.two_qubit_gates) + "," + std::to_string(r.depth) +
             "," + hash + "\n";
    }
    return s;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) {
            fn(k);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex lock;
    std::size_t failed_at = count;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard<std::mutex> g(lock);
                    if (k < failed_at) {
                        failed_at = k;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (std::thread &t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::string render_heatmaps_svg(const std::vector<std::pair<std::string, const Field2D *>> &panels) {
    constexpr double kPanel = 256.0;
    constexpr double kGap = 24.0;
    constexpr double kTitle = 20.0;
    std::ostringstream out;
    const double width = panels.size() * (kPanel + kGap) + kGap;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << kPanel + kTitle + 2 * kGap << "\" shape-rendering=\"crispEdges\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const Field2D &f = *panels[p].second;
        const double x0 = kGap + p * (kPanel + kGap);
        const double y0 = kGap + kTitle;
        const double cw = kPanel / f.nx();
        const double ch = kPanel / f.ny();
        const double scale = f.size() > 0 ? f.values().cwiseAbs().maxCoeff() : 0.0;
        out << "<text x=\"" << x0 << "\" y=\"" << kGap + 12 << "\" font-family=\"sans-serif\" font-size=\"13\">"
            << panels[p].first << "</text>\n";
        for (int j = 0; j < f.ny(); ++j) {
            for (int i = 0; i < f.nx(); ++i) {
                const Rgb c = diverging(scale > 0 ? f(i, j) / scale : 0.0);
                char buf[160];
                std::snprintf(buf, sizeof(buf),
                              "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"#%02x%02x%02x\"/>\n",
                              x0 + i * cw, y0 + (f.ny() - 1 - j) * ch, cw, ch, c.r, c.g, c.b);
                out << buf;
            }
        }
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace podr

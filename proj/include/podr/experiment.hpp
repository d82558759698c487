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

#ifndef PODR_EXPERIMENT_HPP
#define PODR_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "podr/circuit.hpp"
#include "podr/field.hpp"
#include "podr/mps.hpp"
#include "podr/pod.hpp"
#include "podr/readout.hpp"

namespace podr {

enum class Problem { Cavity, Transient, Ingested };
enum class CaseId { Case1, Case2 };

struct Thresholds {
    double proj = 0.0;
    double enc = 0.0;
};

/// case1: both estimators <= 5e-3; case2: both <= 1e-3.
Thresholds thresholds_for(CaseId c);

/// Effective experiment description. Built from a JSON document by
/// parse_config; unknown keys are rejected.
struct ExperimentConfig {
    Problem problem = Problem::Cavity;
    int nx = 64;
    int ny = 64;

    std::vector<double> ensemble_re;
    long long window_begin = 600;
    long long window_end = 700;
    std::string ensemble_ux_file;
    std::string ensemble_uy_file;
    std::vector<double> ensemble_labels;

    double target_re = 550.0;
    long long target_step = 720;
    std::string target_ux_file;
    std::string target_uy_file;

    CaseId case_id = CaseId::Case1;
    std::vector<std::string> components{"ux", "uy"};
    std::vector<Method> methods{Method::PODR, Method::RSR, Method::FSR};
    std::vector<long long> shots{1000, 10000, 100000, 1000000};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double beta = 2.0;
    std::filesystem::path output = "podr_out";
    int chi_cap = 16;
    double fsr_cutoff = 1e-3;
    bool sign_oracle = true;
    /// Round every budget down to a multiple of the lcm of the n_b values.
    bool align_shots = false;

    double solver_tol = 1e-8;
    int solver_max_iters = 200;
    int period = 50;
    std::uint64_t transient_seed = 7;

    std::vector<double> study_re;
    std::vector<long long> study_steps;
    std::vector<int> depth_grids{32, 64, 128};
    long long visual_shots = 10000;
    bool record_timing = false;
};

ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const std::filesystem::path &path);
/// Canonical JSON of the effective configuration (sorted keys).
std::string config_to_json(const ExperimentConfig &cfg);
/// SHA-256 of the canonical JSON with the output directory left out.
std::string config_hash(const ExperimentConfig &cfg);

/// Velocity fields of one flow state from the configured generator. Cavity
/// solves are cached under <output>/cache keyed by Re, grid and solver
/// settings.
VelocityField flow_state(const ExperimentConfig &cfg, double label);

struct ComponentOffline {
    std::string name;
    PodBasisd basis;
    BondPlan plan;
    std::vector<MpsVectord> approximants;
    /// Dense contractions of the approximants, one column per basis.
    Eigen::MatrixXd dense;
    double e_proj_est = 0.0;
    /// Unit-norm target snapshot and the norm it was divided by.
    Eigen::VectorXd target;
    double target_norm = 0.0;
};

struct OfflineResult {
    std::string config_hash;
    std::vector<double> labels;
    std::vector<ComponentOffline> components;
    VelocityField target;
    /// Least common multiple of the n_b values.
    long long shot_unit = 1;
    std::filesystem::path manifest;
    /// True when every artifact was reused from a previous identical run.
    bool reused = false;

    const ComponentOffline &component(const std::string &name) const;
};

/// Ensemble generation, POD, basis selection and bond search for every
/// configured component, persisted under <output>/offline with a manifest of
/// content hashes. A rerun whose manifest and artifact hashes match loads the
/// artifacts instead of recomputing them.
OfflineResult run_offline(const ExperimentConfig &cfg, int threads = 1);

struct SweepRow {
    Method method = Method::PODR;
    std::string component;
    long long grid_size = 0;
    long long n_shot_total = 0;
    int n_b = 0;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double e_proj = 0.0;
    double e_enc = 0.0;
    double e_sam_bound = 0.0;
    int kept_modes = 0;
    double wall_ms = 0.0;
};

struct MedianRow {
    Method method = Method::PODR;
    std::string component;
    long long n_shot_total = 0;
    double median_epsilon = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<MedianRow> medians;
    /// Notes on budgets rounded to a multiple of n_b.
    std::vector<std::string> notes;
};

/// Every method x shot budget x seed x component, written to sweep.csv and
/// sweep_medians.csv in the output directory.
SweepResult run_shot_sweep(const ExperimentConfig &cfg, const OfflineResult &offline, int threads = 1);

/// Single readout of one component by one method.
ReadoutReport readout_component(const ExperimentConfig &cfg, const ComponentOffline &comp, Method method,
                                long long n_shot, std::uint64_t seed);

struct ParamRow {
    std::string component;
    double label = 0.0;
    bool in_ensemble = false;
    int n_b_case1 = 0;
    double e_proj_case1 = 0.0;
    int n_b_case2 = 0;
    double e_proj_case2 = 0.0;
};

/// Exact projection error at the Case-1 and Case-2 n_b for every parameter in
/// the study list (Re values or time steps), written to param_study.csv.
std::vector<ParamRow> run_param_study(const ExperimentConfig &cfg, const OfflineResult &offline, int threads = 1);

/// Offline pipeline at Case-2 thresholds for each grid in depth_grids (square
/// grids for the cavity, nx = 2 ny for the transient); reports the cost of the
/// n_b-th basis. Written to depth_study.csv.
std::vector<DepthRow> run_depth_study(const ExperimentConfig &cfg, int threads = 1);

struct VisualPanel {
    std::string label;
    VelocityField velocity;
    Field2D psi;
    double epsilon_ux = 0.0;
    double epsilon_uy = 0.0;
};

/// Truth panel plus one reconstructed panel per method at visual_shots,
/// rescaled by the true component norms. Writes <label>_{ux,uy,psi}.csv and
/// <label>.svg under <output>/visual plus a summary.csv.
std::vector<VisualPanel> emit_visual_comparison(const ExperimentConfig &cfg, const OfflineResult &offline);

std::string format_sweep_csv(const std::vector<SweepRow> &rows, const std::string &hash);
std::string format_median_csv(const std::vector<MedianRow> &rows, const std::string &hash);
std::string format_param_csv(const std::vector<ParamRow> &rows, const std::string &hash);
std::string format_depth_csv(const std::vector<DepthRow> &rows, const std::string &hash);

/// Runs fn(0) .. fn(count-1) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &fn);

/// Minimal SVG heatmaps of several fields side by side.
std::string render_heatmaps_svg(const std::vector<std::pair<std::string, const Field2D *>> &panels);

}  // namespace podr

#endif  // PODR_EXPERIMENT_HPP

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

// Command-line front end: podr <subcommand> [--config FILE] [--out DIR]
// [--seed N] [--threads N]. Exit status 0 on success, 2 on configuration or
// input errors, 3 on numerical failures.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "podr/binary_io.hpp"
#include "podr/cavity.hpp"
#include "podr/error.hpp"
#include "podr/experiment.hpp"
#include "podr/snapshot_io.hpp"
#include "podr/stream.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Globals {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

podr::ExperimentConfig effective_config(const Globals &g) {
    podr::ExperimentConfig cfg = g.config.empty() ? podr::parse_config("{}") : podr::load_config(g.config);
    if (!g.out.empty()) {
        cfg.output = g.out;
    }
    if (g.seed) {
        cfg.seeds = {*g.seed};
    }
    return cfg;
}

void print_offline(const podr::OfflineResult &r) {
    std::printf("offline %s (config %s)\n", r.reused ? "reused" : "computed", r.config_hash.c_str());
    for (const auto &c : r.components) {
        std::printf("  %s: n_b=%d E_proj_est=%.3e E_enc_est=%.3e chis=", c.name.c_str(), c.basis.n_b, c.e_proj_est,
                    c.plan.estimated_error);
        for (std::size_t k = 0; k < c.plan.chis.size(); ++k) {
            std::printf("%s%d", k ? "," : "", c.plan.chis[k]);
        }
        std::printf("\n");
    }
    std::printf("  manifest: %s\n", r.manifest.string().c_str());
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"POD-based readout laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Experiment configuration (JSON)");
    app.add_option("--out", g.out, "Output directory (overrides the config)");
    app.add_option("--seed", g.seed, "Single seed replacing the configured seed list");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);

    double re = 100.0;
    int nx = 64;
    int ny = 64;
    double tol = 1e-8;
    CLI::App *solve = app.add_subcommand("solve", "Solve one lid-driven cavity and export u_x, u_y, psi");
    solve->add_option("--re", re, "Reynolds number");
    solve->add_option("--nx", nx, "Grid points in x");
    solve->add_option("--ny", ny, "Grid points in y");
    solve->add_option("--tol", tol, "Residual tolerance");

    CLI::App *offline = app.add_subcommand("offline", "Build POD bases and compressed encodings");
    CLI::App *readout = app.add_subcommand("readout", "One readout per method at the first budget and seed");
    CLI::App *sweep = app.add_subcommand("sweep", "Shot sweep over methods, budgets and seeds");
    CLI::App *param = app.add_subcommand("param-study", "Projection error over a parameter list");
    CLI::App *depth = app.add_subcommand("depth-study", "Circuit depth versus grid size");
    CLI::App *visual = app.add_subcommand("visualize", "Export reconstructed fields and heatmaps");

    std::vector<std::string> inputs;
    std::string target;
    CLI::App *ingest = app.add_subcommand("ingest", "Pack CSV snapshots into one snapshot file");
    ingest->add_option("inputs", inputs, "CSV files, one snapshot each")->required();
    ingest->add_option("--to", target, "Destination snapshot file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*solve) {
            podr::CavityOptions o;
            o.reynolds = re;
            o.nx = nx;
            o.ny = ny;
            o.tol = tol;
            const podr::CavitySolution s = podr::solve_cavity(o);
            const std::filesystem::path dir = g.out.empty() ? "." : g.out;
            std::filesystem::create_directories(dir);
            const std::string stem = "cavity_re" + podr::io::format_double(re);
            podr::write_field_csv(s.ux, dir / (stem + "_ux.csv"));
            podr::write_field_csv(s.uy, dir / (stem + "_uy.csv"));
            podr::write_field_csv(podr::stream_function(s.ux), dir / (stem + "_psi.csv"));
            const std::vector<podr::Field2D> pair{s.ux, s.uy};
            podr::write_snapshot_file(pair, dir / (stem + ".pods"));
            std::printf("converged in %d steps, residual %.3e, max divergence %.3e\n", s.iterations,
                        s.final_residual, podr::max_interior_divergence(s.ux, s.uy));
            return kOk;
        }
        if (*ingest) {
            std::vector<podr::Field2D> fields;
            for (const std::string &f : inputs) {
                fields.push_back(podr::read_field_csv(f));
            }
            podr::require_finite(fields);
            podr::write_snapshot_file(fields, target);
            std::printf("wrote %zu snapshots to %s\n", fields.size(), target.c_str());
            return kOk;
        }

        const podr::ExperimentConfig cfg = effective_config(g);
        if (*depth) {
            const auto rows = podr::run_depth_study(cfg, g.threads);
            for (const auto &r : rows) {
                std::printf("N=%lld %s n_b=%d depth=%lld\n", r.grid_size, r.component.c_str(), r.n_b,
                            static_cast<long long>(r.depth));
            }
            return kOk;
        }
        const podr::OfflineResult off = podr::run_offline(cfg, g.threads);
        if (*offline) {
            print_offline(off);
        } else if (*readout) {
            std::vector<podr::SweepRow> rows;
            for (const std::string &name : cfg.components) {
                const podr::ComponentOffline &c = off.component(name);
                for (podr::Method m : cfg.methods) {
                    long long shots = cfg.shots.front();
                    if (m == podr::Method::PODR) {
                        shots = shots / c.basis.n_b * c.basis.n_b;
                    }
                    const podr::ReadoutReport rep = podr::readout_component(cfg, c, m, shots, cfg.seeds.front());
                    podr::SweepRow row;
                    row.method = m;
                    row.component = name;
                    row.grid_size = c.basis.n();
                    row.n_shot_total = shots;
                    row.n_b = m == podr::Method::PODR ? rep.n_b : 0;
                    row.seed = cfg.seeds.front();
                    row.epsilon = rep.epsilon;
                    row.e_proj = rep.e_proj;
                    row.e_enc = rep.e_enc;
                    row.e_sam_bound = rep.e_sam_bound;
                    row.kept_modes = rep.kept_modes;
                    rows.push_back(row);
                    std::printf("%s %s shots=%lld epsilon=%.4e\n", podr::method_label(m).c_str(), name.c_str(), shots,
                                rep.epsilon);
                }
            }
            std::filesystem::create_directories(cfg.output);
            podr::io::atomic_write(cfg.output / "readout.csv", podr::format_sweep_csv(rows, off.config_hash));
        } else if (*sweep) {
            const podr::SweepResult r = podr::run_shot_sweep(cfg, off, g.threads);
            for (const std::string &note : r.notes) {
                std::fprintf(stderr, "note: %s\n", note.c_str());
            }
            for (const auto &m : r.medians) {
                std::printf("%s %s shots=%lld median epsilon=%.4e\n", podr::method_label(m.method).c_str(),
                            m.component.c_str(), m.n_shot_total, m.median_epsilon);
            }
        } else if (*param) {
            const auto rows = podr::run_param_study(cfg, off, g.threads);
            std::printf("wrote %zu rows to %s\n", rows.size(), (cfg.output / "param_study.csv").string().c_str());
        } else if (*visual) {
            for (const auto &p : podr::emit_visual_comparison(cfg, off)) {
                std::printf("%s: epsilon_ux=%.4e epsilon_uy=%.4e\n", p.label.c_str(), p.epsilon_ux, p.epsilon_uy);
            }
        }
        return kOk;
    } catch (const podr::ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const podr::FormatError &e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return kConfigError;
    } catch (const podr::NumericalError &e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalError;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

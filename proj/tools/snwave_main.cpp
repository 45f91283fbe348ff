// snwave: Stackelberg-Nash boundary control of the 1-D wave equation on a
// domain with a uniformly moving endpoint, solved on the fixed cylinder.
//
// Subcommands: simulate | follower | leader | validate | oracle-check | sweep
// Exit codes: 0 success, 2 config error, 3 solver non-convergence,
//             4 validation failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snwave/domain.hpp"
#include "snwave/io.hpp"
#include "snwave/leader.hpp"
#include "snwave/nash.hpp"
#include "snwave/oracle.hpp"
#include "snwave/rng.hpp"
#include "snwave/validation.hpp"
#include "snwave/wavesolver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace snwave;

namespace {

class OutputTracker {
  public:
    explicit OutputTracker(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    fs::path file(const std::string& name) {
        created_.push_back(dir_ / name);
        return dir_ / name;
    }

    void discard_all() {
        for (const auto& p : created_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : created_) out.push_back(p.filename().string());
        return out;
    }

    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<fs::path> created_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

void write_manifest(OutputTracker& tracker, const io::RunConfig& cfg,
                    const std::string& subcommand, double seconds, const json& extra) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = io::serialize_config(cfg);
    m["grid"] = {{"ny", cfg.ny}, {"nt", cfg.grid().nt}, {"cfl", cfg.cfl}};
    m["tolerances"] = {{"solver_tol", cfg.solver_tol},
                       {"leader_tol", cfg.leader_tol},
                       {"picard_omega", cfg.picard_omega}};
    m["outputs"] = tracker.names();
    m["timings"] = {{"wall_seconds", seconds}};  // timing metadata; not bit-reproducible
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    write_json(tracker.file("manifest.json"), m);
}

void write_config_echo(OutputTracker& tracker, const io::RunConfig& cfg) {
    std::ofstream out(tracker.file("config_echo.cfg"));
    out << io::serialize_config(cfg);
}

leader::LeaderOptions leader_options(const io::RunConfig& cfg) {
    leader::LeaderOptions opts;
    opts.follower_tol = cfg.solver_tol;
    opts.follower_max_iter = cfg.solver_max_iter;
    opts.picard_omega = cfg.picard_omega;
    opts.astar_method = cfg.astar_method == "cg" ? leader::AstarMethod::NormalCg
                                                 : leader::AstarMethod::Picard;
    opts.tol = cfg.leader_tol;
    opts.max_iter = cfg.leader_max_iter;
    opts.prox_max_iter = cfg.prox_max_iter;
    opts.vi_seed = cfg.seed;
    return opts;
}

int run_simulate(const io::RunConfig& cfg, OutputTracker& tracker) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = cfg.grid();
    cfg.problem.ensure_stable(grid);
    const auto v0 = io::make_grid_function(cfg.init_v0, grid.ny);
    const auto v1 = io::make_grid_function(cfg.init_v1, grid.ny);
    const auto bc = io::make_signal(cfg.w1_spec, cfg.problem, grid, SigmaSupport::SigmaStar);
    const auto field = wavesolver::solve_forward(cfg.problem, grid, bc, nullptr, v0, v1);
    io::write_field_csv(tracker.file("field.csv").string(), cfg.problem, grid, field);
    const auto tp = wavesolver::terminal_pair(cfg.problem, grid, field);
    io::write_grid_function_csv(tracker.file("terminal_position.csv").string(), grid, tp.position);
    io::write_grid_function_csv(tracker.file("terminal_velocity.csv").string(), grid, tp.velocity);
    write_config_echo(tracker, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(tracker, cfg, "simulate", secs, {});
    return 0;
}

int run_follower(const io::RunConfig& cfg, OutputTracker& tracker) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = cfg.grid();
    cfg.problem.ensure_stable(grid);
    const DiscreteSpaces spaces(cfg.problem, grid);

    nash::FollowerProblem fp;
    fp.config = cfg.problem;
    fp.grid = grid;
    fp.w1 = spaces.restrict_to(
        io::make_signal(cfg.w1_spec, cfg.problem, grid, SigmaSupport::Sigma1), SigmaSupport::Sigma1);
    fp.v2_target = io::make_field(cfg.v2_spec, cfg.problem, grid);
    fp.tol = cfg.solver_tol;
    fp.max_iter = cfg.solver_max_iter;
    const auto sol = nash::solve_follower(fp);

    io::write_signal_csv(tracker.file("w1.csv").string(), cfg.problem, grid, fp.w1);
    io::write_signal_csv(tracker.file("w2.csv").string(), cfg.problem, grid, sol.w2);
    io::write_field_csv(tracker.file("v.csv").string(), cfg.problem, grid, sol.v);
    io::write_field_csv(tracker.file("p.csv").string(), cfg.problem, grid, sol.p);

    json summary;
    summary["J"] = nash::eval_J(spaces, fp.w1);
    summary["J2"] = nash::eval_J2(cfg.problem, grid, spaces, fp.w1, sol.w2, &fp.v2_target);
    summary["grad_norm"] = sol.grad_norm;
    summary["iterations"] = sol.iterations;
    summary["cg_history"] = sol.cg_history;
    write_json(tracker.file("summary.json"), summary);
    write_config_echo(tracker, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(tracker, cfg, "follower", secs, {{"iterations", sol.iterations}});
    return 0;
}

int run_leader(const io::RunConfig& cfg, OutputTracker& tracker) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid grid = cfg.grid();
    cfg.problem.ensure_stable(grid);
    const DiscreteSpaces spaces(cfg.problem, grid);
    const auto v2 = io::make_field(cfg.v2_spec, cfg.problem, grid);

    leader::TargetSpec target;
    target.rho0 = cfg.problem.rho0;
    target.rho1 = cfg.problem.rho1;
    if (cfg.v0_spec == "from_forward_run") {
        // reachable target generated by a known leader through a Nash run
        const std::string wspec = cfg.w1_spec == "zero" ? "mix" : cfg.w1_spec;
        const auto wbar = spaces.restrict_to(
            io::make_signal(wspec, cfg.problem, grid, SigmaSupport::Sigma1), SigmaSupport::Sigma1);
        const auto [vbar, pbar] = nash::solve_optimality_system(cfg.problem, grid, spaces, wbar,
                                                                &v2, cfg.solver_tol,
                                                                cfg.solver_max_iter);
        const auto tp = wavesolver::terminal_pair(cfg.problem, grid, vbar);
        target.v0_target = tp.position;
        target.v1_target = tp.velocity;
        io::write_signal_csv(tracker.file("w1_generator.csv").string(), cfg.problem, grid, wbar);
    } else {
        target.v0_target = io::make_grid_function(cfg.v0_spec, grid.ny);
        target.v1_target = io::make_grid_function(cfg.v1_spec, grid.ny);
    }
    io::write_grid_function_csv(tracker.file("target_v0.csv").string(), grid, target.v0_target);
    io::write_grid_function_csv(tracker.file("target_v1.csv").string(), grid, target.v1_target);

    const auto opts = leader_options(cfg);
    const auto sol = leader::solve_leader(cfg.problem, grid, spaces, &v2, target, opts, 100);

    io::write_grid_function_csv(tracker.file("f0.csv").string(), grid, sol.f_star.f0);
    io::write_grid_function_csv(tracker.file("f1.csv").string(), grid, sol.f_star.f1);
    io::write_signal_csv(tracker.file("w1_star.csv").string(), cfg.problem, grid, sol.w1_star);
    io::write_grid_function_csv(tracker.file("achieved_position.csv").string(), grid,
                                sol.achieved.position);
    io::write_grid_function_csv(tracker.file("achieved_velocity.csv").string(), grid,
                                sol.achieved.velocity);

    json summary;
    summary["theta"] = sol.theta_value;
    summary["primal"] = sol.primal_value;
    summary["dual"] = sol.dual_value;
    summary["gap"] = sol.gap;
    summary["residual_l2"] = sol.residual_l2;
    summary["residual_hm1"] = sol.residual_hm1;
    summary["rho0"] = target.rho0;
    summary["rho1"] = target.rho1;
    summary["feasible"] = sol.feasible;
    summary["converged"] = sol.converged;
    summary["iterations"] = sol.iterations;
    summary["vi_worst"] = sol.vi_worst;
    summary["time_horizon_ok"] =
        cfg.problem.k > 0.0 ? domain::check_time_horizon(cfg.problem) : true;
    summary["hist_l2"] = sol.hist_l2;
    summary["hist_hm1"] = sol.hist_hm1;
    summary["hist_combined"] = sol.hist_combined;
    write_json(tracker.file("summary.json"), summary);
    write_config_echo(tracker, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(tracker, cfg, "leader", secs, {{"iterations", sol.iterations}});
    return sol.converged ? 0 : 3;
}

int run_validate(const io::RunConfig& cfg, OutputTracker& tracker) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = validation::run_suite(cfg.seed);
    json j;
    j["seed"] = cfg.seed;
    json checks = json::array();
    for (const auto& r : results) {
        checks.push_back({{"name", r.name},
                          {"pass", r.pass},
                          {"measured", r.measured},
                          {"threshold", r.threshold}});
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (measured "
                  << io::format_double(r.measured) << ", threshold "
                  << io::format_double(r.threshold) << ")\n";
    }
    j["checks"] = checks;
    const bool ok = validation::all_pass(results);
    j["all_pass"] = ok;
    write_json(tracker.file("validation.json"), j);
    write_config_echo(tracker, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(tracker, cfg, "validate", secs, {{"all_pass", ok}});
    return ok ? 0 : 4;
}

int run_oracle_check(const io::RunConfig& cfg, OutputTracker& tracker) {
    const auto t0 = std::chrono::steady_clock::now();
    ProblemConfig pc = cfg.problem;
    Grid grid{8, 24, 0.5};
    if (!pc.cfl_ok(grid)) grid.nt = nt_for_cfl(pc, grid.ny);
    const DiscreteSpaces spaces(pc, grid);
    oracle::DenseSystem sys(pc, grid);
    Rng rng(cfg.seed);

    json j;
    bool ok = true;
    auto record = [&](const std::string& name, double measured, double threshold) {
        const bool pass = measured <= threshold;
        ok = ok && pass;
        j[name] = {{"measured", measured}, {"threshold", threshold}, {"pass", pass}};
        std::cout << (pass ? "PASS" : "FAIL") << "  " << name << "  (measured "
                  << io::format_double(measured) << ")\n";
    };

    // follower vs dense normal equations
    TimeSignal w1 = TimeSignal::zeros(grid.nt, SigmaSupport::Sigma1);
    for (int n = 0; n <= grid.nt; ++n) w1[n] = rng.uniform_sym();
    const auto v2 = io::make_field("sine(1)", pc, grid);
    nash::FollowerProblem fp;
    fp.config = pc;
    fp.grid = grid;
    fp.w1 = w1;
    fp.v2_target = v2;
    fp.tol = 1e-12;
    const auto sol = nash::solve_follower(fp);
    const auto w2d = oracle::dense_follower(sys, spaces, w1, &v2);
    double dn = 0.0, ds = 0.0;
    for (int n = 0; n <= grid.nt; ++n) {
        const double wn = spaces.sigma2_weights()[static_cast<std::size_t>(n)];
        dn += wn * (sol.w2[n] - w2d[n]) * (sol.w2[n] - w2d[n]);
        ds += wn * w2d[n] * w2d[n];
    }
    record("follower_dense_agreement", std::sqrt(dn / std::max(ds, 1e-30)), 1e-8);

    // backward solver vs dense transpose
    const auto src = nash::tracking_source(pc, grid, sol.v, &v2);
    const std::vector<double> zero(grid.ny + 1, 0.0);
    const auto p = wavesolver::solve_backward_adjoint(pc, grid, &src, zero, zero);
    const auto dense = sys.apply_backward(src.values, zero, zero);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        worst = std::max(worst, std::abs(p.values[i] - dense.p[i]));
        scale = std::max(scale, std::abs(p.values[i]));
    }
    record("backward_dense_agreement", worst / std::max(1.0, scale), 1e-10);

    // iterative A* trace vs dense matrix algebra
    const auto op = oracle::assemble_leader_operator(sys, spaces);
    DualVariable f = DualVariable::zeros(grid.ny);
    for (int j = 1; j < grid.ny; ++j) f.f0[j] = std::sin(2.0 * j * grid.dy());
    for (int j = 0; j <= grid.ny; ++j) f.f1[j] = rng.uniform_sym();
    leader::LeaderOptions opts;
    opts.astar_tol = 1e-13;
    opts.follower_tol = 1e-13;
    const auto as = leader::apply_Astar(pc, grid, spaces, f, opts);
    const auto wd = oracle::dense_apply_Astar(op, spaces, f.f0, f.f1);
    double an = 0.0, asum = 0.0;
    for (std::size_t c = 0; c < wd.size(); ++c) {
        const int node = op.sigma1_nodes[c];
        an = std::max(an, std::abs(as.w_trace[node] - wd[c]));
        asum = std::max(asum, std::abs(wd[c]));
    }
    record("astar_dense_agreement", an / std::max(1.0, asum), 1e-8);

    write_json(tracker.file("oracle.json"), j);
    write_config_echo(tracker, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(tracker, cfg, "oracle-check", secs, {{"all_pass", ok}});
    return ok ? 0 : 4;
}

int dispatch(const std::string& sub, const io::RunConfig& cfg, OutputTracker& tracker);

int run_sweep(const std::string& base_text,
              const std::vector<std::pair<std::string, std::vector<std::string>>>& axes,
              const std::string& sub, const std::vector<std::string>& overrides,
              OutputTracker& tracker) {
    std::vector<std::size_t> idx(axes.size(), 0);
    json index = json::array();
    int worst = 0;
    int run_no = 0;
    for (;;) {
        io::RunConfig cfg = io::parse_config_text(base_text);
        for (const auto& o : overrides) io::apply_override(cfg, o);
        json combo;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            cfg.set(axes[a].first, axes[a].second[idx[a]]);
            combo[axes[a].first] = axes[a].second[idx[a]];
        }
        char name[32];
        std::snprintf(name, sizeof name, "run_%03d", run_no++);
        OutputTracker sub_tracker(tracker.dir() / name);
        int code = 0;
        try {
            code = dispatch(sub, cfg, sub_tracker);
        } catch (const SolverError&) {
            sub_tracker.discard_all();
            code = 3;
        }
        worst = std::max(worst, code);
        index.push_back({{"dir", name}, {"overrides", combo}, {"exit_code", code}});

        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++idx[a] < axes[a].second.size()) break;
            idx[a] = 0;
        }
        if (a == axes.size()) break;
        if (axes.empty()) break;
    }
    write_json(tracker.file("sweep.json"), index);
    return worst;
}

int dispatch(const std::string& sub, const io::RunConfig& cfg, OutputTracker& tracker) {
    if (sub == "simulate") return run_simulate(cfg, tracker);
    if (sub == "follower") return run_follower(cfg, tracker);
    if (sub == "leader") return run_leader(cfg, tracker);
    if (sub == "validate") return run_validate(cfg, tracker);
    if (sub == "oracle-check") return run_oracle_check(cfg, tracker);
    throw io::ConfigError("unknown subcommand: " + sub);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stackelberg-Nash boundary control of a wave equation on a moving domain"};
    std::string subcommand;
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    app.add_option("subcommand", subcommand,
                   "simulate | follower | leader | validate | oracle-check | sweep")
        ->required();
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--override", overrides, "repeatable key=value override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        std::string base_text;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in.is_open()) throw io::ConfigError("cannot open config file: " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            base_text = buf.str();
        }

        if (subcommand == "sweep") {
            // sweep.run = <subcommand>; sweep.<key> = v1,v2,... axes
            std::string run_sub = "follower";
            std::vector<std::pair<std::string, std::vector<std::string>>> axes;
            std::string cleaned;
            std::stringstream ss(base_text);
            std::string line;
            while (std::getline(ss, line)) {
                const auto hash = line.find('#');
                std::string body = hash == std::string::npos ? line : line.substr(0, hash);
                const auto eq = body.find('=');
                std::string key = eq == std::string::npos ? "" : body.substr(0, eq);
                key.erase(0, key.find_first_not_of(" \t"));
                key.erase(key.find_last_not_of(" \t") + 1);
                if (key.rfind("sweep.", 0) == 0) {
                    std::string value = body.substr(eq + 1);
                    value.erase(0, value.find_first_not_of(" \t"));
                    value.erase(value.find_last_not_of(" \t\r") + 1);
                    if (key == "sweep.run") {
                        run_sub = value;
                    } else {
                        std::vector<std::string> vals;
                        std::stringstream vs(value);
                        std::string piece;
                        while (std::getline(vs, piece, ',')) {
                            piece.erase(0, piece.find_first_not_of(" \t"));
                            piece.erase(piece.find_last_not_of(" \t") + 1);
                            if (!piece.empty()) vals.push_back(piece);
                        }
                        if (vals.empty())
                            throw io::ConfigError("sweep axis without values: " + key);
                        axes.emplace_back(key.substr(6), vals);
                    }
                } else {
                    cleaned += line + "\n";
                }
            }
            OutputTracker tracker{fs::path(out_dir)};
            return run_sweep(cleaned, axes, run_sub, overrides, tracker);
        }

        io::RunConfig cfg = io::parse_config_text(base_text);
        for (const auto& o : overrides) io::apply_override(cfg, o);
        cfg.problem.validate();

        OutputTracker tracker{fs::path(out_dir)};
        try {
            return dispatch(subcommand, cfg, tracker);
        } catch (...) {
            tracker.discard_all();
            throw;
        }
    } catch (const io::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

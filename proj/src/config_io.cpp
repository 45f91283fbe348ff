#include "snwave/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace snwave::io {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for key '" + key + "': " + v);
    }
}

int to_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return static_cast<int>(x);
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for key '" + key + "': " + v);
    }
}

// "name(a,b,...)" -> (name, args)
std::pair<std::string, std::vector<double>> parse_callable(const std::string& spec) {
    const auto open = spec.find('(');
    if (open == std::string::npos) return {spec, {}};
    if (spec.back() != ')') throw ConfigError("malformed preset: " + spec);
    const std::string name = spec.substr(0, open);
    std::vector<double> args;
    std::string inner = spec.substr(open + 1, spec.size() - open - 2);
    std::stringstream ss(inner);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        piece = trim(piece);
        if (!piece.empty()) args.push_back(to_double(piece, name));
    }
    return {name, args};
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

Grid RunConfig::grid() const {
    Grid g{ny, nt, cfl};
    if (g.nt == 0) g.nt = nt_for_cfl(problem, ny, cfl);
    return g;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "problem.k") problem.k = to_double(value, key);
    else if (key == "problem.T") problem.T = to_double(value, key);
    else if (key == "problem.sigma") problem.sigma = to_double(value, key);
    else if (key == "problem.delta") problem.delta = to_double(value, key);
    else if (key == "problem.rho0") problem.rho0 = to_double(value, key);
    else if (key == "problem.rho1") problem.rho1 = to_double(value, key);
    else if (key == "split.mode") {
        if (value == "overlap") problem.split.mode = ControlSplit::Mode::Overlap;
        else if (value == "time_partition") problem.split.mode = ControlSplit::Mode::TimePartition;
        else throw ConfigError("split.mode must be 'overlap' or 'time_partition', got: " + value);
    } else if (key == "split.t_split") problem.split.t_split = to_double(value, key);
    else if (key == "grid.ny") ny = to_int(value, key);
    else if (key == "grid.nt") nt = to_int(value, key);
    else if (key == "grid.cfl") cfl = to_double(value, key);
    else if (key == "solver.tol") solver_tol = to_double(value, key);
    else if (key == "solver.max_iter") solver_max_iter = to_int(value, key);
    else if (key == "solver.picard_omega") picard_omega = to_double(value, key);
    else if (key == "solver.astar_method") {
        if (value != "picard" && value != "cg")
            throw ConfigError("solver.astar_method must be 'picard' or 'cg', got: " + value);
        astar_method = value;
    } else if (key == "leader.tol") leader_tol = to_double(value, key);
    else if (key == "leader.max_iter") leader_max_iter = to_int(value, key);
    else if (key == "leader.prox_max_iter") prox_max_iter = to_int(value, key);
    else if (key == "target.v2.preset") v2_spec = value;
    else if (key == "target.v2.file") v2_spec = "file(" + value + ")";
    else if (key == "target.v0.preset") v0_spec = value;
    else if (key == "target.v0.file") v0_spec = "file(" + value + ")";
    else if (key == "target.v1.preset") v1_spec = value;
    else if (key == "target.v1.file") v1_spec = "file(" + value + ")";
    else if (key == "init.v0.preset") init_v0 = value;
    else if (key == "init.v1.preset") init_v1 = value;
    else if (key == "control.w1.preset") w1_spec = value;
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_int(value, key));
    else throw ConfigError("unknown config key: " + key);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value, got: " +
                              line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            cfg.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value, got: " + assignment);
    cfg.set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "problem.k = " << format_double(cfg.problem.k) << "\n";
    out << "problem.T = " << format_double(cfg.problem.T) << "\n";
    out << "problem.sigma = " << format_double(cfg.problem.sigma) << "\n";
    out << "problem.delta = " << format_double(cfg.problem.delta) << "\n";
    out << "problem.rho0 = " << format_double(cfg.problem.rho0) << "\n";
    out << "problem.rho1 = " << format_double(cfg.problem.rho1) << "\n";
    out << "split.mode = "
        << (cfg.problem.split.mode == ControlSplit::Mode::Overlap ? "overlap" : "time_partition")
        << "\n";
    out << "split.t_split = " << format_double(cfg.problem.split.t_split) << "\n";
    out << "grid.ny = " << cfg.ny << "\n";
    out << "grid.nt = " << cfg.grid().nt << "\n";
    out << "grid.cfl = " << format_double(cfg.cfl) << "\n";
    out << "solver.tol = " << format_double(cfg.solver_tol) << "\n";
    out << "solver.max_iter = " << cfg.solver_max_iter << "\n";
    out << "solver.picard_omega = " << format_double(cfg.picard_omega) << "\n";
    out << "solver.astar_method = " << cfg.astar_method << "\n";
    out << "leader.tol = " << format_double(cfg.leader_tol) << "\n";
    out << "leader.max_iter = " << cfg.leader_max_iter << "\n";
    out << "leader.prox_max_iter = " << cfg.prox_max_iter << "\n";
    out << "target.v2.preset = " << cfg.v2_spec << "\n";
    out << "target.v0.preset = " << cfg.v0_spec << "\n";
    out << "target.v1.preset = " << cfg.v1_spec << "\n";
    out << "init.v0.preset = " << cfg.init_v0 << "\n";
    out << "init.v1.preset = " << cfg.init_v1 << "\n";
    out << "control.w1.preset = " << cfg.w1_spec << "\n";
    out << "seed = " << cfg.seed << "\n";
    return out.str();
}

std::vector<double> make_grid_function(const std::string& spec, int ny) {
    std::vector<double> f(static_cast<std::size_t>(ny) + 1, 0.0);
    const auto [name, args] = parse_callable(spec);
    const double dy = 1.0 / ny;
    if (name == "zero") return f;
    if (name == "sine") {
        const double m = args.empty() ? 1.0 : args[0];
        for (int j = 0; j <= ny; ++j) f[static_cast<std::size_t>(j)] = std::sin(m * kPi * j * dy);
        return f;
    }
    if (name == "bump") {
        const double c = args.size() > 0 ? args[0] : 0.5;
        const double w = args.size() > 1 ? args[1] : 0.2;
        for (int j = 0; j <= ny; ++j) {
            const double y = j * dy;
            if (std::abs(y - c) < w)
                f[static_cast<std::size_t>(j)] = 0.5 * (1.0 + std::cos(kPi * (y - c) / w));
        }
        return f;
    }
    throw ConfigError("unknown grid-function preset: " + spec);
}

SpaceTimeField make_field(const std::string& spec, const ProblemConfig& cfg, const Grid& grid) {
    const auto [name, args] = parse_callable(spec);
    if (name == "file") {
        const auto open = spec.find('(');
        const std::string path = spec.substr(open + 1, spec.size() - open - 2);
        return read_field_csv(path, grid);
    }
    SpaceTimeField f = SpaceTimeField::zeros(grid);
    const double dy = grid.dy(), dt = cfg.dt(grid);
    if (name == "zero") return f;
    if (name == "constant") {
        const double c = args.empty() ? 1.0 : args[0];
        for (double& v : f.values) v = c;
        return f;
    }
    if (name == "sine") {
        const double m = args.empty() ? 1.0 : args[0];
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j) f.at(n, j) = std::sin(m * kPi * j * dy);
        return f;
    }
    if (name == "bump") {
        const auto g = make_grid_function(spec, grid.ny);
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j) f.at(n, j) = g[static_cast<std::size_t>(j)];
        return f;
    }
    if (name == "separable") {
        const double m = args.size() > 0 ? args[0] : 1.0;
        const double omega = args.size() > 1 ? args[1] : 1.0;
        for (int n = 0; n <= grid.nt; ++n)
            for (int j = 0; j <= grid.ny; ++j)
                f.at(n, j) = std::sin(m * kPi * j * dy) * std::cos(omega * n * dt);
        return f;
    }
    throw ConfigError("unknown field preset: " + spec);
}

TimeSignal make_signal(const std::string& spec, const ProblemConfig& cfg, const Grid& grid,
                       SigmaSupport support) {
    TimeSignal s = TimeSignal::zeros(grid.nt, support);
    const auto [name, args] = parse_callable(spec);
    const double dt = cfg.dt(grid);
    if (name == "zero") return s;
    if (name == "sine") {
        const double m = args.empty() ? 1.0 : args[0];
        for (int n = 0; n <= grid.nt; ++n) s[n] = std::sin(m * kPi * n * dt / cfg.T);
        return s;
    }
    if (name == "mix") {
        for (int n = 0; n <= grid.nt; ++n) {
            const double t = n * dt;
            s[n] = std::sin(kPi * t / cfg.T) + 0.5 * std::sin(3.0 * kPi * t / cfg.T);
        }
        return s;
    }
    throw ConfigError("unknown signal preset: " + spec);
}

void write_signal_csv(const std::string& path, const ProblemConfig& cfg, const Grid& grid,
                      const TimeSignal& s) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write " + path);
    out << "t,value\n";
    const double dt = cfg.dt(grid);
    for (int n = 0; n <= grid.nt; ++n)
        out << format_double(n * dt) << "," << format_double(s[n]) << "\n";
}

void write_field_csv(const std::string& path, const ProblemConfig& cfg, const Grid& grid,
                     const SpaceTimeField& f) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write " + path);
    out << "t,y,value\n";
    const double dt = cfg.dt(grid), dy = grid.dy();
    for (int n = 0; n <= grid.nt; ++n)
        for (int j = 0; j <= grid.ny; ++j)
            out << format_double(n * dt) << "," << format_double(j * dy) << ","
                << format_double(f.at(n, j)) << "\n";
}

void write_grid_function_csv(const std::string& path, const Grid& grid,
                             const std::vector<double>& f) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write " + path);
    out << "y,value\n";
    const double dy = grid.dy();
    for (int j = 0; j <= grid.ny; ++j)
        out << format_double(j * dy) << "," << format_double(f[static_cast<std::size_t>(j)])
            << "\n";
}

SpaceTimeField read_field_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open field file: " + path);
    SpaceTimeField f = SpaceTimeField::zeros(grid);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty field file: " + path);
    std::size_t row = 0;
    const std::size_t expected = f.values.size();
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (row >= expected) throw ConfigError("field file has too many rows: " + path);
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ConfigError("field file row " + std::to_string(row + 2) + " malformed: " + path);
        f.values[row] = to_double(trim(line.substr(c2 + 1)), "field value");
        ++row;
    }
    if (row != expected)
        throw ConfigError("field file row count mismatch (" + std::to_string(row) + " vs " +
                          std::to_string(expected) + "): " + path);
    return f;
}

}  // namespace snwave::io
